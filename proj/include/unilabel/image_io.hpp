// Copyright 2026 The Unilabel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNILABEL_IMAGE_IO_HPP
#define UNILABEL_IMAGE_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace unilabel {

// Decoded image samples, row-major, channels interleaved. 8-bit images keep
// their values in the low byte. Palette PNGs are returned as one channel of
// raw palette indices with `palette` set.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  bool palette = false;
  std::vector<std::uint16_t> samples;

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  std::uint16_t at(int x, int y, int channel = 0) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + channel];
  }
};

struct Dimensions {
  int width = 0;
  int height = 0;

  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

ImageBuffer decode_png(std::span<const std::uint8_t> bytes);
// Writes gray (1), gray+alpha (2), RGB (3) or RGBA (4) at 8 or 16 bits, or a
// palette image (1 channel, 8 bits, grayscale palette). No ancillary chunks,
// fixed compression settings: equal input gives equal bytes.
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);

// Uncompressed 24-bit BMP, bottom-up or top-down.
ImageBuffer decode_bmp(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_bmp(const ImageBuffer& image);

// Dispatches on the file signature (PNG or BMP).
ImageBuffer decode_image(std::span<const std::uint8_t> bytes);
ImageBuffer read_image(const std::filesystem::path& path);

// Reads only the header of a PNG, BMP or JPEG file. Throws kFormat when the
// header is missing or damaged.
Dimensions probe_dimensions(const std::filesystem::path& path);

// Hex SHA-256 of a byte string.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

}  // namespace unilabel

#endif  // UNILABEL_IMAGE_IO_HPP
