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

#ifndef UNILABEL_RASTER_HPP
#define UNILABEL_RASTER_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unilabel/image_io.hpp"
#include "unilabel/taxonomy.hpp"

namespace unilabel {

// Which label-space the ids of a raster live in.
struct SpaceTag {
  bool universal = false;
  std::string dataset_id;  // empty for universal

  static SpaceTag local(std::string dataset_id) { return {false, std::move(dataset_id)}; }
  static SpaceTag universal_space() { return {true, {}}; }

  friend bool operator==(const SpaceTag&, const SpaceTag&) = default;
};

struct AnnotationRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> ids;  // row-major
  SpaceTag space;

  AnnotationRaster() = default;
  AnnotationRaster(int w, int h, std::vector<std::uint8_t> values, SpaceTag tag);

  std::size_t pixel_count() const { return ids.size(); }
  std::uint8_t at(int x, int y) const { return ids[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const AnnotationRaster&, const AnnotationRaster&) = default;
};

struct DecodeOptions {
  bool strict = true;
  // 16-bit label maps are refused unless this is set. When set, values up to
  // 255 pass through and `sentinel16` (if any) becomes the ignore id.
  bool allow_16bit = false;
  std::optional<std::uint16_t> sentinel16;
};

AnnotationRaster decode_indexed(const ImageBuffer& image, std::string dataset_id,
                                const DecodeOptions& options = {});

// Binary colour code to class id: 4*bit(R) + 2*bit(G) + bit(B), bit(v) = v >= 128.
constexpr std::uint8_t color_code_id(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>(((r >= 128) << 2) | ((g >= 128) << 1) | (b >= 128));
}

// Channel values accepted by strict colour decoding: 0..31 or 224..255.
constexpr bool color_channel_in_range(std::uint16_t v) { return v <= 31 || (v >= 224 && v <= 255); }

// Canonical colour of a code id (channels 0 or 255).
std::array<std::uint8_t, 3> color_for_code(std::uint8_t id);

AnnotationRaster decode_color_coded(const ImageBuffer& image, std::string dataset_id, bool strict);

// Decodes according to the dataset's declared encoding.
AnnotationRaster decode_annotation(const ImageBuffer& image, const DatasetMapping& dataset,
                                   const DecodeOptions& options = {});

// Pointwise LUT application over raw ids. With a strict LUT an undeclared id
// throws kRange; `width` is used only to report the pixel coordinates.
void remap_ids(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, const Lut& lut,
               int width = 0);

AnnotationRaster remap(const AnnotationRaster& raster, const Lut& lut);

// Single-channel 8-bit image; ids must be < class_count or 255.
ImageBuffer encode_universal(const AnnotationRaster& raster, int class_count);

// Decode (by encoding) + remap, reading from disk.
AnnotationRaster load_universal_annotation(const std::filesystem::path& path, const ClassMap& map,
                                           const std::string& dataset_id, bool strict);

}  // namespace unilabel

#endif  // UNILABEL_RASTER_HPP
