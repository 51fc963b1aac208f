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

#include "unilabel/image_io.hpp"

#include <png.h>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "unilabel/error.hpp"

namespace unilabel {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::kIo, "cannot read '" + path.string() + "'");
  return bytes;
}

std::string read_text_file(const fs::path& path) {
  auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::kIo, "cannot create '" + path.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
}

void write_text_file(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// PNG (libpng). Errors longjmp back into the function that called setjmp; no
// C++ object is constructed between setjmp and the libpng calls.

namespace {

struct PngErrorState {
  std::jmp_buf jump;
  char message[256] = {};
};

void png_error_fn(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof(state->message), "%s", msg);
  std::longjmp(state->jump, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

struct PngReadSource {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos;
};

void png_read_fn(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->pos + length > src->size) png_error(png, "unexpected end of PNG data");
  std::memcpy(out, src->data + src->pos, length);
  src->pos += length;
}

void png_write_fn(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  sink->insert(sink->end(), data, data + length);
}

void png_flush_fn(png_structp) {}

// Returns false and fills state.message on failure.
bool png_decode_raw(std::span<const std::uint8_t> bytes, ImageBuffer& image,
                    std::vector<std::uint8_t>& raw, PngErrorState& state) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &state, png_error_fn, png_warning_fn);
  if (png == nullptr) {
    std::snprintf(state.message, sizeof(state.message), "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows;
  PngReadSource src{bytes.data(), bytes.size(), 0};

  if (setjmp(state.jump)) {
    png_destroy_read_struct(&png, info != nullptr ? &info : nullptr, nullptr);
    return false;
  }
  if (info == nullptr) png_error(png, "out of memory");

  png_set_read_fn(png, &src, png_read_fn);
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (depth < 8) png_set_packing(png);  // one byte per sample, values unscaled
  if (depth == 16) png_set_swap(png);   // little-endian 16-bit samples on read
  if (png_get_interlace_type(png, info) != PNG_INTERLACE_NONE) png_set_interlace_handling(png);
  png_read_update_info(png, info);

  image.width = static_cast<int>(width);
  image.height = static_cast<int>(height);
  image.channels = png_get_channels(png, info);
  image.bit_depth = depth == 16 ? 16 : 8;
  image.palette = color_type == PNG_COLOR_TYPE_PALETTE;

  const std::size_t row_bytes = png_get_rowbytes(png, info);
  raw.resize(row_bytes * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = raw.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool png_encode_raw(const ImageBuffer& image, std::span<const std::uint8_t> raw, std::size_t row_bytes,
                    std::vector<std::uint8_t>& out, PngErrorState& state) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &state, png_error_fn, png_warning_fn);
  if (png == nullptr) {
    std::snprintf(state.message, sizeof(state.message), "out of memory");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height));
  std::array<png_color, 256> gray_palette{};

  if (setjmp(state.jump)) {
    png_destroy_write_struct(&png, info != nullptr ? &info : nullptr);
    return false;
  }
  if (info == nullptr) png_error(png, "out of memory");

  int color_type = PNG_COLOR_TYPE_GRAY;
  switch (image.channels) {
    case 1: color_type = image.palette ? PNG_COLOR_TYPE_PALETTE : PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    default: color_type = PNG_COLOR_TYPE_RGB_ALPHA; break;
  }
  png_set_write_fn(png, &out, png_write_fn, png_flush_fn);
  png_set_compression_level(png, 6);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
               image.bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_BASE,
               PNG_FILTER_TYPE_BASE);
  if (image.palette) {
    for (int i = 0; i < 256; ++i) {
      gray_palette[i].red = gray_palette[i].green = gray_palette[i].blue = static_cast<png_byte>(i);
    }
    png_set_PLTE(png, info, gray_palette.data(), 256);
  }
  png_write_info(png, info);
  if (image.bit_depth == 16) png_set_swap(png);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = const_cast<png_bytep>(raw.data() + static_cast<std::size_t>(y) * row_bytes);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorKind::kFormat, "not a PNG file");
  }
  ImageBuffer image;
  std::vector<std::uint8_t> raw;
  PngErrorState state;
  if (!png_decode_raw(bytes, image, raw, state)) {
    throw Error(ErrorKind::kFormat, std::string("PNG decode failed: ") + state.message);
  }
  const std::size_t n = image.pixel_count() * image.channels;
  image.samples.resize(n);
  if (image.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      image.samples[i] = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
    }
  } else {
    std::copy(raw.begin(), raw.begin() + static_cast<std::ptrdiff_t>(n), image.samples.begin());
  }
  return image;
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  if (image.width < 1 || image.height < 1) throw Error(ErrorKind::kArgument, "empty image");
  if (image.channels < 1 || image.channels > 4) throw Error(ErrorKind::kArgument, "unsupported channel count");
  if (image.bit_depth != 8 && image.bit_depth != 16) throw Error(ErrorKind::kArgument, "unsupported bit depth");
  if (image.palette && (image.channels != 1 || image.bit_depth != 8)) {
    throw Error(ErrorKind::kArgument, "palette images must be 1 channel, 8 bits");
  }
  const std::size_t n = image.pixel_count() * image.channels;
  if (image.samples.size() != n) throw Error(ErrorKind::kArgument, "sample count does not match dimensions");

  const std::size_t bytes_per_sample = image.bit_depth / 8;
  std::vector<std::uint8_t> raw(n * bytes_per_sample);
  for (std::size_t i = 0; i < n; ++i) {
    if (bytes_per_sample == 1) {
      raw[i] = static_cast<std::uint8_t>(image.samples[i]);
    } else {
      raw[2 * i] = static_cast<std::uint8_t>(image.samples[i] & 0xFF);
      raw[2 * i + 1] = static_cast<std::uint8_t>(image.samples[i] >> 8);
    }
  }
  std::vector<std::uint8_t> out;
  PngErrorState state;
  const std::size_t row_bytes = static_cast<std::size_t>(image.width) * image.channels * bytes_per_sample;
  if (!png_encode_raw(image, raw, row_bytes, out, state)) {
    throw Error(ErrorKind::kFormat, std::string("PNG encode failed: ") + state.message);
  }
  return out;
}

// ---------------------------------------------------------------------------
// BMP

namespace {

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

struct BmpHeader {
  std::uint32_t pixel_offset;
  std::int32_t width;
  std::int32_t height;  // negative: top-down
  std::uint16_t bpp;
  std::uint32_t compression;
};

BmpHeader read_bmp_header(std::span<const std::uint8_t> b) {
  if (b.size() < 30 || b[0] != 'B' || b[1] != 'M') throw Error(ErrorKind::kFormat, "not a BMP file");
  const std::uint32_t dib = le32(b, 14);
  if (dib < 40 || b.size() < 14 + static_cast<std::size_t>(dib)) {
    throw Error(ErrorKind::kFormat, "unsupported BMP header");
  }
  BmpHeader h{};
  h.pixel_offset = le32(b, 10);
  h.width = static_cast<std::int32_t>(le32(b, 18));
  h.height = static_cast<std::int32_t>(le32(b, 22));
  h.bpp = le16(b, 28);
  h.compression = le32(b, 30);
  if (h.width <= 0 || h.height == 0 || h.height == INT32_MIN) {
    throw Error(ErrorKind::kFormat, "invalid BMP dimensions");
  }
  return h;
}

}  // namespace

ImageBuffer decode_bmp(std::span<const std::uint8_t> bytes) {
  const BmpHeader h = read_bmp_header(bytes);
  if (h.bpp != 24 || h.compression != 0) {
    throw Error(ErrorKind::kFormat, "only uncompressed 24-bit BMP is supported (got " +
                                        std::to_string(h.bpp) + "-bit, compression " +
                                        std::to_string(h.compression) + ")");
  }
  const bool top_down = h.height < 0;
  ImageBuffer image;
  image.width = h.width;
  image.height = top_down ? -h.height : h.height;
  image.channels = 3;
  image.bit_depth = 8;
  const std::size_t stride = (static_cast<std::size_t>(image.width) * 3 + 3) & ~std::size_t{3};
  if (h.pixel_offset + stride * image.height > bytes.size()) {
    throw Error(ErrorKind::kFormat, "truncated BMP pixel data");
  }
  image.samples.resize(image.pixel_count() * 3);
  for (int y = 0; y < image.height; ++y) {
    const int src_row = top_down ? y : image.height - 1 - y;
    const std::uint8_t* row = bytes.data() + h.pixel_offset + stride * src_row;
    for (int x = 0; x < image.width; ++x) {
      const std::size_t dst = (static_cast<std::size_t>(y) * image.width + x) * 3;
      image.samples[dst + 0] = row[3 * x + 2];
      image.samples[dst + 1] = row[3 * x + 1];
      image.samples[dst + 2] = row[3 * x + 0];
    }
  }
  return image;
}

std::vector<std::uint8_t> encode_bmp(const ImageBuffer& image) {
  if (image.channels != 3 || image.bit_depth != 8) {
    throw Error(ErrorKind::kArgument, "BMP output needs 3 channels at 8 bits");
  }
  if (image.width < 1 || image.height < 1 || image.samples.size() != image.pixel_count() * 3) {
    throw Error(ErrorKind::kArgument, "sample count does not match dimensions");
  }
  const std::size_t stride = (static_cast<std::size_t>(image.width) * 3 + 3) & ~std::size_t{3};
  const std::uint32_t data_size = static_cast<std::uint32_t>(stride * image.height);
  std::vector<std::uint8_t> out;
  out.reserve(54 + data_size);
  out.push_back('B');
  out.push_back('M');
  put32(out, 54 + data_size);
  put32(out, 0);
  put32(out, 54);
  put32(out, 40);
  put32(out, static_cast<std::uint32_t>(image.width));
  put32(out, static_cast<std::uint32_t>(image.height));
  put16(out, 1);
  put16(out, 24);
  put32(out, 0);
  put32(out, data_size);
  put32(out, 2835);
  put32(out, 2835);
  put32(out, 0);
  put32(out, 0);
  for (int y = image.height - 1; y >= 0; --y) {
    const std::size_t start = out.size();
    for (int x = 0; x < image.width; ++x) {
      out.push_back(static_cast<std::uint8_t>(image.at(x, y, 2)));
      out.push_back(static_cast<std::uint8_t>(image.at(x, y, 1)));
      out.push_back(static_cast<std::uint8_t>(image.at(x, y, 0)));
    }
    while (out.size() - start < stride) out.push_back(0);
  }
  return out;
}

ImageBuffer decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'B' && bytes[1] == 'M') return decode_bmp(bytes);
  throw Error(ErrorKind::kFormat, "unrecognized image format");
}

ImageBuffer read_image(const fs::path& path) {
  auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Header probes

namespace {

Dimensions probe_jpeg(std::span<const std::uint8_t> b) {
  std::size_t pos = 2;
  while (pos + 4 <= b.size()) {
    if (b[pos] != 0xFF) throw Error(ErrorKind::kFormat, "corrupt JPEG marker stream");
    std::uint8_t marker = b[pos + 1];
    if (marker == 0xFF) {  // fill byte
      ++pos;
      continue;
    }
    pos += 2;
    if (marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) continue;
    if (marker == 0xD9 || marker == 0xDA) break;
    const std::size_t length = (static_cast<std::size_t>(b[pos]) << 8) | b[pos + 1];
    if (length < 2 || pos + length > b.size()) break;
    const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
    if (sof) {
      if (length < 7) break;
      Dimensions d;
      d.height = (b[pos + 3] << 8) | b[pos + 4];
      d.width = (b[pos + 5] << 8) | b[pos + 6];
      if (d.width == 0 || d.height == 0) break;
      return d;
    }
    pos += length;
  }
  throw Error(ErrorKind::kFormat, "JPEG without a frame header");
}

}  // namespace

Dimensions probe_dimensions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> head(64 * 1024);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  std::span<const std::uint8_t> b(head);

  try {
    if (b.size() >= 24 && png_sig_cmp(b.data(), 0, 8) == 0) {
      if (std::memcmp(b.data() + 12, "IHDR", 4) != 0) throw Error(ErrorKind::kFormat, "PNG without IHDR");
      const auto be32 = [&](std::size_t at) {
        return (static_cast<std::uint32_t>(b[at]) << 24) | (static_cast<std::uint32_t>(b[at + 1]) << 16) |
               (static_cast<std::uint32_t>(b[at + 2]) << 8) | b[at + 3];
      };
      Dimensions d{static_cast<int>(be32(16)), static_cast<int>(be32(20))};
      if (d.width <= 0 || d.height <= 0) throw Error(ErrorKind::kFormat, "invalid PNG dimensions");
      return d;
    }
    if (b.size() >= 2 && b[0] == 'B' && b[1] == 'M') {
      const BmpHeader h = read_bmp_header(b);
      return Dimensions{h.width, h.height < 0 ? -h.height : h.height};
    }
    if (b.size() >= 4 && b[0] == 0xFF && b[1] == 0xD8) return probe_jpeg(b);
    throw Error(ErrorKind::kFormat, "unrecognized image format");
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::kIo, "SHA-256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace unilabel
