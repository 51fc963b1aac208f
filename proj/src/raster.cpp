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

#include "unilabel/raster.hpp"

#include "unilabel/error.hpp"

namespace unilabel {

namespace {

std::string at_pixel(std::size_t index, int width) {
  if (width <= 0) return "pixel " + std::to_string(index);
  return "pixel (" + std::to_string(index % static_cast<std::size_t>(width)) + "," +
         std::to_string(index / static_cast<std::size_t>(width)) + ")";
}

}  // namespace

AnnotationRaster::AnnotationRaster(int w, int h, std::vector<std::uint8_t> values, SpaceTag tag)
    : width(w), height(h), ids(std::move(values)), space(std::move(tag)) {
  if (w < 1 || h < 1) throw Error(ErrorKind::kArgument, "raster dimensions must be at least 1x1");
  if (ids.size() != static_cast<std::size_t>(w) * h) {
    throw Error(ErrorKind::kArgument, "raster has " + std::to_string(ids.size()) + " ids for " +
                                          std::to_string(w) + "x" + std::to_string(h) + " pixels");
  }
}

AnnotationRaster decode_indexed(const ImageBuffer& image, std::string dataset_id,
                                const DecodeOptions& options) {
  if (image.channels != 1) throw Error(ErrorKind::kFormat, "expected single-channel label map");
  if (image.bit_depth == 16 && !options.allow_16bit) {
    throw Error(ErrorKind::kFormat, "16-bit label map needs explicit narrowing");
  }
  if (image.bit_depth != 8 && image.bit_depth != 16) {
    throw Error(ErrorKind::kFormat, "unsupported bit depth " + std::to_string(image.bit_depth));
  }
  std::vector<std::uint8_t> ids(image.pixel_count());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::uint16_t v = image.samples[i];
    if (v <= 255) {
      ids[i] = static_cast<std::uint8_t>(v);
    } else if (options.sentinel16 && v == *options.sentinel16) {
      ids[i] = kIgnoreId;
    } else {
      throw Error(ErrorKind::kRange, "label value " + std::to_string(v) + " at " +
                                         at_pixel(i, image.width) + " does not fit in 8 bits");
    }
  }
  return AnnotationRaster(image.width, image.height, std::move(ids), SpaceTag::local(std::move(dataset_id)));
}

std::array<std::uint8_t, 3> color_for_code(std::uint8_t id) {
  if (id > 7) throw Error(ErrorKind::kRange, "colour code id must be 0..7");
  return {static_cast<std::uint8_t>((id & 4) ? 255 : 0), static_cast<std::uint8_t>((id & 2) ? 255 : 0),
          static_cast<std::uint8_t>((id & 1) ? 255 : 0)};
}

AnnotationRaster decode_color_coded(const ImageBuffer& image, std::string dataset_id, bool strict) {
  if (image.channels != 3) {
    throw Error(ErrorKind::kFormat, "expected 3-channel colour-coded annotation, got " +
                                        std::to_string(image.channels) + " channels");
  }
  if (image.bit_depth != 8 || image.palette) {
    throw Error(ErrorKind::kFormat, "colour-coded annotations must be 8 bits per channel");
  }
  std::vector<std::uint8_t> ids(image.pixel_count());
  const std::uint16_t* px = image.samples.data();
  for (std::size_t i = 0; i < ids.size(); ++i, px += 3) {
    if (strict && !(color_channel_in_range(px[0]) && color_channel_in_range(px[1]) &&
                    color_channel_in_range(px[2]))) {
      throw Error(ErrorKind::kRange, "colour (" + std::to_string(px[0]) + "," + std::to_string(px[1]) +
                                         "," + std::to_string(px[2]) + ") at " +
                                         at_pixel(i, image.width) + " is not a binary colour code");
    }
    ids[i] = color_code_id(static_cast<std::uint8_t>(px[0]), static_cast<std::uint8_t>(px[1]),
                           static_cast<std::uint8_t>(px[2]));
  }
  return AnnotationRaster(image.width, image.height, std::move(ids), SpaceTag::local(std::move(dataset_id)));
}

AnnotationRaster decode_annotation(const ImageBuffer& image, const DatasetMapping& dataset,
                                   const DecodeOptions& options) {
  if (dataset.encoding == Encoding::kColorCoded) {
    return decode_color_coded(image, dataset.dataset_id, options.strict);
  }
  return decode_indexed(image, dataset.dataset_id, options);
}

void remap_ids(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, const Lut& lut, int width) {
  if (in.size() != out.size()) throw Error(ErrorKind::kArgument, "remap buffers differ in size");
  const auto& table = lut.table();
  const std::size_t n = in.size();
  if (!lut.strict()) {
    for (std::size_t i = 0; i < n; ++i) out[i] = table[in[i]];
    return;
  }
  const auto& declared = lut.declared_mask();
  std::uint8_t all_declared = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t v = in[i];
    out[i] = table[v];
    all_declared &= declared[v];
  }
  if (all_declared) return;
  for (std::size_t i = 0; i < n; ++i) {
    if (!declared[in[i]]) {
      throw Error(ErrorKind::kRange, "undeclared class id " + std::to_string(in[i]) + " at " +
                                         at_pixel(i, width) +
                                         (lut.dataset_id().empty() ? "" : " in dataset '" + lut.dataset_id() + "'"));
    }
  }
}

AnnotationRaster remap(const AnnotationRaster& raster, const Lut& lut) {
  if (!lut.dataset_id().empty() && (raster.space.universal || raster.space.dataset_id != lut.dataset_id())) {
    throw Error(ErrorKind::kArgument, "LUT for dataset '" + lut.dataset_id() +
                                          "' applied to a raster in another label-space");
  }
  AnnotationRaster out;
  out.width = raster.width;
  out.height = raster.height;
  out.space = SpaceTag::universal_space();
  out.ids.resize(raster.ids.size());
  remap_ids(raster.ids, out.ids, lut, raster.width);
  return out;
}

ImageBuffer encode_universal(const AnnotationRaster& raster, int class_count) {
  if (!raster.space.universal) throw Error(ErrorKind::kArgument, "raster is not in the universal label-space");
  if (class_count < 1 || class_count > kIgnoreId) {
    throw Error(ErrorKind::kRange, "universal class count must be 1..255");
  }
  ImageBuffer image;
  image.width = raster.width;
  image.height = raster.height;
  image.channels = 1;
  image.bit_depth = 8;
  image.samples.resize(raster.ids.size());
  for (std::size_t i = 0; i < raster.ids.size(); ++i) {
    const std::uint8_t v = raster.ids[i];
    if (v >= class_count && v != kIgnoreId) {
      throw Error(ErrorKind::kRange, "id " + std::to_string(v) + " at " + at_pixel(i, raster.width) +
                                         " is outside the universal label-space (K=" +
                                         std::to_string(class_count) + ")");
    }
    image.samples[i] = v;
  }
  return image;
}

AnnotationRaster load_universal_annotation(const std::filesystem::path& path, const ClassMap& map,
                                           const std::string& dataset_id, bool strict) {
  const DatasetMapping& mapping = map.at(dataset_id);
  const ImageBuffer image = read_image(path);
  DecodeOptions options;
  options.strict = strict;
  try {
    return remap(decode_annotation(image, mapping, options), Lut::build(map, dataset_id, strict));
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace unilabel
