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

#ifndef UNILABEL_CATALOG_HPP
#define UNILABEL_CATALOG_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "unilabel/raster.hpp"
#include "unilabel/taxonomy.hpp"

namespace unilabel {

enum class Split { kUnassigned, kTrain, kVal };

const char* to_string(Split split);
Split parse_split(std::string_view text);

struct Record {
  std::string dataset_id;
  std::string image_path;
  std::string annotation_path;
  int width = 0;
  int height = 0;
  Split split = Split::kUnassigned;

  // Unique identity of a record: "<dataset_id>\t<image_path>".
  std::string key() const;

  friend bool operator==(const Record&, const Record&) = default;
};

struct Rejection {
  Record record;
  std::string reason;  // "unpaired", "size-mismatch", "corrupt", "duplicate"

  friend bool operator==(const Rejection&, const Rejection&) = default;
};

struct Manifest {
  std::vector<Record> records;
  std::vector<Rejection> rejected;

  std::size_t scanned() const { return records.size() + rejected.size(); }

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

// Regular expressions (ECMAScript) matched against root-relative paths with
// '/' separators. Their capture groups form the pairing key, so both patterns
// need at least one group, e.g. `images/(.*)\.jpg` and `masks/(.*)\.bmp`.
struct PairingRule {
  std::string image_pattern;
  std::string annotation_pattern;
};

Manifest scan_dataset(const std::filesystem::path& root, const std::string& dataset_id,
                      const PairingRule& rule);

// Moves pairs whose image and annotation sizes differ to rejected
// ("size-mismatch") and unreadable ones to rejected ("corrupt").
Manifest validate_pairs(const Manifest& manifest);

// Tab-separated: dataset_id, image_path, annotation_path, width, height,
// split. Rejected entries use split "rejected" and a 7th reason column.
std::string format_manifest(const Manifest& manifest);
Manifest parse_manifest(std::string_view text);

struct ClassHistogram {
  std::array<std::uint64_t, 256> counts{};  // counts[kIgnoreId] holds ignore pixels

  std::uint64_t total_eval_pixels() const;
  ClassHistogram& operator+=(const ClassHistogram& other);

  friend bool operator==(const ClassHistogram&, const ClassHistogram&) = default;
};

ClassHistogram histogram_of(const AnnotationRaster& raster);

struct HistogramOptions {
  bool strict = true;
  unsigned workers = 1;
};

// Per-record universal-space histograms, in record order.
std::vector<ClassHistogram> record_histograms(std::span<const Record> records, const ClassMap& map,
                                              const HistogramOptions& options = {});

ClassHistogram class_histogram(std::span<const Record> records, const ClassMap& map,
                               const HistogramOptions& options = {});

// {"<class id>": count, ..., "total_eval_pixels": n}; zero and ignore counts omitted.
std::string histogram_json(const ClassHistogram& histogram);

}  // namespace unilabel

#endif  // UNILABEL_CATALOG_HPP
