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

#include "unilabel/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"
#include "unilabel/error.hpp"
#include "unilabel/parallel.hpp"

namespace unilabel {

namespace fs = std::filesystem;

const char* to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kUnassigned: break;
  }
  return "unassigned";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "unassigned") return Split::kUnassigned;
  throw Error(ErrorKind::kParse, "unknown split '" + std::string(text) + "'");
}

std::string Record::key() const { return dataset_id + "\t" + image_path; }

namespace {

std::regex compile_pattern(const std::string& pattern, const char* which) {
  std::regex re;
  try {
    re = std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw Error(ErrorKind::kArgument, std::string(which) + " pattern '" + pattern + "' is invalid: " + e.what());
  }
  if (re.mark_count() == 0) {
    throw Error(ErrorKind::kArgument,
                std::string(which) + " pattern '" + pattern + "' has no capture group to pair on");
  }
  return re;
}

std::string capture_key(const std::smatch& m) {
  std::string key;
  for (std::size_t i = 1; i < m.size(); ++i) {
    if (i > 1) key.push_back('\x1f');
    key += m[i].str();
  }
  return key;
}

const std::string& sort_path(const Rejection& r) {
  return r.record.image_path.empty() ? r.record.annotation_path : r.record.image_path;
}

void sort_manifest(Manifest& m) {
  std::sort(m.records.begin(), m.records.end(), [](const Record& a, const Record& b) {
    return std::tie(a.image_path, a.dataset_id) < std::tie(b.image_path, b.dataset_id);
  });
  std::stable_sort(m.rejected.begin(), m.rejected.end(),
                   [](const Rejection& a, const Rejection& b) { return sort_path(a) < sort_path(b); });
}

}  // namespace

Manifest scan_dataset(const fs::path& root, const std::string& dataset_id, const PairingRule& rule) {
  const std::regex image_re = compile_pattern(rule.image_pattern, "image");
  const std::regex annotation_re = compile_pattern(rule.annotation_pattern, "annotation");

  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorKind::kIo, "dataset root '" + root.string() + "' is not a readable directory");
  }

  std::vector<std::string> files;
  fs::recursive_directory_iterator it(root, ec), end;
  if (ec) throw Error(ErrorKind::kIo, "cannot read '" + root.string() + "': " + ec.message());
  for (; it != end; it.increment(ec)) {
    if (ec) throw Error(ErrorKind::kIo, "cannot read '" + root.string() + "': " + ec.message());
    if (it->is_regular_file(ec)) files.push_back(fs::relative(it->path(), root).generic_string());
  }
  if (ec) throw Error(ErrorKind::kIo, "cannot read '" + root.string() + "': " + ec.message());
  std::sort(files.begin(), files.end());

  auto full = [&](const std::string& rel) { return (root / rel).generic_string(); };

  Manifest manifest;
  std::map<std::string, std::string> images, annotations;
  for (const std::string& rel : files) {
    std::smatch m;
    if (std::regex_match(rel, m, image_re)) {
      if (!images.emplace(capture_key(m), rel).second) {
        Record r{dataset_id, full(rel), "", 0, 0, Split::kUnassigned};
        manifest.rejected.push_back({std::move(r), "duplicate"});
      }
    } else if (std::regex_match(rel, m, annotation_re)) {
      if (!annotations.emplace(capture_key(m), rel).second) {
        Record r{dataset_id, "", full(rel), 0, 0, Split::kUnassigned};
        manifest.rejected.push_back({std::move(r), "duplicate"});
      }
    }
  }

  for (const auto& [key, image_rel] : images) {
    auto ann = annotations.find(key);
    Record r{dataset_id, full(image_rel), "", 0, 0, Split::kUnassigned};
    if (ann == annotations.end()) {
      manifest.rejected.push_back({std::move(r), "unpaired"});
      continue;
    }
    r.annotation_path = full(ann->second);
    try {
      const Dimensions d = probe_dimensions(r.image_path);
      r.width = d.width;
      r.height = d.height;
    } catch (const Error&) {
      // Left at 0x0; validate_pairs reports the pair as corrupt.
    }
    manifest.records.push_back(std::move(r));
  }
  for (const auto& [key, annotation_rel] : annotations) {
    if (!images.contains(key)) {
      manifest.rejected.push_back({Record{dataset_id, "", full(annotation_rel), 0, 0, Split::kUnassigned}, "unpaired"});
    }
  }
  sort_manifest(manifest);
  return manifest;
}

Manifest validate_pairs(const Manifest& manifest) {
  Manifest out;
  out.rejected = manifest.rejected;
  for (const Record& r : manifest.records) {
    Dimensions image_dims, annotation_dims;
    try {
      image_dims = probe_dimensions(r.image_path);
      const ImageBuffer annotation = read_image(r.annotation_path);
      annotation_dims = {annotation.width, annotation.height};
    } catch (const Error&) {
      out.rejected.push_back({r, "corrupt"});
      continue;
    }
    if (image_dims != annotation_dims) {
      Record bad = r;
      bad.width = image_dims.width;
      bad.height = image_dims.height;
      out.rejected.push_back({std::move(bad), "size-mismatch"});
      continue;
    }
    Record good = r;
    good.width = image_dims.width;
    good.height = image_dims.height;
    out.records.push_back(std::move(good));
  }
  return out;
}

namespace {

void check_field(const std::string& value, const char* what) {
  if (value.find_first_of("\t\n\r") != std::string::npos) {
    throw Error(ErrorKind::kArgument, std::string(what) + " contains a tab or newline: '" + value + "'");
  }
}

void write_row(std::ostringstream& out, const Record& r, std::string_view split) {
  check_field(r.dataset_id, "dataset id");
  check_field(r.image_path, "image path");
  check_field(r.annotation_path, "annotation path");
  out << r.dataset_id << '\t' << r.image_path << '\t' << r.annotation_path << '\t' << r.width << '\t'
      << r.height << '\t' << split;
}

int parse_int_field(std::string_view text, std::size_t line) {
  int v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || v < 0) {
    throw ParseError(line, "expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string format_manifest(const Manifest& manifest) {
  std::ostringstream out;
  out << "# dataset_id\timage_path\tannotation_path\twidth\theight\tsplit\n";
  for (const Record& r : manifest.records) {
    write_row(out, r, to_string(r.split));
    out << '\n';
  }
  for (const Rejection& r : manifest.rejected) {
    check_field(r.reason, "reason");
    write_row(out, r.record, "rejected");
    out << '\t' << r.reason << '\n';
  }
  return out.str();
}

Manifest parse_manifest(std::string_view text) {
  detail::require_utf8(text);
  Manifest manifest;
  std::map<std::string, std::size_t> keys;
  for (const detail::Line& line : detail::split_lines(text)) {
    if (line.text.empty() || line.text.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.text.find('\t', start);
      fields.push_back(line.text.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    Record r;
    if (fields.size() < 6) throw ParseError(line.number, "expected 6 tab-separated fields");
    r.dataset_id = std::string(fields[0]);
    r.image_path = std::string(fields[1]);
    r.annotation_path = std::string(fields[2]);
    r.width = parse_int_field(fields[3], line.number);
    r.height = parse_int_field(fields[4], line.number);
    if (fields[5] == "rejected") {
      if (fields.size() != 7) throw ParseError(line.number, "rejected entries need a reason column");
      manifest.rejected.push_back({std::move(r), std::string(fields[6])});
      continue;
    }
    if (fields.size() != 6) throw ParseError(line.number, "expected 6 tab-separated fields");
    if (r.dataset_id.empty() || r.image_path.empty() || r.annotation_path.empty()) {
      throw ParseError(line.number, "empty dataset id or path");
    }
    try {
      r.split = parse_split(fields[5]);
    } catch (const Error& e) {
      throw ParseError(line.number, e.what());
    }
    if (auto [it, inserted] = keys.emplace(r.key(), line.number); !inserted) {
      throw ParseError(line.number, "duplicate record (first on line " + std::to_string(it->second) + ")");
    }
    manifest.records.push_back(std::move(r));
  }
  return manifest;
}

std::uint64_t ClassHistogram::total_eval_pixels() const {
  std::uint64_t total = 0;
  for (int c = 0; c < kIgnoreId; ++c) total += counts[c];
  return total;
}

ClassHistogram& ClassHistogram::operator+=(const ClassHistogram& other) {
  for (std::size_t c = 0; c < counts.size(); ++c) counts[c] += other.counts[c];
  return *this;
}

ClassHistogram histogram_of(const AnnotationRaster& raster) {
  ClassHistogram h;
  for (std::uint8_t v : raster.ids) ++h.counts[v];
  return h;
}

std::vector<ClassHistogram> record_histograms(std::span<const Record> records, const ClassMap& map,
                                              const HistogramOptions& options) {
  std::vector<ClassHistogram> out(records.size());
  parallel_for(records.size(), options.workers, [&](std::size_t i) {
    const Record& r = records[i];
    out[i] = histogram_of(load_universal_annotation(r.annotation_path, map, r.dataset_id, options.strict));
  });
  return out;
}

ClassHistogram class_histogram(std::span<const Record> records, const ClassMap& map,
                               const HistogramOptions& options) {
  return parallel_map_reduce(
      records.size(), options.workers, ClassHistogram{},
      [&](std::size_t i, ClassHistogram& acc) {
        const Record& r = records[i];
        acc += histogram_of(load_universal_annotation(r.annotation_path, map, r.dataset_id, options.strict));
      },
      [](ClassHistogram& into, ClassHistogram&& part) { into += part; });
}

std::string histogram_json(const ClassHistogram& histogram) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (int c = 0; c < kIgnoreId; ++c) {
    if (histogram.counts[c] != 0) doc[std::to_string(c)] = histogram.counts[c];
  }
  doc["total_eval_pixels"] = histogram.total_eval_pixels();
  return doc.dump(2) + "\n";
}

}  // namespace unilabel
