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

// Fixtures and brute-force oracles shared by the unit tests and the
// acceptance binary.

#ifndef UNILABEL_TESTS_SUPPORT_HPP
#define UNILABEL_TESTS_SUPPORT_HPP

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "unilabel/catalog.hpp"
#include "unilabel/image_io.hpp"
#include "unilabel/raster.hpp"
#include "unilabel/taxonomy.hpp"

namespace unilabel::testing {

namespace fs = std::filesystem;

inline fs::path data_path(const std::string& rel) { return fs::path(UNILABEL_DATA_DIR) / rel; }

inline std::vector<DatasetTaxonomy> shipped_taxonomies(bool with_sun = true) {
  std::vector<DatasetTaxonomy> out;
  out.push_back(parse_taxonomy(read_text_file(data_path("taxonomies/cityscapes.txt"))));
  out.push_back(parse_taxonomy(read_text_file(data_path("taxonomies/suim.txt"))));
  if (with_sun) out.push_back(parse_taxonomy(read_text_file(data_path("taxonomies/sun_rgbd.txt"))));
  return out;
}

inline MergeResult shipped_merge() {
  const auto taxonomies = shipped_taxonomies();
  const auto directives =
      parse_directives(read_text_file(data_path("directives/cityscapes_suim_sun.txt")), taxonomies);
  return merge_label_spaces(taxonomies, directives);
}

// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("unilabel_test_" + std::to_string(rd()) + "_" + std::to_string(counter.fetch_add(1)));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline ImageBuffer gray_image(int w, int h, const std::vector<std::uint8_t>& values) {
  ImageBuffer img;
  img.width = w;
  img.height = h;
  img.channels = 1;
  img.samples.assign(values.begin(), values.end());
  return img;
}

inline ImageBuffer rgb_image(int w, int h, const std::vector<std::uint8_t>& interleaved) {
  ImageBuffer img;
  img.width = w;
  img.height = h;
  img.channels = 3;
  img.samples.assign(interleaved.begin(), interleaved.end());
  return img;
}

inline void write_gray_png(const fs::path& path, int w, int h, const std::vector<std::uint8_t>& values) {
  write_file(path, encode_png(gray_image(w, h, values)));
}

inline void write_rgb_png(const fs::path& path, int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  std::vector<std::uint8_t> px;
  for (int i = 0; i < w * h; ++i) px.insert(px.end(), {r, g, b});
  write_file(path, encode_png(rgb_image(w, h, px)));
}

inline std::vector<std::uint8_t> random_ids(std::mt19937_64& rng, std::size_t n, int k, double ignore_rate) {
  std::uniform_int_distribution<int> cls(0, k - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::uint8_t> out(n);
  for (auto& v : out) v = u(rng) < ignore_rate ? kIgnoreId : static_cast<std::uint8_t>(cls(rng));
  return out;
}

// Every declared local id, ignore lines included.
inline std::vector<int> declared_ids(const DatasetTaxonomy& t) {
  std::vector<int> ids;
  for (const auto& c : t.classes) ids.push_back(c.id);
  return ids;
}

// Brute-force ClassMap application, independent of Lut: linear search over
// the universal classes' contributor lists.
inline int oracle_map(const MergeResult& merged, const DatasetTaxonomy& t, int local) {
  if (local == kIgnoreId) return kIgnoreId;
  for (const auto& u : merged.space.classes) {
    for (const auto& ref : u.contributors) {
      if (ref.dataset_id == t.dataset_id && ref.local_id == local) return u.id;
    }
  }
  for (const auto& c : t.classes) {
    if (c.id == local) return kIgnoreId;  // declared but ignored or map_ignore'd
  }
  return -1;  // undeclared
}

// Nested-loop confusion tally and IoU.
struct OracleConfusion {
  int k;
  std::vector<std::vector<std::uint64_t>> counts;

  explicit OracleConfusion(int k_) : k(k_), counts(k_, std::vector<std::uint64_t>(k_, 0)) {}

  void add(const std::vector<std::uint8_t>& gt, const std::vector<std::uint8_t>& pred) {
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (gt[i] == kIgnoreId) continue;
      counts[gt[i]][pred[i]] += 1;
    }
  }

  std::optional<double> iou(int c) const {
    std::uint64_t tp = counts[c][c], fp = 0, fn = 0;
    for (int g = 0; g < k; ++g) {
      if (g != c) fp += counts[g][c];
    }
    for (int p = 0; p < k; ++p) {
      if (p != c) fn += counts[c][p];
    }
    if (tp + fp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
  }

  std::optional<double> miou() const {
    double sum = 0;
    int n = 0;
    for (int c = 0; c < k; ++c) {
      if (auto v = iou(c)) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  }
};

// Per-class L1 divergence computed from scratch.
inline double oracle_divergence(const std::vector<std::vector<std::uint64_t>>& rows,
                                const std::vector<bool>& in_val) {
  std::map<int, double> val, train;
  double vt = 0, tt = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c == kIgnoreId) continue;
      (in_val[i] ? val : train)[static_cast<int>(c)] += static_cast<double>(rows[i][c]);
      (in_val[i] ? vt : tt) += static_cast<double>(rows[i][c]);
    }
  }
  double sum = 0;
  for (int c = 0; c < kIgnoreId; ++c) sum += std::abs(val[c] / vt - train[c] / tt);
  return sum;
}

// Records with skewed class mixtures: a few dominant classes per record,
// drawn from a Zipf-like class popularity.
inline std::vector<std::vector<std::uint64_t>> skewed_histograms(std::mt19937_64& rng, std::size_t n,
                                                                  int classes) {
  std::vector<double> weight(classes);
  for (int c = 0; c < classes; ++c) weight[c] = 1.0 / (1.0 + c);
  std::discrete_distribution<int> pick(weight.begin(), weight.end());
  std::uniform_int_distribution<int> present(1, 4);
  std::uniform_int_distribution<std::uint64_t> amount(50, 5000);
  std::vector<std::vector<std::uint64_t>> rows(n, std::vector<std::uint64_t>(256, 0));
  for (auto& row : rows) {
    const int m = present(rng);
    for (int j = 0; j < m; ++j) row[pick(rng)] += amount(rng);
    row[kIgnoreId] = amount(rng) / 10;
  }
  return rows;
}

// Pairing patterns for the layout written by write_source_dataset.
inline constexpr const char* kImagePattern = R"(images/(.*)\.bmp)";
inline constexpr const char* kAnnotationPattern = R"(labels/(.*)\.png)";

// Writes `count` pairs <dir>/images/sNNN.bmp + <dir>/labels/sNNN.png whose
// labels are random declared ids of `t`, colour-coded when `t` is.
inline void write_source_dataset(const fs::path& dir, const DatasetTaxonomy& t, std::size_t count, int w, int h,
                                 std::mt19937_64& rng) {
  const auto declared = declared_ids(t);
  std::uniform_int_distribution<std::size_t> pick(0, declared.size() - 1);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const auto image = encode_bmp(rgb_image(w, h, std::vector<std::uint8_t>(n * 3, 90)));
  for (std::size_t i = 0; i < count; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "s%03zu", i);
    write_file(dir / "images" / (std::string(stem) + ".bmp"), image);
    std::vector<std::uint8_t> ids(n);
    for (auto& v : ids) v = static_cast<std::uint8_t>(declared[pick(rng)]);
    const fs::path label = dir / "labels" / (std::string(stem) + ".png");
    if (t.encoding == Encoding::kColorCoded) {
      std::vector<std::uint8_t> px;
      px.reserve(n * 3);
      for (auto v : ids) {
        const auto c = color_for_code(v);
        px.insert(px.end(), c.begin(), c.end());
      }
      write_file(label, encode_png(rgb_image(w, h, px)));
    } else {
      write_gray_png(label, w, h, ids);
    }
  }
}

inline std::string record_key(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "rec%04zu", i);
  return buf;
}

}  // namespace unilabel::testing

#endif  // UNILABEL_TESTS_SUPPORT_HPP
