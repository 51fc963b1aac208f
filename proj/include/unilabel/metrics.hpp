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

#ifndef UNILABEL_METRICS_HPP
#define UNILABEL_METRICS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "unilabel/raster.hpp"
#include "unilabel/taxonomy.hpp"

namespace unilabel {

// counts(g, p): pixels with ground truth g predicted as p. Pixels whose ground
// truth is the ignore id are never counted.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int k);

  int k() const { return k_; }
  std::uint64_t operator()(int gt, int pred) const { return counts_[index(gt, pred)]; }
  std::uint64_t& operator()(int gt, int pred) { return counts_[index(gt, pred)]; }

  std::uint64_t true_positives(int c) const;
  std::uint64_t false_positives(int c) const;
  std::uint64_t false_negatives(int c) const;
  std::uint64_t total() const;

  // Adds one (gt, pred) pair. Both must be universal rasters of equal size;
  // ground truth ids must be < k or the ignore id, predictions < k wherever
  // the ground truth is not ignored.
  void accumulate(const AnnotationRaster& gt, const AnnotationRaster& pred);
  void accumulate(std::span<const std::uint8_t> gt, std::span<const std::uint8_t> pred);

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  std::span<const std::uint64_t> data() const { return counts_; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t index(int gt, int pred) const { return static_cast<std::size_t>(gt) * k_ + pred; }

  int k_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix accumulate(ConfusionMatrix m, const AnnotationRaster& gt, const AnnotationRaster& pred);
ConfusionMatrix merge_confusions(const ConfusionMatrix& a, const ConfusionMatrix& b);

// IoU_c = TP / (TP + FP + FN); nullopt where the denominator is 0.
std::vector<std::optional<double>> iou_per_class(const ConfusionMatrix& m);

// Mean of the defined IoUs inside `subset` (all classes if empty). Throws
// kRange when none is defined.
double mean_iou(const ConfusionMatrix& m, std::span<const int> subset = {});

struct IoUReport {
  std::vector<std::optional<double>> per_class;
  double mean_iou = 0.0;
  std::vector<int> evaluated_classes;  // defined classes the mean runs over
};

IoUReport iou_report(const ConfusionMatrix& m, std::span<const int> subset = {});

// Fraction of non-ignore predicted pixels whose class is in `reachable`.
double domain_exclusivity(const AnnotationRaster& pred, std::span<const int> reachable);

struct ExclusivityTally {
  std::uint64_t in_domain = 0;
  std::uint64_t total = 0;

  void add(const AnnotationRaster& pred, std::span<const int> reachable);
  ExclusivityTally& operator+=(const ExclusivityTally& o) {
    in_domain += o.in_domain;
    total += o.total;
    return *this;
  }
  std::optional<double> fraction() const;

  friend bool operator==(const ExclusivityTally&, const ExclusivityTally&) = default;
};

// Everything accumulated for one source dataset.
struct DomainEvaluation {
  std::string dataset_id;
  ConfusionMatrix confusion;
  ExclusivityTally exclusivity;
};

struct DomainReport {
  std::string dataset_id;
  double mean_iou = 0.0;
  std::vector<int> reachable;
  std::vector<std::optional<double>> per_class;  // universal id -> IoU; only reachable ids set
  std::optional<double> exclusivity;
};

// mIoU per dataset over the universal classes reachable from it. The full
// matrix is kept, so predictions outside the domain still count as misses.
std::vector<DomainReport> per_domain_report(std::span<const DomainEvaluation> evaluations,
                                            const UniversalLabelSpace& space);

// Half-up rounding for presentation, e.g. round_half_up(70.265, 2) = 70.27.
double round_half_up(double value, int decimals);

// {dataset: {miou, per_class: {name: iou}, exclusivity}} in percent, 2 decimals.
std::string report_json(std::span<const DomainReport> reports, const UniversalLabelSpace& space,
                        const std::vector<std::pair<std::string, std::string>>& metadata = {});

// Aligned text: an mIoU table (one column per dataset) followed by a
// per-class IoU table (one row per universal class, '-' where undefined).
std::string report_table(std::span<const DomainReport> reports, const UniversalLabelSpace& space);

}  // namespace unilabel

#endif  // UNILABEL_METRICS_HPP
