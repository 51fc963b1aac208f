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

#include "unilabel/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "unilabel/error.hpp"

namespace unilabel {

ConfusionMatrix::ConfusionMatrix(int k) : k_(k) {
  if (k < 1 || k > kIgnoreId) throw Error(ErrorKind::kRange, "confusion matrix size must be 1..255");
  counts_.assign(static_cast<std::size_t>(k) * k, 0);
}

std::uint64_t ConfusionMatrix::true_positives(int c) const { return (*this)(c, c); }

std::uint64_t ConfusionMatrix::false_positives(int c) const {
  std::uint64_t sum = 0;
  for (int g = 0; g < k_; ++g) {
    if (g != c) sum += (*this)(g, c);
  }
  return sum;
}

std::uint64_t ConfusionMatrix::false_negatives(int c) const {
  std::uint64_t sum = 0;
  for (int p = 0; p < k_; ++p) {
    if (p != c) sum += (*this)(c, p);
  }
  return sum;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (auto v : counts_) sum += v;
  return sum;
}

void ConfusionMatrix::accumulate(std::span<const std::uint8_t> gt, std::span<const std::uint8_t> pred) {
  if (gt.size() != pred.size()) throw Error(ErrorKind::kArgument, "ground truth and prediction differ in size");
  const int k = k_;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int g = gt[i];
    if (g == kIgnoreId) continue;
    const int p = pred[i];
    if (g >= k || p >= k) {
      throw Error(ErrorKind::kRange, "pixel " + std::to_string(i) + ": id " + std::to_string(g >= k ? g : p) +
                                         (g >= k ? " in ground truth" : " in prediction") +
                                         " is outside 0.." + std::to_string(k - 1));
    }
    ++counts_[static_cast<std::size_t>(g) * k + p];
  }
}

void ConfusionMatrix::accumulate(const AnnotationRaster& gt, const AnnotationRaster& pred) {
  if (gt.width != pred.width || gt.height != pred.height) {
    throw Error(ErrorKind::kArgument, "dimension mismatch: ground truth " + std::to_string(gt.width) + "x" +
                                          std::to_string(gt.height) + ", prediction " +
                                          std::to_string(pred.width) + "x" + std::to_string(pred.height));
  }
  if (!gt.space.universal || !pred.space.universal) {
    throw Error(ErrorKind::kArgument, "evaluation needs universal-space rasters");
  }
  // Work on a scratch copy so a failing pair leaves the matrix untouched.
  ConfusionMatrix scratch(k_);
  scratch.accumulate(std::span<const std::uint8_t>(gt.ids), std::span<const std::uint8_t>(pred.ids));
  *this += scratch;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.k_ != k_) {
    throw Error(ErrorKind::kArgument, "cannot merge confusion matrices of size " + std::to_string(k_) +
                                          " and " + std::to_string(other.k_));
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix accumulate(ConfusionMatrix m, const AnnotationRaster& gt, const AnnotationRaster& pred) {
  m.accumulate(gt, pred);
  return m;
}

ConfusionMatrix merge_confusions(const ConfusionMatrix& a, const ConfusionMatrix& b) {
  ConfusionMatrix out = a;
  out += b;
  return out;
}

std::vector<std::optional<double>> iou_per_class(const ConfusionMatrix& m) {
  const int k = m.k();
  std::vector<std::uint64_t> row(k, 0), col(k, 0);
  for (int g = 0; g < k; ++g) {
    for (int p = 0; p < k; ++p) {
      row[g] += m(g, p);
      col[p] += m(g, p);
    }
  }
  std::vector<std::optional<double>> out(k);
  for (int c = 0; c < k; ++c) {
    const std::uint64_t tp = m(c, c);
    // row - tp = FN, col - tp = FP
    const std::uint64_t denom = row[c] + col[c] - tp;
    if (denom != 0) out[c] = static_cast<double>(tp) / static_cast<double>(denom);
  }
  return out;
}

IoUReport iou_report(const ConfusionMatrix& m, std::span<const int> subset) {
  IoUReport report;
  report.per_class = iou_per_class(m);
  std::vector<int> classes;
  if (subset.empty()) {
    for (int c = 0; c < m.k(); ++c) classes.push_back(c);
  } else {
    classes.assign(subset.begin(), subset.end());
  }
  double sum = 0.0;
  for (int c : classes) {
    if (c < 0 || c >= m.k()) throw Error(ErrorKind::kRange, "class " + std::to_string(c) + " outside the matrix");
    if (report.per_class[c]) {
      sum += *report.per_class[c];
      report.evaluated_classes.push_back(c);
    }
  }
  if (report.evaluated_classes.empty()) {
    throw Error(ErrorKind::kRange, "no class in the subset has a defined IoU");
  }
  report.mean_iou = sum / static_cast<double>(report.evaluated_classes.size());
  return report;
}

double mean_iou(const ConfusionMatrix& m, std::span<const int> subset) {
  return iou_report(m, subset).mean_iou;
}

namespace {

std::array<bool, 256> reachable_mask(std::span<const int> reachable) {
  std::array<bool, 256> mask{};
  for (int c : reachable) {
    if (c >= 0 && c < 256) mask[c] = true;
  }
  mask[kIgnoreId] = false;
  return mask;
}

}  // namespace

void ExclusivityTally::add(const AnnotationRaster& pred, std::span<const int> reachable) {
  const auto mask = reachable_mask(reachable);
  for (std::uint8_t v : pred.ids) {
    if (v == kIgnoreId) continue;
    ++total;
    in_domain += mask[v] ? 1 : 0;
  }
}

std::optional<double> ExclusivityTally::fraction() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(in_domain) / static_cast<double>(total);
}

double domain_exclusivity(const AnnotationRaster& pred, std::span<const int> reachable) {
  ExclusivityTally tally;
  tally.add(pred, reachable);
  if (!tally.fraction()) throw Error(ErrorKind::kRange, "prediction has no non-ignore pixels");
  return *tally.fraction();
}

std::vector<DomainReport> per_domain_report(std::span<const DomainEvaluation> evaluations,
                                            const UniversalLabelSpace& space) {
  std::vector<DomainReport> out;
  for (const DomainEvaluation& e : evaluations) {
    if (e.confusion.k() != static_cast<int>(space.size())) {
      throw Error(ErrorKind::kArgument, "confusion matrix for '" + e.dataset_id + "' does not match the label-space");
    }
    if (e.confusion.total() == 0) {
      throw Error(ErrorKind::kRange, "dataset '" + e.dataset_id + "' has no evaluated pixels");
    }
    DomainReport r;
    r.dataset_id = e.dataset_id;
    r.reachable = reachable_classes(space, e.dataset_id);
    if (r.reachable.empty()) throw Error(ErrorKind::kReference, "dataset '" + e.dataset_id + "' has no universal classes");
    const IoUReport iou = iou_report(e.confusion, r.reachable);
    r.mean_iou = iou.mean_iou;
    r.per_class.assign(space.size(), std::nullopt);
    for (int c : r.reachable) r.per_class[c] = iou.per_class[c];
    r.exclusivity = e.exclusivity.fraction();
    out.push_back(std::move(r));
  }
  return out;
}

double round_half_up(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 0.5) / scale;
}

namespace {

std::string percent(std::optional<double> fraction) {
  if (!fraction) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", round_half_up(*fraction * 100.0, 2));
  return buf;
}

}  // namespace

std::string report_json(std::span<const DomainReport> reports, const UniversalLabelSpace& space,
                        const std::vector<std::pair<std::string, std::string>>& metadata) {
  using ordered_json = nlohmann::ordered_json;
  auto pct = [](std::optional<double> f) -> ordered_json {
    if (!f) return nullptr;
    return round_half_up(*f * 100.0, 2);
  };
  ordered_json doc = ordered_json::object();
  for (const DomainReport& r : reports) {
    ordered_json per_class = ordered_json::object();
    for (int c : r.reachable) per_class[space.classes[c].name] = pct(r.per_class[c]);
    doc[r.dataset_id] = {{"miou", pct(r.mean_iou)}, {"per_class", std::move(per_class)},
                         {"exclusivity", pct(r.exclusivity)}};
  }
  ordered_json meta = ordered_json::object();
  meta["units"] = "percent, rounded half-up to 2 decimals";
  meta["miou_averaging"] = "universal classes reachable from the dataset with a defined IoU";
  for (const auto& [k, v] : metadata) meta[k] = v;
  doc["$metadata"] = std::move(meta);
  return doc.dump(2) + "\n";
}

std::string report_table(std::span<const DomainReport> reports, const UniversalLabelSpace& space) {
  std::size_t name_width = 12;
  for (const auto& c : space.classes) name_width = std::max(name_width, c.name.size());
  std::vector<std::size_t> col_width;
  for (const auto& r : reports) col_width.push_back(std::max<std::size_t>(8, r.dataset_id.size()));

  std::ostringstream out;
  auto pad_right = [&](const std::string& s, std::size_t w) { out << s << std::string(w > s.size() ? w - s.size() : 0, ' '); };
  auto pad_left = [&](const std::string& s, std::size_t w) { out << std::string(w > s.size() ? w - s.size() : 0, ' ') << s; };
  auto header = [&](const std::string& first) {
    pad_right(first, name_width);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      out << "  ";
      pad_left(reports[i].dataset_id, col_width[i]);
    }
    out << '\n';
    out << std::string(name_width, '-');
    for (std::size_t w : col_width) out << "  " << std::string(w, '-');
    out << '\n';
  };

  out << "mIoU [%]\n";
  header("");
  pad_right("mIoU", name_width);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << "  ";
    pad_left(percent(reports[i].mean_iou), col_width[i]);
  }
  out << '\n';
  pad_right("exclusivity", name_width);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out << "  ";
    pad_left(percent(reports[i].exclusivity), col_width[i]);
  }
  out << "\n\nIoU [%]\n";
  header("class");
  for (const auto& c : space.classes) {
    pad_right(c.name, name_width);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      out << "  ";
      pad_left(percent(reports[i].per_class[c.id]), col_width[i]);
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace unilabel
