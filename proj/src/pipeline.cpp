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

#include "unilabel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "unilabel/catalog.hpp"
#include "unilabel/error.hpp"
#include "unilabel/image_io.hpp"
#include "unilabel/metrics.hpp"
#include "unilabel/parallel.hpp"
#include "unilabel/raster.hpp"
#include "unilabel/splitter.hpp"
#include "unilabel/taxonomy.hpp"

namespace unilabel {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

Expansion label_space_expansion(std::size_t merged, std::size_t largest) {
  if (largest == 0) throw Error(ErrorKind::kArgument, "largest label-space is empty");
  Expansion e;
  e.percent = (static_cast<double>(merged) - static_cast<double>(largest)) / static_cast<double>(largest) * 100.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.2f%% (%.0f%%)", round_half_up(e.percent, 2), round_half_up(e.percent, 0));
  e.text = buf;
  return e;
}

namespace {

// key=value log lines on stderr.
class Log {
 public:
  Log(std::ostream& err, std::string command) : err_(err), command_(std::move(command)) {}

  void info(std::string_view msg, const std::vector<std::pair<std::string, std::string>>& fields = {}) const {
    write("info", msg, fields);
  }
  void error(std::string_view msg, const std::vector<std::pair<std::string, std::string>>& fields = {}) const {
    write("error", msg, fields);
  }

 private:
  void write(std::string_view level, std::string_view msg,
             const std::vector<std::pair<std::string, std::string>>& fields) const {
    err_ << "level=" << level << " cmd=" << command_ << " msg=" << quote(msg);
    for (const auto& [k, v] : fields) err_ << ' ' << k << '=' << quote(v);
    err_ << '\n';
  }

  static std::string quote(std::string_view s) {
    const bool plain = !s.empty() && s.find_first_of(" \t\"=") == std::string_view::npos;
    if (plain) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c == '\n' ? ' ' : c);
    }
    out.push_back('"');
    return out;
  }

  std::ostream& err_;
  std::string command_;
};

std::string file_digest(const fs::path& path) { return sha256_hex(read_file(path)); }

MergeResult load_space(const std::string& path) {
  try {
    return merge_result_from_json(read_text_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path + ": " + e.what());
  }
}

Manifest load_manifest(const std::string& path) {
  try {
    return parse_manifest(read_text_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    throw Error(e.kind(), path + ": " + e.what());
  }
}

void sort_by_dataset(Manifest& m) {
  std::sort(m.records.begin(), m.records.end(), [](const Record& a, const Record& b) {
    return std::tie(a.dataset_id, a.image_path) < std::tie(b.dataset_id, b.image_path);
  });
  std::sort(m.rejected.begin(), m.rejected.end(), [](const Rejection& a, const Rejection& b) {
    return std::tie(a.record.dataset_id, a.record.image_path, a.record.annotation_path, a.reason) <
           std::tie(b.record.dataset_id, b.record.image_path, b.record.annotation_path, b.reason);
  });
}

// Annotations referenced by a manifest are either dataset-native (decoded by
// encoding and remapped) or already universal (e.g. the output of remap).
AnnotationRaster load_annotation(const Record& r, const MergeResult& merged, bool universal, bool strict) {
  if (!universal) return load_universal_annotation(r.annotation_path, merged.class_map, r.dataset_id, strict);
  AnnotationRaster raster = decode_indexed(read_image(r.annotation_path), r.dataset_id);
  raster.space = SpaceTag::universal_space();
  const auto k = static_cast<std::uint8_t>(merged.space.size());
  for (std::uint8_t v : raster.ids) {
    if (v >= k && v != kIgnoreId) {
      throw Error(ErrorKind::kRange, r.annotation_path + ": id " + std::to_string(v) + " outside the universal label-space");
    }
  }
  return raster;
}

std::vector<ClassHistogram> histograms_for(std::span<const Record> records, const MergeResult& merged,
                                           bool universal, bool strict, unsigned workers) {
  std::vector<ClassHistogram> out(records.size());
  parallel_for(records.size(), workers, [&](std::size_t i) {
    out[i] = histogram_of(load_annotation(records[i], merged, universal, strict));
  });
  return out;
}

ordered_json histogram_object(const ClassHistogram& h) { return ordered_json::parse(histogram_json(h)); }

struct CommonOptions {
  unsigned workers = 1;
  std::string mode = "strict";
  bool strict() const { return mode == "strict"; }
};

// ---------------------------------------------------------------------------

struct MergeOptions {
  std::vector<std::string> taxonomies;
  std::string directives;
  std::string out = ".";
};

int run_merge(const MergeOptions& o, std::ostream& out, const Log& log) {
  std::vector<DatasetTaxonomy> taxonomies;
  std::vector<std::string> digests;
  for (const std::string& path : o.taxonomies) {
    const std::string text = read_text_file(path);
    try {
      taxonomies.push_back(parse_taxonomy(text));
    } catch (const Error& e) {
      throw Error(e.kind(), path + ": " + e.what());
    }
    digests.push_back(sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size())));
  }
  std::vector<Directive> directives;
  std::string directive_digest;
  if (!o.directives.empty()) {
    const std::string text = read_text_file(o.directives);
    try {
      directives = parse_directives(text, taxonomies);
    } catch (const Error& e) {
      throw Error(e.kind(), o.directives + ": " + e.what());
    }
    directive_digest = sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }

  MergeResult merged;
  try {
    merged = merge_label_spaces(taxonomies, directives);
  } catch (const Error& e) {
    throw Error(e.kind(), (o.directives.empty() ? std::string("merge") : o.directives) + ": " + e.what());
  }

  std::size_t eval_total = 0, merge_reduction = 0, dropped = 0;
  std::size_t largest = 0;
  std::string largest_id;
  std::ostringstream report;
  report << "input label-spaces:\n";
  for (std::size_t i = 0; i < taxonomies.size(); ++i) {
    const auto& t = taxonomies[i];
    const std::size_t n = t.evaluation_class_count();
    eval_total += n;
    if (n > largest) {
      largest = n;
      largest_id = t.dataset_id;
    }
    report << "  " << t.dataset_id << ": " << n << " evaluation classes, " << (t.classes.size() - n)
           << " ignored, encoding " << to_string(t.encoding) << ", sha256 " << digests[i] << "\n";
  }
  std::map<DirectiveKind, std::size_t> kinds;
  for (const auto& d : directives) {
    ++kinds[d.kind];
    if (d.kind == DirectiveKind::kMerge) merge_reduction += d.operands.size() - 1;
    if (d.kind == DirectiveKind::kMapIgnore) ++dropped;
  }
  report << "directives: " << kinds[DirectiveKind::kMerge] << " merge, " << kinds[DirectiveKind::kRename]
         << " rename, " << kinds[DirectiveKind::kMapIgnore] << " map_ignore";
  if (!directive_digest.empty()) report << ", sha256 " << directive_digest;
  report << "\n";
  const std::size_t expected = eval_total - merge_reduction - dropped;
  if (expected != merged.space.size()) {
    throw Error(ErrorKind::kConflict, "universal label-space has " + std::to_string(merged.space.size()) +
                                          " classes, expected " + std::to_string(expected));
  }
  report << "universal label-space: " << merged.space.size() << " classes (" << eval_total << " - "
         << merge_reduction << " merged" << (dropped ? " - " + std::to_string(dropped) + " map_ignore" : "")
         << "), ignore id " << static_cast<int>(kIgnoreId) << "\n";
  const Expansion e = label_space_expansion(merged.space.size(), largest);
  report << "largest input label-space: " << largest_id << " (" << largest << " classes)\n";
  report << "expansion over largest input: " << e.text << "\n";

  const fs::path dir(o.out);
  write_text_file(dir / "universal.json", to_json(merged));
  write_text_file(dir / "merge_report.txt", report.str());
  out << report.str();
  log.info("wrote universal label-space", {{"classes", std::to_string(merged.space.size())},
                                           {"path", (dir / "universal.json").generic_string()}});
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct IngestOptions {
  std::string dataset;
  std::string root;
  std::string image_pattern;
  std::string annotation_pattern;
  std::string manifest;
  std::string space;
};

int run_ingest(const IngestOptions& o, std::ostream& out, const Log& log) {
  if (!o.space.empty()) load_space(o.space).class_map.at(o.dataset);

  const Manifest scanned = scan_dataset(o.root, o.dataset, PairingRule{o.image_pattern, o.annotation_pattern});
  const Manifest validated = validate_pairs(scanned);

  Manifest combined;
  if (fs::exists(o.manifest)) {
    Manifest existing = load_manifest(o.manifest);
    for (auto& r : existing.records) {
      if (r.dataset_id != o.dataset) combined.records.push_back(std::move(r));
    }
    for (auto& r : existing.rejected) {
      if (r.record.dataset_id != o.dataset) combined.rejected.push_back(std::move(r));
    }
  }
  combined.records.insert(combined.records.end(), validated.records.begin(), validated.records.end());
  combined.rejected.insert(combined.rejected.end(), validated.rejected.begin(), validated.rejected.end());
  sort_by_dataset(combined);
  write_text_file(o.manifest, format_manifest(combined));

  std::map<std::string, std::size_t> reasons;
  for (const auto& r : validated.rejected) ++reasons[r.reason];
  out << o.dataset << ": scanned " << validated.scanned() << ", kept " << validated.records.size()
      << ", rejected " << validated.rejected.size();
  for (const auto& [reason, n] : reasons) out << " (" << reason << ": " << n << ")";
  out << "\n";
  log.info("ingested dataset", {{"dataset", o.dataset},
                                {"kept", std::to_string(validated.records.size())},
                                {"rejected", std::to_string(validated.rejected.size())},
                                {"manifest", o.manifest}});
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SplitCommandOptions {
  std::string manifest;
  std::string space;
  std::string out;
  std::vector<std::string> datasets;
  double fraction = 0.2;
  std::uint64_t seed = 0;
  unsigned sweeps = 20;
  std::string annotations = "source";
};

int run_split(const SplitCommandOptions& o, const CommonOptions& common, std::ostream& out, const Log& log) {
  const MergeResult merged = load_space(o.space);
  Manifest manifest = load_manifest(o.manifest);
  const std::string target = o.out.empty() ? o.manifest : o.out;

  std::vector<std::string> datasets = o.datasets;
  if (datasets.empty()) {
    for (const auto& d : merged.class_map.datasets) {
      if (std::any_of(manifest.records.begin(), manifest.records.end(),
                      [&](const Record& r) { return r.dataset_id == d.dataset_id; })) {
        datasets.push_back(d.dataset_id);
      }
    }
  }

  ordered_json sidecar = ordered_json::object();
  sidecar["seed"] = o.seed;
  sidecar["fraction"] = o.fraction;
  sidecar["sweeps"] = o.sweeps;
  sidecar["datasets"] = ordered_json::object();
  for (const std::string& ds : datasets) {
    merged.class_map.at(ds);
    std::vector<std::size_t> index;
    std::vector<Record> records;
    for (std::size_t i = 0; i < manifest.records.size(); ++i) {
      if (manifest.records[i].dataset_id == ds) {
        index.push_back(i);
        records.push_back(manifest.records[i]);
      }
    }
    if (records.size() < 2) throw Error(ErrorKind::kArgument, "dataset '" + ds + "' has fewer than 2 records to split");
    const auto hist = histograms_for(records, merged, o.annotations == "universal", common.strict(), common.workers);
    std::vector<SplitItem> items;
    for (std::size_t i = 0; i < records.size(); ++i) items.push_back({records[i].key(), hist[i]});
    const SplitPlan plan = propose_split(items, SplitOptions{o.fraction, o.seed, o.sweeps, common.workers});
    const std::set<std::string> val(plan.val_keys.begin(), plan.val_keys.end());
    for (std::size_t i : index) {
      Record& r = manifest.records[i];
      r.split = val.contains(r.key()) ? Split::kVal : Split::kTrain;
    }
    sidecar["datasets"][ds] = {{"val", plan.val_keys.size()},
                               {"train", plan.train_keys.size()},
                               {"divergence", plan.divergence}};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", plan.divergence);
    out << ds << ": val " << plan.val_keys.size() << ", train " << plan.train_keys.size() << ", divergence "
        << buf << "\n";
    log.info("split dataset", {{"dataset", ds}, {"val", std::to_string(plan.val_keys.size())}, {"divergence", buf}});
  }
  write_text_file(target, format_manifest(manifest));
  write_text_file(target + ".split.json", sidecar.dump(2) + "\n");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RemapOptions {
  std::string manifest;
  std::string space;
  std::string out;
};

std::string common_dir_prefix(const std::vector<std::string>& paths) {
  if (paths.empty()) return {};
  std::string prefix = fs::path(paths.front()).parent_path().generic_string();
  for (const auto& p : paths) {
    const std::string dir = fs::path(p).parent_path().generic_string();
    while (!prefix.empty() && !(dir == prefix || dir.starts_with(prefix + "/"))) {
      prefix = fs::path(prefix).parent_path().generic_string();
    }
  }
  return prefix;
}

int run_remap(const RemapOptions& o, const CommonOptions& common, std::ostream& out, const Log& log) {
  const MergeResult merged = load_space(o.space);
  Manifest manifest = load_manifest(o.manifest);
  const fs::path out_dir(o.out);

  std::map<std::string, std::vector<std::string>> by_dataset;
  for (const auto& r : manifest.records) by_dataset[r.dataset_id].push_back(r.annotation_path);
  std::map<std::string, std::string> prefix;
  for (const auto& [ds, paths] : by_dataset) {
    merged.class_map.at(ds);
    prefix[ds] = common_dir_prefix(paths);
  }

  std::vector<std::string> targets(manifest.records.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const Record& r = manifest.records[i];
    std::string rel = r.annotation_path;
    const std::string& p = prefix[r.dataset_id];
    if (!p.empty()) rel = rel.substr(p.size() + 1);
    fs::path target = out_dir / r.dataset_id / rel;
    target.replace_extension();
    target += ".universal.png";
    targets[i] = target.generic_string();
    if (!seen.insert(targets[i]).second) {
      throw Error(ErrorKind::kConflict, "two annotations map to output '" + targets[i] + "'");
    }
  }

  const int k = static_cast<int>(merged.space.size());
  parallel_for(manifest.records.size(), common.workers, [&](std::size_t i) {
    const Record& r = manifest.records[i];
    const AnnotationRaster universal =
        load_universal_annotation(r.annotation_path, merged.class_map, r.dataset_id, common.strict());
    write_file(targets[i], encode_png(encode_universal(universal, k)));
  });

  for (std::size_t i = 0; i < manifest.records.size(); ++i) manifest.records[i].annotation_path = targets[i];
  write_text_file(out_dir / "manifest.tsv", format_manifest(manifest));
  out << "remapped " << manifest.records.size() << " annotations into " << out_dir.generic_string() << "\n";
  log.info("remapped annotations", {{"count", std::to_string(manifest.records.size())},
                                    {"manifest", (out_dir / "manifest.tsv").generic_string()}});
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string gt;
  std::string pred;
  std::string space;
  std::string out;
};

struct EvalPair {
  std::string rel;
  std::size_t dataset = 0;  // index into class_map.datasets
};

int run_eval(const EvalOptions& o, const CommonOptions& common, std::ostream& out, const Log& log) {
  const MergeResult merged = load_space(o.space);
  const int k = static_cast<int>(merged.space.size());
  const fs::path gt_root(o.gt), pred_root(o.pred);
  std::error_code ec;
  if (!fs::is_directory(gt_root, ec)) throw Error(ErrorKind::kIo, "ground-truth directory '" + o.gt + "' not found");
  if (!fs::is_directory(pred_root, ec)) throw Error(ErrorKind::kIo, "prediction directory '" + o.pred + "' not found");

  std::map<std::string, std::size_t> dataset_index;
  for (std::size_t i = 0; i < merged.class_map.datasets.size(); ++i) {
    dataset_index[merged.class_map.datasets[i].dataset_id] = i;
  }

  std::vector<EvalPair> pairs;
  for (auto it = fs::recursive_directory_iterator(gt_root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file() || it->path().extension() != ".png") continue;
    const std::string rel = fs::relative(it->path(), gt_root).generic_string();
    const std::string first = rel.substr(0, rel.find('/'));
    auto ds = dataset_index.find(first);
    if (rel.find('/') == std::string::npos || ds == dataset_index.end()) {
      throw Error(ErrorKind::kReference, "cannot attribute '" + rel + "' to a dataset (expected <dataset_id>/...)");
    }
    pairs.push_back({rel, ds->second});
  }
  if (ec) throw Error(ErrorKind::kIo, "cannot read '" + o.gt + "': " + ec.message());
  if (pairs.empty()) throw Error(ErrorKind::kArgument, "no ground-truth PNG files under '" + o.gt + "'");
  std::sort(pairs.begin(), pairs.end(), [](const EvalPair& a, const EvalPair& b) { return a.rel < b.rel; });

  std::vector<std::vector<int>> reachable;
  for (const auto& d : merged.class_map.datasets) reachable.push_back(reachable_classes(merged.space, d.dataset_id));

  struct Partial {
    std::vector<ConfusionMatrix> confusion;
    std::vector<ExclusivityTally> exclusivity;
    std::vector<std::size_t> pairs;
  };
  const std::size_t nd = merged.class_map.datasets.size();
  const Partial init{std::vector<ConfusionMatrix>(nd, ConfusionMatrix(k)), std::vector<ExclusivityTally>(nd),
                     std::vector<std::size_t>(nd, 0)};
  std::vector<std::string> gt_digest(pairs.size()), pred_digest(pairs.size());

  const Partial total = parallel_map_reduce(
      pairs.size(), common.workers, init,
      [&](std::size_t i, Partial& acc) {
        const EvalPair& p = pairs[i];
        const fs::path gt_path = gt_root / p.rel, pred_path = pred_root / p.rel;
        const auto gt_bytes = read_file(gt_path);
        const auto pred_bytes = read_file(pred_path);
        gt_digest[i] = sha256_hex(gt_bytes);
        pred_digest[i] = sha256_hex(pred_bytes);
        const std::string& ds = merged.class_map.datasets[p.dataset].dataset_id;
        try {
          AnnotationRaster gt = decode_indexed(decode_image(gt_bytes), ds);
          AnnotationRaster pred = decode_indexed(decode_image(pred_bytes), ds);
          gt.space = pred.space = SpaceTag::universal_space();
          acc.confusion[p.dataset].accumulate(gt, pred);
          acc.exclusivity[p.dataset].add(pred, reachable[p.dataset]);
          ++acc.pairs[p.dataset];
        } catch (const Error& e) {
          throw Error(e.kind(), p.rel + ": " + e.what());
        }
      },
      [](Partial& into, Partial&& part) {
        for (std::size_t d = 0; d < into.confusion.size(); ++d) {
          into.confusion[d] += part.confusion[d];
          into.exclusivity[d] += part.exclusivity[d];
          into.pairs[d] += part.pairs[d];
        }
      });

  std::vector<DomainEvaluation> evaluations;
  for (std::size_t d = 0; d < nd; ++d) {
    if (total.pairs[d] == 0) continue;
    evaluations.push_back({merged.class_map.datasets[d].dataset_id, total.confusion[d], total.exclusivity[d]});
  }
  const std::vector<DomainReport> reports = per_domain_report(evaluations, merged.space);

  std::string gt_lines, pred_lines;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    gt_lines += pairs[i].rel + " " + gt_digest[i] + "\n";
    pred_lines += pairs[i].rel + " " + pred_digest[i] + "\n";
  }
  auto digest_of = [](const std::string& s) {
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  const std::vector<std::pair<std::string, std::string>> metadata = {
      {"space_sha256", file_digest(o.space)},
      {"ground_truth_sha256", digest_of(gt_lines)},
      {"prediction_sha256", digest_of(pred_lines)},
      {"pairs", std::to_string(pairs.size())},
  };
  const std::string json_text = report_json(reports, merged.space, metadata);
  const std::string table = report_table(reports, merged.space);
  if (!o.out.empty()) {
    write_text_file(fs::path(o.out) / "eval.json", json_text);
    write_text_file(fs::path(o.out) / "eval.txt", table);
  }
  out << table;
  log.info("evaluated predictions", {{"pairs", std::to_string(pairs.size())}, {"datasets", std::to_string(reports.size())}});
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct StatsOptions {
  std::string manifest;
  std::string space;
  std::string out;
  std::string annotations = "source";
};

int run_stats(const StatsOptions& o, const CommonOptions& common, std::ostream& out, const Log& log) {
  const MergeResult merged = load_space(o.space);
  const Manifest manifest = load_manifest(o.manifest);
  if (manifest.records.empty()) throw Error(ErrorKind::kArgument, "manifest '" + o.manifest + "' has no records");

  const auto hist = histograms_for(manifest.records, merged, o.annotations == "universal", common.strict(),
                                   common.workers);

  struct Totals {
    std::size_t records = 0;
    ClassHistogram all, val, train;
    std::size_t n_val = 0, n_train = 0;
  };
  auto section = [&](const Totals& t) {
    ordered_json s = ordered_json::object();
    s["records"] = t.records;
    s["histogram"] = histogram_object(t.all);
    if (t.n_val > 0 && t.n_train > 0) {
      ordered_json split = {{"val", t.n_val}, {"train", t.n_train}};
      if (t.val.total_eval_pixels() > 0 && t.train.total_eval_pixels() > 0) {
        split["divergence"] = split_divergence(t.val, t.train);
      } else {
        split["divergence"] = nullptr;
      }
      s["split"] = std::move(split);
    }
    return s;
  };

  std::map<std::string, Totals> per_dataset;
  Totals rollup;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const Record& r = manifest.records[i];
    for (Totals* t : {&per_dataset[r.dataset_id], &rollup}) {
      ++t->records;
      t->all += hist[i];
      if (r.split == Split::kVal) {
        t->val += hist[i];
        ++t->n_val;
      } else if (r.split == Split::kTrain) {
        t->train += hist[i];
        ++t->n_train;
      }
    }
  }

  ordered_json doc = ordered_json::object();
  doc["datasets"] = ordered_json::object();
  for (const auto& d : merged.class_map.datasets) {
    auto it = per_dataset.find(d.dataset_id);
    if (it != per_dataset.end()) doc["datasets"][d.dataset_id] = section(it->second);
  }
  for (const auto& [ds, t] : per_dataset) {
    if (merged.class_map.find(ds) == nullptr) throw Error(ErrorKind::kReference, "unknown dataset '" + ds + "'");
  }
  doc["universal"] = section(rollup);
  doc["$metadata"] = {{"manifest_sha256", file_digest(o.manifest)},
                      {"space_sha256", file_digest(o.space)},
                      {"annotations", o.annotations}};
  const std::string text = doc.dump(2) + "\n";
  if (!o.out.empty()) write_text_file(fs::path(o.out) / "stats.json", text);

  auto summary = [&](const std::string& name, const Totals& t) {
    out << name << ": " << t.records << " records, " << t.all.total_eval_pixels() << " evaluation pixels";
    if (t.n_val > 0 && t.n_train > 0 && t.val.total_eval_pixels() > 0 && t.train.total_eval_pixels() > 0) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f", split_divergence(t.val, t.train));
      out << ", val/train " << t.n_val << "/" << t.n_train << ", divergence " << buf;
    }
    out << "\n";
  };
  for (const auto& d : merged.class_map.datasets) {
    auto it = per_dataset.find(d.dataset_id);
    if (it != per_dataset.end()) summary(d.dataset_id, it->second);
  }
  summary("universal", rollup);
  log.info("computed statistics", {{"records", std::to_string(manifest.records.size())}});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// --config FILE: a JSON object whose keys are long option names of the chosen
// subcommand. Values given on the command line win.

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file name");
      config_path = args[++i];
    } else if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty()) return rest;

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, config_path + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::kParse, config_path + ": expected a JSON object");

  auto given = [&](const std::string& flag) {
    return std::any_of(rest.begin(), rest.end(),
                       [&](const std::string& a) { return a == flag || a.starts_with(flag + "="); });
  };
  auto scalar = [&](const nlohmann::json& v, const std::string& key) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw Error(ErrorKind::kParse, config_path + ": unsupported value for '" + key + "'");
  };

  std::vector<std::string> injected;
  for (const auto& [key, value] : doc.items()) {
    const std::string flag = "--" + key;
    if (given(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) injected.push_back(flag);
      continue;
    }
    std::string text;
    if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i) text += (i ? "," : "") + scalar(value[i], key);
    } else {
      text = scalar(value, key);
    }
    injected.push_back(flag);
    injected.push_back(text);
  }
  // Options go after the subcommand name so CLI11 routes them to it.
  auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& a) { return !a.starts_with("-"); });
  if (sub == rest.end()) return rest;
  std::vector<std::string> out(rest.begin(), sub + 1);
  out.insert(out.end(), injected.begin(), injected.end());
  out.insert(out.end(), sub + 1, rest.end());
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"unilabel: merge segmentation label-spaces, prepare datasets, evaluate predictions", "unilabel"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", "unilabel 1.0.0");
  app.add_option("--config", "JSON file with option values for the subcommand");

  CommonOptions common;
  auto add_common = [&](CLI::App* sub, bool with_mode) {
    sub->add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);
    if (with_mode) {
      sub->add_option("--mode", common.mode, "undeclared ids: strict (error) or lenient (ignore)")
          ->check(CLI::IsMember({"strict", "lenient"}));
    }
  };
  const auto fraction_check = CLI::Validator(
      [](std::string& s) -> std::string {
        double v = 0;
        try {
          v = std::stod(s);
        } catch (...) {
          return "not a number";
        }
        return (v > 0.0 && v < 1.0) ? std::string() : std::string("fraction must lie in (0, 1)");
      },
      "(0,1)");

  MergeOptions merge;
  CLI::App* merge_cmd = app.add_subcommand("merge", "build the universal label-space from taxonomy files");
  merge_cmd->add_option("--taxonomies", merge.taxonomies, "taxonomy files, comma-separated, in order")
      ->required()
      ->delimiter(',');
  merge_cmd->add_option("--directives", merge.directives, "directive file");
  merge_cmd->add_option("--out", merge.out, "output directory");

  IngestOptions ingest;
  CLI::App* ingest_cmd = app.add_subcommand("ingest", "scan a dataset directory into a manifest");
  ingest_cmd->add_option("--dataset", ingest.dataset)->required();
  ingest_cmd->add_option("--root", ingest.root)->required();
  ingest_cmd->add_option("--image-pattern", ingest.image_pattern, "regex over root-relative image paths")->required();
  ingest_cmd->add_option("--annotation-pattern", ingest.annotation_pattern, "regex over annotation paths")->required();
  ingest_cmd->add_option("--manifest", ingest.manifest, "manifest to create or update")->required();
  ingest_cmd->add_option("--space", ingest.space, "universal label-space to check the dataset against");

  SplitCommandOptions split;
  CLI::App* split_cmd = app.add_subcommand("split", "choose class-balanced validation subsets");
  split_cmd->add_option("--manifest", split.manifest)->required();
  split_cmd->add_option("--space", split.space)->required();
  split_cmd->add_option("--out", split.out, "output manifest (default: rewrite --manifest)");
  split_cmd->add_option("--datasets", split.datasets, "datasets to split (default: all)")->delimiter(',');
  split_cmd->add_option("--fraction", split.fraction, "validation fraction")->check(fraction_check);
  split_cmd->add_option("--seed", split.seed);
  split_cmd->add_option("--sweeps", split.sweeps, "hill-climbing passes");
  split_cmd->add_option("--annotations", split.annotations)->check(CLI::IsMember({"source", "universal"}));
  add_common(split_cmd, true);

  RemapOptions remap_opts;
  CLI::App* remap_cmd = app.add_subcommand("remap", "write universal-space annotations");
  remap_cmd->add_option("--manifest", remap_opts.manifest)->required();
  remap_cmd->add_option("--space", remap_opts.space)->required();
  remap_cmd->add_option("--out", remap_opts.out, "output directory")->required();
  add_common(remap_cmd, true);

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "per-class IoU and per-domain mIoU of predictions");
  eval_cmd->add_option("--gt", eval.gt, "ground-truth directory (<dataset>/...png)")->required();
  eval_cmd->add_option("--pred", eval.pred, "prediction directory, same layout")->required();
  eval_cmd->add_option("--space", eval.space)->required();
  eval_cmd->add_option("--out", eval.out, "directory for eval.json and eval.txt");
  add_common(eval_cmd, false);

  StatsOptions stats;
  CLI::App* stats_cmd = app.add_subcommand("stats", "class-pixel histograms and split divergence");
  stats_cmd->add_option("--manifest", stats.manifest)->required();
  stats_cmd->add_option("--space", stats.space)->required();
  stats_cmd->add_option("--out", stats.out, "directory for stats.json");
  stats_cmd->add_option("--annotations", stats.annotations)->check(CLI::IsMember({"source", "universal"}));
  add_common(stats_cmd, true);

  std::string command = "unilabel";
  try {
    std::vector<std::string> args = expand_config(raw_args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << app.version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    Log(err, command).error(e.what(), {{"kind", to_string(e.kind())}});
    return kExitDataError;
  }

  CLI::App* chosen = app.get_subcommands().front();
  command = chosen->get_name();
  const Log log(err, command);
  try {
    if (chosen == merge_cmd) return run_merge(merge, out, log);
    if (chosen == ingest_cmd) return run_ingest(ingest, out, log);
    if (chosen == split_cmd) return run_split(split, common, out, log);
    if (chosen == remap_cmd) return run_remap(remap_opts, common, out, log);
    if (chosen == eval_cmd) return run_eval(eval, common, out, log);
    if (chosen == stats_cmd) return run_stats(stats, common, out, log);
  } catch (const Error& e) {
    log.error(e.what(), {{"kind", to_string(e.kind())}});
    return kExitDataError;
  } catch (const std::exception& e) {
    log.error(e.what(), {{"kind", "internal"}});
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace unilabel
