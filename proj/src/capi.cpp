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

#include "unilabel/unilabel.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <limits>
#include <new>
#include <string>
#include <vector>

#include "unilabel/catalog.hpp"
#include "unilabel/error.hpp"
#include "unilabel/metrics.hpp"
#include "unilabel/pipeline.hpp"
#include "unilabel/raster.hpp"
#include "unilabel/splitter.hpp"
#include "unilabel/taxonomy.hpp"

struct ul_taxonomy {
  unilabel::DatasetTaxonomy value;
};
struct ul_label_space {
  unilabel::MergeResult value;
};
struct ul_lut {
  unilabel::Lut value;
};
struct ul_confusion {
  unilabel::ConfusionMatrix value;
};

namespace {

thread_local std::string last_error;

ul_status status_of(unilabel::ErrorKind kind) {
  using unilabel::ErrorKind;
  switch (kind) {
    case ErrorKind::kParse: return UL_ERR_PARSE;
    case ErrorKind::kReference: return UL_ERR_REFERENCE;
    case ErrorKind::kConflict: return UL_ERR_CONFLICT;
    case ErrorKind::kCollision: return UL_ERR_COLLISION;
    case ErrorKind::kRange: return UL_ERR_RANGE;
    case ErrorKind::kFormat: return UL_ERR_FORMAT;
    case ErrorKind::kIo: return UL_ERR_IO;
    case ErrorKind::kArgument: return UL_ERR_ARGUMENT;
  }
  return UL_ERR_INTERNAL;
}

ul_status fail(ul_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class F>
ul_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return UL_OK;
  } catch (const unilabel::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(UL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(UL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(UL_ERR_INTERNAL, "unknown error");
  }
}

#define UL_REQUIRE(cond, what)                                   \
  do {                                                           \
    if (!(cond)) return fail(UL_ERR_ARGUMENT, what);             \
  } while (0)

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* ul_version(void) { return "1.0.0"; }

const char* ul_last_error(void) { return last_error.c_str(); }

void ul_string_free(char* s) { delete[] s; }

ul_status ul_taxonomy_parse(const char* text, ul_taxonomy** out) {
  UL_REQUIRE(text && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new ul_taxonomy{unilabel::parse_taxonomy(text)}; });
}

void ul_taxonomy_free(ul_taxonomy* t) { delete t; }

const char* ul_taxonomy_dataset_id(const ul_taxonomy* t) { return t ? t->value.dataset_id.c_str() : nullptr; }

size_t ul_taxonomy_class_count(const ul_taxonomy* t) { return t ? t->value.evaluation_class_count() : 0; }

size_t ul_taxonomy_declared_count(const ul_taxonomy* t) { return t ? t->value.classes.size() : 0; }

ul_status ul_label_space_merge(const ul_taxonomy* const* taxonomies, size_t count, const char* directives,
                               ul_label_space** out) {
  UL_REQUIRE(out && (taxonomies || count == 0), "null argument");
  *out = nullptr;
  return guarded([&] {
    std::vector<unilabel::DatasetTaxonomy> list;
    for (size_t i = 0; i < count; ++i) {
      if (!taxonomies[i]) throw unilabel::Error(unilabel::ErrorKind::kArgument, "null taxonomy");
      list.push_back(taxonomies[i]->value);
    }
    std::vector<unilabel::Directive> parsed;
    if (directives) parsed = unilabel::parse_directives(directives, list);
    *out = new ul_label_space{unilabel::merge_label_spaces(list, parsed)};
  });
}

ul_status ul_label_space_from_json(const char* json, ul_label_space** out) {
  UL_REQUIRE(json && out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new ul_label_space{unilabel::merge_result_from_json(json)}; });
}

ul_status ul_label_space_to_json(const ul_label_space* s, char** out_json) {
  UL_REQUIRE(s && out_json, "null argument");
  *out_json = nullptr;
  return guarded([&] { *out_json = copy_string(unilabel::to_json(s->value)); });
}

void ul_label_space_free(ul_label_space* s) { delete s; }

size_t ul_label_space_size(const ul_label_space* s) { return s ? s->value.space.size() : 0; }

const char* ul_label_space_name(const ul_label_space* s, int id) {
  if (!s || id < 0 || static_cast<size_t>(id) >= s->value.space.size()) return nullptr;
  return s->value.space.classes[id].name.c_str();
}

ul_status ul_label_space_lookup(const ul_label_space* s, const char* dataset_id, int local_id, int* out_universal) {
  UL_REQUIRE(s && dataset_id && out_universal, "null argument");
  return guarded([&] { *out_universal = s->value.class_map.map(dataset_id, local_id); });
}

ul_status ul_lut_build(const ul_label_space* s, const char* dataset_id, int strict, ul_lut** out) {
  UL_REQUIRE(s && dataset_id && out, "null argument");
  *out = nullptr;
  return guarded(
      [&] { *out = new ul_lut{unilabel::Lut::build(s->value.class_map, dataset_id, strict != 0)}; });
}

void ul_lut_free(ul_lut* lut) { delete lut; }

ul_status ul_remap(const ul_lut* lut, const uint8_t* in, uint8_t* out, size_t count) {
  UL_REQUIRE(lut && (count == 0 || (in && out)), "null argument");
  return guarded([&] { unilabel::remap_ids({in, count}, {out, count}, lut->value); });
}

ul_status ul_decode_color_coded(const uint8_t* rgb, size_t pixel_count, int strict, uint8_t* out_ids) {
  UL_REQUIRE(pixel_count == 0 || (rgb && out_ids), "null argument");
  for (size_t i = 0; i < pixel_count; ++i) {
    const uint8_t r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    if (strict && !(unilabel::color_channel_in_range(r) && unilabel::color_channel_in_range(g) &&
                    unilabel::color_channel_in_range(b))) {
      return fail(UL_ERR_RANGE, "pixel " + std::to_string(i) + ": colour (" + std::to_string(r) + "," +
                                    std::to_string(g) + "," + std::to_string(b) + ") is not a class code");
    }
    out_ids[i] = unilabel::color_code_id(r, g, b);
  }
  last_error.clear();
  return UL_OK;
}

ul_status ul_confusion_create(int class_count, ul_confusion** out) {
  UL_REQUIRE(out, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new ul_confusion{unilabel::ConfusionMatrix(class_count)}; });
}

void ul_confusion_free(ul_confusion* m) { delete m; }

ul_status ul_confusion_accumulate(ul_confusion* m, const uint8_t* gt, const uint8_t* pred, size_t count) {
  UL_REQUIRE(m && (count == 0 || (gt && pred)), "null argument");
  return guarded([&] {
    unilabel::ConfusionMatrix scratch(m->value.k());
    scratch.accumulate(std::span<const uint8_t>(gt, count), std::span<const uint8_t>(pred, count));
    m->value += scratch;
  });
}

ul_status ul_confusion_merge(ul_confusion* into, const ul_confusion* other) {
  UL_REQUIRE(into && other, "null argument");
  return guarded([&] { into->value += other->value; });
}

uint64_t ul_confusion_count(const ul_confusion* m, int gt, int pred) {
  if (!m || gt < 0 || pred < 0 || gt >= m->value.k() || pred >= m->value.k()) return 0;
  return m->value(gt, pred);
}

ul_status ul_confusion_iou(const ul_confusion* m, double* out_iou) {
  UL_REQUIRE(m && out_iou, "null argument");
  return guarded([&] {
    const auto iou = unilabel::iou_per_class(m->value);
    for (size_t c = 0; c < iou.size(); ++c) out_iou[c] = iou[c].value_or(std::numeric_limits<double>::quiet_NaN());
  });
}

ul_status ul_confusion_mean_iou(const ul_confusion* m, const int* subset, size_t subset_count, double* out_miou) {
  UL_REQUIRE(m && out_miou && (subset || subset_count == 0), "null argument");
  return guarded([&] {
    *out_miou = unilabel::mean_iou(m->value, subset ? std::span<const int>(subset, subset_count)
                                                     : std::span<const int>());
  });
}

ul_status ul_split_divergence(const uint64_t* val_histogram, const uint64_t* train_histogram,
                              double* out_divergence) {
  UL_REQUIRE(val_histogram && train_histogram && out_divergence, "null argument");
  return guarded([&] {
    unilabel::ClassHistogram v, t;
    std::memcpy(v.counts.data(), val_histogram, sizeof(uint64_t) * 256);
    std::memcpy(t.counts.data(), train_histogram, sizeof(uint64_t) * 256);
    *out_divergence = unilabel::split_divergence(v, t);
  });
}

ul_status ul_propose_split(const char* const* keys, const uint64_t* histograms, size_t count, double fraction,
                           uint64_t seed, unsigned sweeps, unsigned workers, uint8_t* out_in_val,
                           double* out_divergence) {
  UL_REQUIRE(keys && histograms && out_in_val, "null argument");
  return guarded([&] {
    std::vector<unilabel::SplitItem> items(count);
    for (size_t i = 0; i < count; ++i) {
      if (!keys[i]) throw unilabel::Error(unilabel::ErrorKind::kArgument, "null key");
      items[i].key = keys[i];
      std::memcpy(items[i].histogram.counts.data(), histograms + 256 * i, sizeof(uint64_t) * 256);
    }
    const unilabel::SplitPlan plan =
        unilabel::propose_split(items, unilabel::SplitOptions{fraction, seed, sweeps, workers == 0 ? 1 : workers});
    std::vector<std::string_view> val(plan.val_keys.begin(), plan.val_keys.end());
    for (size_t i = 0; i < count; ++i) {
      out_in_val[i] = std::binary_search(val.begin(), val.end(), std::string_view(items[i].key)) ? 1 : 0;
    }
    if (out_divergence) *out_divergence = plan.divergence;
  });
}

int ul_cli_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    return unilabel::run_cli(args, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "level=error cmd=unilabel msg=\"" << e.what() << "\"\n";
    return unilabel::kExitDataError;
  }
}

}  // extern "C"
