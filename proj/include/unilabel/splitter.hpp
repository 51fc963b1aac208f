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

#ifndef UNILABEL_SPLITTER_HPP
#define UNILABEL_SPLITTER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "unilabel/catalog.hpp"

namespace unilabel {

// L1 distance between the per-class pixel proportions of the two sides,
// ignore pixels excluded. In [0, 2]. Throws kRange if either side has no
// evaluation pixels.
double split_divergence(const ClassHistogram& val, const ClassHistogram& train);

struct SplitItem {
  std::string key;
  ClassHistogram histogram;
};

struct SplitPlan {
  std::vector<std::string> val_keys;    // sorted
  std::vector<std::string> train_keys;  // sorted
  double divergence = 0.0;
  std::uint64_t seed = 0;
  double target_fraction = 0.2;
  unsigned sweeps = 0;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

struct SplitOptions {
  double fraction = 0.2;
  std::uint64_t seed = 0;
  unsigned sweeps = 20;
  unsigned workers = 1;
};

// round(fraction * n), clamped to [1, n - 1].
std::size_t validation_size(std::size_t n, double fraction);

// Greedy construction (repeatedly add the record that gives the lowest
// divergence, ties to the lowest key) followed by up to `sweeps` passes of
// val/train swaps that strictly lower the divergence. The climb is then
// restarted from seeded random perturbations of the best plan, keeping a
// restart only if it improves on it. The seed orders the records visited in
// each pass and drives the perturbations. sweeps = 0 returns the greedy plan.
SplitPlan propose_split(std::span<const SplitItem> items, const SplitOptions& options);

// Uniformly random validation subset of the target size.
SplitPlan random_split(std::span<const SplitItem> items, double fraction, std::uint64_t seed);

// Recomputes the divergence of a plan from the item histograms.
double plan_divergence(std::span<const SplitItem> items, const SplitPlan& plan);

}  // namespace unilabel

#endif  // UNILABEL_SPLITTER_HPP
