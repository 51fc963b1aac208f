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

#include "unilabel/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "unilabel/error.hpp"
#include "unilabel/parallel.hpp"

namespace unilabel {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();
// Swaps must improve the objective by more than float noise.
constexpr double kMinImprovement = 1e-12;
// Perturbation restarts after the first local optimum, and the largest number
// of pairs a perturbation swaps.
constexpr unsigned kRestarts = 32;
constexpr std::size_t kMaxKick = 3;
// Restart count is capped so restarts times one pass's class-term
// evaluations stays below this.
constexpr double kRestartWork = 4e8;
// Candidate scans below this many class terms run on the calling thread.
constexpr std::size_t kParallelWork = std::size_t{1} << 16;

// mt19937_64 output is fixed by the standard; the distributions are not, so
// bounded draws and shuffles are done here to keep plans portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

void check_inputs(std::span<const SplitItem> items, double fraction) {
  if (items.size() < 2) throw Error(ErrorKind::kArgument, "splitting needs at least 2 records");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::kRange, "validation fraction must lie in (0, 1)");
  }
  std::set<std::string_view> keys;
  for (const auto& item : items) {
    if (!keys.insert(item.key).second) throw Error(ErrorKind::kArgument, "duplicate record key '" + item.key + "'");
  }
}

// Indices of items in ascending key order.
std::vector<std::size_t> key_order(std::span<const SplitItem> items) {
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return items[a].key < items[b].key; });
  return order;
}

SplitPlan make_plan(std::span<const SplitItem> items, const std::vector<bool>& in_val) {
  SplitPlan plan;
  ClassHistogram val, train;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (in_val[i]) {
      plan.val_keys.push_back(items[i].key);
      val += items[i].histogram;
    } else {
      plan.train_keys.push_back(items[i].key);
      train += items[i].histogram;
    }
  }
  std::sort(plan.val_keys.begin(), plan.val_keys.end());
  std::sort(plan.train_keys.begin(), plan.train_keys.end());
  plan.divergence = split_divergence(val, train);
  return plan;
}

// Dense count matrix over the classes that actually occur, rows in key order.
struct Problem {
  std::size_t n = 0;
  std::size_t classes = 0;
  std::vector<double> counts;  // n x classes
  std::vector<double> totals;  // per row
  std::vector<double> all;     // per class, summed over rows
  double all_total = 0.0;

  const double* row(std::size_t i) const { return counts.data() + i * classes; }

  // Divergence of a validation side with class counts `val` and total `val_total`.
  double objective(const double* val, double val_total) const {
    const double train_total = all_total - val_total;
    if (val_total <= 0.0 || train_total <= 0.0) return kInfinity;
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      sum += std::fabs(val[c] / val_total - (all[c] - val[c]) / train_total);
    }
    return sum;
  }

  // Objective after moving `add` in and `remove` out (either may be npos).
  double objective_with(const std::vector<double>& val, double val_total, std::size_t add,
                        std::size_t remove) const {
    const double* a = add == npos ? nullptr : row(add);
    const double* r = remove == npos ? nullptr : row(remove);
    const double t = val_total + (a ? totals[add] : 0.0) - (r ? totals[remove] : 0.0);
    const double train_total = all_total - t;
    if (t <= 0.0 || train_total <= 0.0) return kInfinity;
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double v = val[c] + (a ? a[c] : 0.0) - (r ? r[c] : 0.0);
      sum += std::fabs(v / t - (all[c] - v) / train_total);
    }
    return sum;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

Problem build_problem(std::span<const SplitItem> items, const std::vector<std::size_t>& order) {
  std::vector<int> active;
  for (int c = 0; c < kIgnoreId; ++c) {
    for (const auto& item : items) {
      if (item.histogram.counts[c] != 0) {
        active.push_back(c);
        break;
      }
    }
  }
  Problem p;
  p.n = items.size();
  p.classes = active.size();
  p.counts.resize(p.n * p.classes);
  p.totals.resize(p.n);
  p.all.assign(p.classes, 0.0);
  for (std::size_t i = 0; i < p.n; ++i) {
    const ClassHistogram& h = items[order[i]].histogram;
    for (std::size_t c = 0; c < p.classes; ++c) {
      const double v = static_cast<double>(h.counts[active[c]]);
      p.counts[i * p.classes + c] = v;
      p.totals[i] += v;
      p.all[c] += v;
    }
    p.all_total += p.totals[i];
  }
  return p;
}

struct Best {
  double score = kInfinity;
  std::size_t index = Problem::npos;
};

struct State {
  std::vector<bool> in_val;
  std::vector<double> val;
  double val_total = 0.0;
  double current = 0.0;
};

void apply_swap(const Problem& p, State& s, std::size_t add, std::size_t remove) {
  const double* a = p.row(add);
  const double* r = p.row(remove);
  for (std::size_t c = 0; c < p.classes; ++c) s.val[c] += a[c] - r[c];
  s.val_total += p.totals[add] - p.totals[remove];
  s.in_val[add] = true;
  s.in_val[remove] = false;
  s.current = p.objective(s.val.data(), s.val_total);
}

// Best-improvement swaps, visiting validation records in seeded order.
void climb(const Problem& p, State& s, unsigned sweeps, unsigned workers, Rng& rng) {
  for (unsigned sweep = 0; sweep < sweeps; ++sweep) {
    std::vector<std::size_t> val_list, train_list;
    for (std::size_t i = 0; i < p.n; ++i) (s.in_val[i] ? val_list : train_list).push_back(i);
    rng.shuffle(val_list);
    const unsigned scan_workers = train_list.size() * p.classes >= kParallelWork ? workers : 1;
    bool swapped = false;
    for (std::size_t& out_idx : val_list) {
      const double current = s.current;
      Best best = parallel_map_reduce(
          train_list.size(), scan_workers, Best{},
          [&](std::size_t k, Best& acc) {
            const double score = p.objective_with(s.val, s.val_total, train_list[k], out_idx);
            if (score < acc.score || (score == acc.score && k < acc.index)) acc = {score, k};
          },
          [](Best& into, Best&& part) {
            if (part.score < into.score || (part.score == into.score && part.index < into.index)) into = part;
          });
      if (best.index == Problem::npos || !(best.score < current - kMinImprovement)) continue;
      const std::size_t in_idx = train_list[best.index];
      apply_swap(p, s, in_idx, out_idx);
      train_list[best.index] = out_idx;
      out_idx = in_idx;
      swapped = true;
    }
    if (!swapped) break;
  }
}

// Swaps a few random val/train pairs to leave a local optimum.
void perturb(const Problem& p, State& s, Rng& rng) {
  std::vector<std::size_t> val_list, train_list;
  for (std::size_t i = 0; i < p.n; ++i) (s.in_val[i] ? val_list : train_list).push_back(i);
  const std::size_t moves = std::min<std::size_t>(1 + rng.below(kMaxKick), std::min(val_list.size(), train_list.size()));
  rng.shuffle(val_list);
  rng.shuffle(train_list);
  for (std::size_t m = 0; m < moves; ++m) apply_swap(p, s, train_list[m], val_list[m]);
}

}  // namespace

double split_divergence(const ClassHistogram& val, const ClassHistogram& train) {
  const double val_total = static_cast<double>(val.total_eval_pixels());
  const double train_total = static_cast<double>(train.total_eval_pixels());
  if (val_total == 0.0 || train_total == 0.0) {
    throw Error(ErrorKind::kRange, "divergence needs evaluation pixels on both sides");
  }
  double sum = 0.0;
  for (int c = 0; c < kIgnoreId; ++c) {
    if (val.counts[c] == 0 && train.counts[c] == 0) continue;
    sum += std::fabs(static_cast<double>(val.counts[c]) / val_total -
                     static_cast<double>(train.counts[c]) / train_total);
  }
  return sum;
}

std::size_t validation_size(std::size_t n, double fraction) {
  if (n < 2) throw Error(ErrorKind::kArgument, "splitting needs at least 2 records");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorKind::kRange, "validation fraction must lie in (0, 1)");
  }
  const long long rounded = std::llround(fraction * static_cast<double>(n));
  return static_cast<std::size_t>(std::clamp<long long>(rounded, 1, static_cast<long long>(n) - 1));
}

SplitPlan propose_split(std::span<const SplitItem> items, const SplitOptions& options) {
  check_inputs(items, options.fraction);
  const std::size_t with_pixels = static_cast<std::size_t>(std::count_if(
      items.begin(), items.end(), [](const SplitItem& i) { return i.histogram.total_eval_pixels() > 0; }));
  if (with_pixels < 2) {
    throw Error(ErrorKind::kRange, "at least 2 records need evaluation pixels to balance a split");
  }

  const std::vector<std::size_t> order = key_order(items);
  const Problem p = build_problem(items, order);
  const std::size_t target = validation_size(p.n, options.fraction);

  std::vector<bool> in_val(p.n, false);
  std::vector<double> val(p.classes, 0.0);
  double val_total = 0.0;

  // Greedy construction.
  for (std::size_t step = 0; step < target; ++step) {
    Best best = parallel_map_reduce(
        p.n, options.workers, Best{},
        [&](std::size_t j, Best& acc) {
          if (in_val[j]) return;
          const double score = p.objective_with(val, val_total, j, Problem::npos);
          if (acc.index == Problem::npos || score < acc.score) acc = {score, j};
        },
        [](Best& into, Best&& part) {
          if (part.index == Problem::npos) return;
          if (into.index == Problem::npos || part.score < into.score) into = part;
        });
    in_val[best.index] = true;
    const double* r = p.row(best.index);
    for (std::size_t c = 0; c < p.classes; ++c) val[c] += r[c];
    val_total += p.totals[best.index];
  }

  // Swap hill-climbing from the greedy plan, then from seeded perturbations
  // of the best plan found so far.
  State state{std::move(in_val), std::move(val), val_total, 0.0};
  state.current = p.objective(state.val.data(), state.val_total);
  Rng rng(options.seed);
  climb(p, state, options.sweeps, options.workers, rng);
  State best_state = state;
  const double pass_work = static_cast<double>(target) * static_cast<double>(p.n - target) *
                           static_cast<double>(std::max<std::size_t>(p.classes, 1));
  const unsigned restarts =
      options.sweeps == 0 ? 0 : static_cast<unsigned>(std::min<double>(kRestarts, std::floor(kRestartWork / pass_work)));
  for (unsigned r = 0; r < restarts; ++r) {
    state = best_state;
    perturb(p, state, rng);
    climb(p, state, options.sweeps, options.workers, rng);
    if (state.current < best_state.current - kMinImprovement) best_state = state;
  }
  in_val = std::move(best_state.in_val);

  std::vector<bool> in_val_by_item(items.size(), false);
  for (std::size_t i = 0; i < p.n; ++i) in_val_by_item[order[i]] = in_val[i];
  SplitPlan plan = make_plan(items, in_val_by_item);
  plan.seed = options.seed;
  plan.target_fraction = options.fraction;
  plan.sweeps = options.sweeps;
  return plan;
}

SplitPlan random_split(std::span<const SplitItem> items, double fraction, std::uint64_t seed) {
  check_inputs(items, fraction);
  const std::vector<std::size_t> order = key_order(items);
  const std::size_t target = validation_size(items.size(), fraction);
  std::vector<std::size_t> shuffled = order;
  Rng rng(seed);
  rng.shuffle(shuffled);
  std::vector<bool> in_val(items.size(), false);
  for (std::size_t i = 0; i < target; ++i) in_val[shuffled[i]] = true;
  SplitPlan plan = make_plan(items, in_val);
  plan.seed = seed;
  plan.target_fraction = fraction;
  plan.sweeps = 0;
  return plan;
}

double plan_divergence(std::span<const SplitItem> items, const SplitPlan& plan) {
  std::set<std::string_view> val(plan.val_keys.begin(), plan.val_keys.end());
  ClassHistogram v, t;
  for (const auto& item : items) (val.contains(item.key) ? v : t) += item.histogram;
  return split_divergence(v, t);
}

}  // namespace unilabel
