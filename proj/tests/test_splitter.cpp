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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "support.hpp"
#include "unilabel/error.hpp"
#include "unilabel/splitter.hpp"

namespace ul = unilabel;
using namespace unilabel::testing;

namespace {

ul::ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const ul::Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ul::ErrorKind::kArgument;
}

ul::ClassHistogram hist(std::initializer_list<std::pair<int, std::uint64_t>> entries) {
  ul::ClassHistogram h;
  for (auto [c, n] : entries) h.counts[c] = n;
  return h;
}

std::vector<ul::SplitItem> items_from(const std::vector<std::vector<std::uint64_t>>& rows) {
  std::vector<ul::SplitItem> items(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    items[i].key = record_key(i);
    std::copy(rows[i].begin(), rows[i].end(), items[i].histogram.counts.begin());
  }
  return items;
}

std::vector<bool> membership(const std::vector<ul::SplitItem>& items, const ul::SplitPlan& plan) {
  const std::set<std::string> val(plan.val_keys.begin(), plan.val_keys.end());
  std::vector<bool> in_val(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) in_val[i] = val.contains(items[i].key);
  return in_val;
}

// Minimum divergence over all subsets of the target size.
double exhaustive_optimum(const std::vector<std::vector<std::uint64_t>>& rows, std::size_t target) {
  const std::size_t n = rows.size();
  double best = INFINITY;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != target) continue;
    std::vector<bool> in_val(n);
    std::uint64_t vt = 0, tt = 0;
    for (std::size_t i = 0; i < n; ++i) {
      in_val[i] = (mask >> i) & 1u;
      for (int c = 0; c < 255; ++c) (in_val[i] ? vt : tt) += rows[i][c];
    }
    if (vt == 0 || tt == 0) continue;
    best = std::min(best, oracle_divergence(rows, in_val));
  }
  return best;
}

}  // namespace

TEST_CASE("split_divergence: documented examples") {
  CHECK(ul::split_divergence(hist({{0, 2}, {1, 6}}), hist({{0, 1}, {1, 3}})) == doctest::Approx(0.0));
  CHECK(ul::split_divergence(hist({{0, 5}}), hist({{1, 9}})) == 2.0);
  // |3/4 - 1/2| + |1/4 - 1/2|.
  const double hand = std::abs(3.0 / 4 - 1.0 / 2) + std::abs(1.0 / 4 - 1.0 / 2);
  const double got = ul::split_divergence(hist({{0, 3}, {1, 1}}), hist({{0, 1}, {1, 1}}));
  CHECK(got == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(got == doctest::Approx(hand).epsilon(1e-15));
  CHECK(got == doctest::Approx(oracle_divergence({std::vector<std::uint64_t>{3, 1}, std::vector<std::uint64_t>{1, 1}},
                                                 {true, false}))
                   .epsilon(1e-15));
  // Ignore pixels do not count.
  CHECK(ul::split_divergence(hist({{0, 1}, {255, 100}}), hist({{0, 7}})) == 0.0);
  CHECK(kind_of([] { ul::split_divergence(hist({{255, 4}}), hist({{0, 1}})); }) == ul::ErrorKind::kRange);
}

TEST_CASE("property: divergence symmetric, bounded, zero iff proportional") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint64_t> count(0, 20);
  std::uniform_int_distribution<int> scale(1, 5);
  for (int trial = 0; trial < 2000; ++trial) {
    ul::ClassHistogram a, b;
    for (int c = 0; c < 6; ++c) {
      a.counts[c] = count(rng);
      b.counts[c] = count(rng);
    }
    a.counts[0] += 1;
    b.counts[1] += 1;
    const double d = ul::split_divergence(a, b);
    CHECK(d == ul::split_divergence(b, a));
    CHECK(d >= 0.0);
    CHECK(d <= 2.0 + 1e-15);
    ul::ClassHistogram scaled = a;
    const int s = scale(rng);
    for (auto& v : scaled.counts) v *= static_cast<std::uint64_t>(s);
    CHECK(ul::split_divergence(a, scaled) == doctest::Approx(0.0));
    bool proportional = true;
    for (int c = 0; c < 6; ++c) {
      proportional = proportional && a.counts[c] * b.total_eval_pixels() == b.counts[c] * a.total_eval_pixels();
    }
    if (!proportional) CHECK(d > 0.0);
  }
}

TEST_CASE("validation_size: rounding rule") {
  CHECK(ul::validation_size(5, 0.2) == 1);
  CHECK(ul::validation_size(10, 0.2) == 2);
  CHECK(ul::validation_size(5285, 0.2) == 1057);
  CHECK(ul::validation_size(2, 0.01) == 1);
  CHECK(ul::validation_size(2, 0.99) == 1);
  for (std::size_t n = 2; n <= 60; ++n) {
    for (double f = 0.01; f < 1.0; f += 0.01) {
      const long long expected = std::clamp<long long>(std::llround(f * static_cast<double>(n)), 1,
                                                       static_cast<long long>(n) - 1);
      CHECK(ul::validation_size(n, f) == static_cast<std::size_t>(expected));
    }
  }
  CHECK(kind_of([] { ul::validation_size(1, 0.2); }) == ul::ErrorKind::kArgument);
  CHECK(kind_of([] { ul::validation_size(10, 0.0); }) == ul::ErrorKind::kRange);
  CHECK(kind_of([] { ul::validation_size(10, 1.0); }) == ul::ErrorKind::kRange);
}

TEST_CASE("propose_split: documented examples") {
  SUBCASE("identical histograms") {
    std::vector<ul::SplitItem> items;
    for (int i = 0; i < 10; ++i) items.push_back({record_key(i), hist({{0, 10}, {1, 30}, {255, 2}})});
    const auto plan = ul::propose_split(items, {});
    CHECK(plan.val_keys.size() == 2);
    CHECK(plan.train_keys.size() == 8);
    CHECK(plan.divergence == doctest::Approx(0.0));
    // Ties go to the lowest keys.
    CHECK(plan.val_keys == std::vector<std::string>{record_key(0), record_key(1)});
  }
  SUBCASE("determinism") {
    std::mt19937_64 rng(2);
    const auto items = items_from(skewed_histograms(rng, 40, 12));
    for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
      const auto a = ul::propose_split(items, {0.2, seed, 20, 1});
      const auto b = ul::propose_split(items, {0.2, seed, 20, 1});
      CHECK(a == b);
      CHECK(a.seed == seed);
      // Worker count does not change the result.
      CHECK(ul::propose_split(items, {0.2, seed, 20, 4}) == a);
    }
  }
  SUBCASE("errors") {
    const std::vector<ul::SplitItem> one{{"a", hist({{0, 1}})}};
    CHECK(kind_of([&] { ul::propose_split(one, {}); }) == ul::ErrorKind::kArgument);
    const std::vector<ul::SplitItem> two{{"a", hist({{0, 1}})}, {"b", hist({{1, 1}})}};
    CHECK(kind_of([&] { ul::propose_split(two, {0.0, 0, 20, 1}); }) == ul::ErrorKind::kRange);
    CHECK(kind_of([&] { ul::propose_split(two, {1.5, 0, 20, 1}); }) == ul::ErrorKind::kRange);
    const std::vector<ul::SplitItem> dup{{"a", hist({{0, 1}})}, {"a", hist({{1, 1}})}};
    CHECK(kind_of([&] { ul::propose_split(dup, {}); }) == ul::ErrorKind::kArgument);
  }
}

TEST_CASE("property: plans are exact partitions, self-consistent, never worse than greedy") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> n_dist(2, 40);
  std::uniform_real_distribution<double> f_dist(0.05, 0.95);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = static_cast<std::size_t>(n_dist(rng));
    const auto rows = skewed_histograms(rng, n, 10);
    const auto items = items_from(rows);
    const double f = f_dist(rng);
    const auto greedy = ul::propose_split(items, {f, 0, 0, 1});
    const auto plan = ul::propose_split(items, {f, static_cast<std::uint64_t>(trial), 20, 1});

    std::set<std::string> all;
    for (const auto& k : plan.val_keys) all.insert(k);
    for (const auto& k : plan.train_keys) all.insert(k);
    CHECK(all.size() == n);
    CHECK(plan.val_keys.size() + plan.train_keys.size() == n);
    CHECK(plan.val_keys.size() == ul::validation_size(n, f));
    CHECK(std::is_sorted(plan.val_keys.begin(), plan.val_keys.end()));

    CHECK(plan.divergence == ul::plan_divergence(items, plan));
    CHECK(plan.divergence == doctest::Approx(oracle_divergence(rows, membership(items, plan))).epsilon(1e-12));
    CHECK(plan.divergence <= greedy.divergence);
  }
}

TEST_CASE("propose_split beats most random splits on skewed data") {
  std::mt19937_64 rng(31);
  const auto items = items_from(skewed_histograms(rng, 50, 20));
  std::vector<double> random_scores;
  for (std::uint64_t s = 0; s < 1000; ++s) random_scores.push_back(ul::random_split(items, 0.2, s).divergence);
  std::sort(random_scores.begin(), random_scores.end());
  const double p95 = random_scores[949];
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CHECK(ul::propose_split(items, {0.2, seed, 20, 1}).divergence <= p95);
  }
}

TEST_CASE("propose_split is close to the exhaustive optimum for N <= 12") {
  std::mt19937_64 rng(41);
  double worst_gap = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 4 + static_cast<std::size_t>(trial % 9);  // 4..12
    const auto rows = skewed_histograms(rng, n, 6);
    const auto items = items_from(rows);
    const double f = 0.2 + 0.1 * (trial % 4);
    const double optimum = exhaustive_optimum(rows, ul::validation_size(n, f));
    const double got = ul::propose_split(items, {f, 0, 20, 1}).divergence;
    CHECK(got >= optimum - 1e-12);
    CHECK(got <= std::max(optimum * 1.10, optimum + 0.01));
    worst_gap = std::max(worst_gap, got - optimum);
  }
  MESSAGE("largest gap to the exhaustive optimum: " << worst_gap);
}

TEST_CASE("random_split: sizes, validity, uniformity") {
  std::vector<ul::SplitItem> five;
  for (int i = 0; i < 5; ++i) five.push_back({record_key(i), hist({{i % 2, 1}})});
  CHECK(ul::random_split(five, 0.2, 0).val_keys.size() == 1);

  const auto a = ul::random_split(five, 0.4, 1), b = ul::random_split(five, 0.4, 2);
  for (const auto& plan : {a, b}) {
    CHECK(plan.val_keys.size() == 2);
    CHECK(plan.train_keys.size() == 3);
  }
  CHECK(ul::random_split(five, 0.4, 1) == a);

  std::vector<ul::SplitItem> items;
  for (int i = 0; i < 20; ++i) items.push_back({record_key(i), hist({{0, 1}, {1, 1}})});
  std::map<std::string, int> tally;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    for (const auto& k : ul::random_split(items, 0.2, s).val_keys) ++tally[k];
  }
  for (const auto& it : items) {
    CAPTURE(it.key);
    CHECK(std::abs(tally[it.key] / 1000.0 - 0.2) <= 0.05);
  }
}
