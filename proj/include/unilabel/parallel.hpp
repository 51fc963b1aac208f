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

#ifndef UNILABEL_PARALLEL_HPP
#define UNILABEL_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace unilabel {

// Splits [0, count) into `workers` contiguous chunks, folds each chunk into a
// copy of `init` with `map(index, acc)`, then combines the partials in chunk
// order with `reduce(into, part)`. The combination order depends only on the
// chunk layout, and every index of a chunk is visited in ascending order, so
// any associative `reduce` gives the sequential result.
//
// If several chunks throw, the exception of the lowest chunk is rethrown; that
// is the exception a sequential run would have raised first.
template <class Result, class MapFn, class ReduceFn>
Result parallel_map_reduce(std::size_t count, unsigned workers, const Result& init, MapFn map,
                           ReduceFn reduce) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(workers, count));
  if (chunks == 1) {
    Result acc = init;
    for (std::size_t i = 0; i < count; ++i) map(i, acc);
    return acc;
  }

  std::vector<Result> partials(chunks, init);
  std::vector<std::exception_ptr> errors(chunks);
  std::vector<std::thread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t begin = count * c / chunks;
    const std::size_t end = count * (c + 1) / chunks;
    threads.emplace_back([&, c, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) map(i, partials[c]);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  Result acc = std::move(partials[0]);
  for (std::size_t c = 1; c < chunks; ++c) reduce(acc, std::move(partials[c]));
  return acc;
}

// Runs `fn(index)` for every index; same error semantics as above.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn fn) {
  struct Unit {};
  parallel_map_reduce(
      count, workers, Unit{}, [&](std::size_t i, Unit&) { fn(i); }, [](Unit&, Unit&&) {});
}

}  // namespace unilabel

#endif  // UNILABEL_PARALLEL_HPP
