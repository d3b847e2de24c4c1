// Copyright 2026 The rarepath Authors
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

#ifndef RAREPATH_PARALLEL_HPP
#define RAREPATH_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace rarepath {

/// Runs `body(i)` for every i in [0, count) on up to `workers` threads.
/**
 * Indices are handed out in fixed-size blocks. The body must write its
 * result to a slot owned by index i; callers then reduce the slots in index
 * order, which keeps every aggregate independent of the worker count. If
 * bodies throw, the exception from the smallest failing index is rethrown.
 */
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

/// Evaluates `f(i)` for each replica index and returns the results in index order.
template <class T, class F>
std::vector<T> map_replicas(std::size_t count, unsigned workers, F&& f) {
  std::vector<T> out(count);
  parallel_for(count, workers, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

/// Default worker count: RAREPATH_WORKERS if set, else hardware concurrency.
unsigned default_workers() noexcept;

}  // namespace rarepath

#endif  // RAREPATH_PARALLEL_HPP
