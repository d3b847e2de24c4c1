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

#include <atomic>
#include <cstdlib>
#include <string>

#include "rarepath/error.hpp"
#include "rarepath/kernels.hpp"

namespace rarepath::kernels {

#ifndef RAREPATH_HAVE_AVX2
const KernelTable* detail::avx2_table() noexcept { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend default_backend() noexcept {
  if (const char* env = std::getenv("RAREPATH_KERNELS")) {
    if (auto parsed = parse_backend(env); parsed && available(*parsed)) {
      return *parsed;
    }
  }
  return available(Backend::kAvx2) ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<const KernelTable*>& active_table() noexcept {
  static std::atomic<const KernelTable*> current{&table(default_backend())};
  return current;
}

}  // namespace

bool available(Backend backend) noexcept {
  switch (backend) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
      return detail::avx2_table() != nullptr && cpu_has_avx2();
  }
  return false;
}

std::string_view to_string(Backend backend) noexcept {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

std::optional<Backend> parse_backend(std::string_view name) noexcept {
  if (name == "scalar") {
    return Backend::kScalar;
  }
  if (name == "avx2") {
    return Backend::kAvx2;
  }
  return std::nullopt;
}

const KernelTable& table(Backend backend) {
  if (!available(backend)) {
    fail(ErrorCode::kInvalidArgument,
         "kernel backend '" + std::string(to_string(backend)) + "' is not available on this CPU");
  }
  return backend == Backend::kAvx2 ? *detail::avx2_table() : detail::scalar_table();
}

Backend active_backend() noexcept {
  return active_table().load(std::memory_order_acquire) == &detail::scalar_table()
             ? Backend::kScalar
             : Backend::kAvx2;
}

void set_backend(Backend backend) { active_table().store(&table(backend), std::memory_order_release); }

double trapezoid_sum_sq(std::span<const double> values) {
  return active_table().load(std::memory_order_relaxed)->trapezoid_sum_sq(values.data(),
                                                                          values.size());
}

void radial_complement(std::span<const double> x, std::span<const double> y,
                       std::span<const double> z, double level, std::span<double> out) {
  require(x.size() == y.size() && y.size() == z.size() && out.size() == x.size(),
          "radial_complement: coordinate spans differ in length");
  active_table().load(std::memory_order_relaxed)
      ->radial_complement(x.data(), y.data(), z.data(), x.size(), level, out.data());
}

std::size_t first_at_or_below(std::span<const double> values, double threshold) {
  return active_table().load(std::memory_order_relaxed)->first_at_or_below(values.data(),
                                                                           values.size(), threshold);
}

std::size_t first_outside(std::span<const double> values, double lower, double upper) {
  return active_table().load(std::memory_order_relaxed)
      ->first_outside(values.data(), values.size(), lower, upper);
}

DotSumSq increment_dot(std::span<const double> drift, std::span<const double> path,
                       std::size_t dim) {
  require(dim > 0 && drift.size() % dim == 0, "increment_dot: drift is not a whole number of rows");
  const std::size_t steps = drift.size() / dim;
  require(path.size() >= (steps + 1) * dim, "increment_dot: path shorter than drift + 1 rows");
  return active_table().load(std::memory_order_relaxed)
      ->increment_dot(drift.data(), path.data(), steps, dim);
}

}  // namespace rarepath::kernels
