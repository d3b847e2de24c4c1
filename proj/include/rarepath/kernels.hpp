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

#ifndef RAREPATH_KERNELS_HPP
#define RAREPATH_KERNELS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

/**
 * \file
 * \brief Data-parallel inner loops with a scalar reference and SIMD variants.
 *
 * Every kernel has a scalar reference implementation. SIMD variants are
 * compiled into separate translation units and picked at runtime from the
 * CPU feature set. Element-wise kernels (radial complement, barrier scans)
 * are bitwise identical across backends; reductions agree to rounding.
 */

namespace rarepath::kernels {

enum class Backend { kScalar, kAvx2 };

struct DotSumSq {
  double dot = 0.0;
  double sum_sq = 0.0;
};

struct KernelTable {
  /// sum_i (v_i^2 + v_{i+1}^2) / 2 over consecutive pairs; 0 for n < 2.
  double (*trapezoid_sum_sq)(const double* values, std::size_t n);
  /// out_i = level - sqrt(x_i^2 + y_i^2 + z_i^2).
  void (*radial_complement)(const double* x, const double* y, const double* z, std::size_t n,
                            double level, double* out);
  /// First index with values[i] <= threshold, or n.
  std::size_t (*first_at_or_below)(const double* values, std::size_t n, double threshold);
  /// First index with values[i] <= lower or values[i] >= upper, or n.
  std::size_t (*first_outside)(const double* values, std::size_t n, double lower, double upper);
  /// Left-point stochastic sum over a row-major path with `dim` columns:
  /// dot = sum_k drift_k . (path_{k+1} - path_k), sum_sq = sum_k |drift_k|^2.
  DotSumSq (*increment_dot)(const double* drift, const double* path, std::size_t steps,
                            std::size_t dim);
};

[[nodiscard]] bool available(Backend backend) noexcept;
[[nodiscard]] std::string_view to_string(Backend backend) noexcept;
[[nodiscard]] std::optional<Backend> parse_backend(std::string_view name) noexcept;

/// Table for a specific backend; throws if the backend is not available.
[[nodiscard]] const KernelTable& table(Backend backend);

/// Backend used by the free functions below. Defaults to the widest available
/// variant unless the RAREPATH_KERNELS environment variable says otherwise.
[[nodiscard]] Backend active_backend() noexcept;
void set_backend(Backend backend);

double trapezoid_sum_sq(std::span<const double> values);
void radial_complement(std::span<const double> x, std::span<const double> y,
                       std::span<const double> z, double level, std::span<double> out);
std::size_t first_at_or_below(std::span<const double> values, double threshold);
std::size_t first_outside(std::span<const double> values, double lower, double upper);
DotSumSq increment_dot(std::span<const double> drift, std::span<const double> path,
                       std::size_t dim);

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

}  // namespace rarepath::kernels

#endif  // RAREPATH_KERNELS_HPP
