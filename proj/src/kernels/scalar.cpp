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

#include <cmath>

#include "rarepath/kernels.hpp"

namespace rarepath::kernels {
namespace {

double trapezoid_sum_sq(const double* v, std::size_t n) {
  if (n < 2) {
    return 0.0;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += v[i] * v[i];
  }
  return sum - 0.5 * (v[0] * v[0] + v[n - 1] * v[n - 1]);
}

void radial_complement(const double* x, const double* y, const double* z, std::size_t n,
                       double level, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double r2 = (x[i] * x[i] + y[i] * y[i]) + z[i] * z[i];
    out[i] = level - std::sqrt(r2);
  }
}

std::size_t first_at_or_below(const double* v, std::size_t n, double threshold) {
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] <= threshold) {
      return i;
    }
  }
  return n;
}

std::size_t first_outside(const double* v, std::size_t n, double lower, double upper) {
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] <= lower || v[i] >= upper) {
      return i;
    }
  }
  return n;
}

DotSumSq increment_dot(const double* drift, const double* path, std::size_t steps,
                       std::size_t dim) {
  DotSumSq acc;
  const std::size_t count = steps * dim;
  for (std::size_t i = 0; i < count; ++i) {
    acc.dot += drift[i] * (path[i + dim] - path[i]);
    acc.sum_sq += drift[i] * drift[i];
  }
  return acc;
}

constexpr KernelTable kScalarTable{
    &trapezoid_sum_sq, &radial_complement, &first_at_or_below, &first_outside, &increment_dot,
};

}  // namespace

const KernelTable& detail::scalar_table() noexcept { return kScalarTable; }

}  // namespace rarepath::kernels
