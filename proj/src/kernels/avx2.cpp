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

// Compiled with -mavx2 only; nothing here runs unless the CPU reports AVX2.
// FMA is deliberately not enabled so element-wise results match the scalar
// reference bit for bit.

#include <immintrin.h>

#include <bit>
#include <cmath>

#include "rarepath/kernels.hpp"

namespace rarepath::kernels {
namespace {

inline double horizontal_sum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

double trapezoid_sum_sq(const double* v, std::size_t n) {
  if (n < 2) {
    return 0.0;
  }
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a = _mm256_loadu_pd(v + i);
    const __m256d b = _mm256_loadu_pd(v + i + 4);
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(a, a));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(b, b));
  }
  double sum = horizontal_sum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    sum += v[i] * v[i];
  }
  return sum - 0.5 * (v[0] * v[0] + v[n - 1] * v[n - 1]);
}

void radial_complement(const double* x, const double* y, const double* z, std::size_t n,
                       double level, double* out) {
  const __m256d lvl = _mm256_set1_pd(level);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d vz = _mm256_loadu_pd(z + i);
    const __m256d xy = _mm256_add_pd(_mm256_mul_pd(vx, vx), _mm256_mul_pd(vy, vy));
    const __m256d r2 = _mm256_add_pd(xy, _mm256_mul_pd(vz, vz));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(lvl, _mm256_sqrt_pd(r2)));
  }
  for (; i < n; ++i) {
    const double r2 = (x[i] * x[i] + y[i] * y[i]) + z[i] * z[i];
    out[i] = level - std::sqrt(r2);
  }
}

std::size_t first_at_or_below(const double* v, std::size_t n, double threshold) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(v + i), t, _CMP_LE_OQ));
    if (mask != 0) {
      return i + static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(mask)));
    }
  }
  for (; i < n; ++i) {
    if (v[i] <= threshold) {
      return i;
    }
  }
  return n;
}

std::size_t first_outside(const double* v, std::size_t n, double lower, double upper) {
  const __m256d lo = _mm256_set1_pd(lower);
  const __m256d hi = _mm256_set1_pd(upper);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(v + i);
    const __m256d hit =
        _mm256_or_pd(_mm256_cmp_pd(x, lo, _CMP_LE_OQ), _mm256_cmp_pd(x, hi, _CMP_GE_OQ));
    const int mask = _mm256_movemask_pd(hit);
    if (mask != 0) {
      return i + static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(mask)));
    }
  }
  for (; i < n; ++i) {
    if (v[i] <= lower || v[i] >= upper) {
      return i;
    }
  }
  return n;
}

DotSumSq increment_dot(const double* drift, const double* path, std::size_t steps,
                       std::size_t dim) {
  const std::size_t count = steps * dim;
  __m256d dot = _mm256_setzero_pd();
  __m256d sq = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d mu = _mm256_loadu_pd(drift + i);
    const __m256d inc = _mm256_sub_pd(_mm256_loadu_pd(path + i + dim), _mm256_loadu_pd(path + i));
    dot = _mm256_add_pd(dot, _mm256_mul_pd(mu, inc));
    sq = _mm256_add_pd(sq, _mm256_mul_pd(mu, mu));
  }
  DotSumSq acc{horizontal_sum(dot), horizontal_sum(sq)};
  for (; i < count; ++i) {
    acc.dot += drift[i] * (path[i + dim] - path[i]);
    acc.sum_sq += drift[i] * drift[i];
  }
  return acc;
}

constexpr KernelTable kAvx2Table{
    &trapezoid_sum_sq, &radial_complement, &first_at_or_below, &first_outside, &increment_dot,
};

}  // namespace

const KernelTable* detail::avx2_table() noexcept { return &kAvx2Table; }

}  // namespace rarepath::kernels
