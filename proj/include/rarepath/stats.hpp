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

#ifndef RAREPATH_STATS_HPP
#define RAREPATH_STATS_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace rarepath::stats {

/// Streaming mean/variance (Welford). Feed values in replica order.
class RunningMoments {
 public:
  void add(double x) noexcept;
  void merge(const RunningMoments& other) noexcept;

  [[nodiscard]] std::size_t count() const noexcept { return n_; }
  [[nodiscard]] double mean() const noexcept { return mean_; }
  /// Unbiased sample variance; 0 for fewer than two values.
  [[nodiscard]] double variance() const noexcept;
  /// Standard error of the mean; +inf for fewer than two values.
  [[nodiscard]] double stderr_of_mean() const noexcept;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

double normal_cdf(double x) noexcept;

/// Upper tail P(X >= x) of a chi-square with `dof` degrees of freedom.
double chi_square_survival(double x, double dof);

/// Two-sample homogeneity test on count histograms; sparse bins are pooled
/// from the right until each pooled bin holds at least `min_pooled` counts.
ChiSquareResult two_sample_chi_square(std::span<const double> counts_a,
                                      std::span<const double> counts_b, double min_pooled = 10.0);

/// Pearson goodness of fit of observed counts against probabilities
/// (which must sum to 1); bins with expected count < `min_expected` are pooled.
ChiSquareResult goodness_of_fit(std::span<const double> observed, std::span<const double> probs,
                                double min_expected = 5.0);

/// Compares a weighted histogram (per-sample bin index and weight, weights
/// having unit mean in expectation) with an unweighted sample histogram.
/// The statistic is the Mahalanobis distance of the difference between the
/// two bin-probability estimates under their joint sample covariance,
/// chi-square with one degree of freedom per pooled bin asymptotically.
/// Bins are pooled from the right until each holds at least `min_pooled`
/// observations in both samples.
ChiSquareResult weighted_vs_unweighted(std::span<const std::size_t> weighted_bins,
                                       std::span<const double> weights,
                                       std::span<const std::size_t> direct_bins, std::size_t bins,
                                       double min_pooled = 10.0);

}  // namespace rarepath::stats

#endif  // RAREPATH_STATS_HPP
