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

#ifndef RAREPATH_MEASURE_HPP
#define RAREPATH_MEASURE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rarepath/jumps.hpp"
#include "rarepath/paths.hpp"

namespace rarepath {

/// Running log M(t) of a candidate density process, split into its
/// stochastic-integral part and its compensator part.
class DensityAccumulator {
 public:
  void add_stochastic(double increment) noexcept {
    log_stochastic_ += increment;
    log_m_ = log_stochastic_ + log_compensator_;
  }
  void add_compensator(double increment) noexcept {
    log_compensator_ += increment;
    log_m_ = log_stochastic_ + log_compensator_;
  }
  void advance_to(double t) noexcept { t_ = t; }

  [[nodiscard]] double log_m() const noexcept { return log_m_; }
  [[nodiscard]] double log_stochastic_part() const noexcept { return log_stochastic_; }
  [[nodiscard]] double log_compensator_part() const noexcept { return log_compensator_; }
  [[nodiscard]] double time() const noexcept { return t_; }

 private:
  double log_m_ = 0.0;
  double log_stochastic_ = 0.0;
  double log_compensator_ = 0.0;
  double t_ = 0.0;
};

struct WeightedSample {
  double payoff = 0.0;
  double log_weight = 0.0;
  std::uint64_t replica_id = 0;
};

struct EstimatorReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double ess = 0.0;
  std::size_t n_samples = 0;
  std::map<std::string, double> extras;
  std::vector<std::string> warnings;
};

/// log M = sum_k mu_k . (W_{k+1} - W_k) - 1/2 sum_k |mu_k|^2 h over the whole of W.
/// `mu` holds the left-point drift on W's grid (W.size() or W.size() - 1 points).
DensityAccumulator continuous_exponential(const ContinuousPath& w, const ContinuousPath& mu);

/// Continuous compensator A of a counting process. `rate` (dA/dt) is optional;
/// without it integrals against dA are Riemann-Stieltjes sums refined to 1e-10.
struct Compensator {
  std::function<double(double)> value;
  std::function<double(double)> rate;
};

/// log M(t) = -sum_{jumps <= t} u(jump) - int_0^t (exp(-u) - 1) dA for a unit-jump path.
DensityAccumulator counting_density(const JumpPath& counts, const Compensator& a,
                                    const std::function<double(double)>& u, double u_bound, double t);

enum class DensityMode {
  /// log M = int log(g2/g1) dN - int (g2 - g1) ds.
  kBremaud,
  /// Integrates log(g2/g1) against the compensated count dN - g1 ds instead.
  kLiteral,
};

DensityAccumulator cpp_intensity_density(const JumpPath& path, const IntensityFn& g1,
                                         const IntensityFn& g2, double t,
                                         DensityMode mode = DensityMode::kBremaud);

/// Importance-sampling estimate computed in log space with max subtraction.
/**
 * Self-normalized: sum w H / sum w with delta-method standard error
 * sqrt(sum w^2 (H - estimate)^2) / sum w. Otherwise the plain mean of w H.
 * ESS = (sum w)^2 / sum w^2. A single sample reports an infinite standard error.
 * Extras: max_log_weight, top1_weight_share.
 */
EstimatorReport importance_estimate(std::span<const WeightedSample> samples, bool self_normalized);

/// CSV columns: replica_id, payoff, log_weight.
void write_weighted_samples_csv(std::ostream& out, std::span<const WeightedSample> samples);
std::vector<WeightedSample> read_weighted_samples_csv(std::istream& in);

}  // namespace rarepath

#endif  // RAREPATH_MEASURE_HPP
