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

#ifndef RAREPATH_OU_RARE_EVENT_HPP
#define RAREPATH_OU_RARE_EVENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rarepath/measure.hpp"
#include "rarepath/paths.hpp"
#include "rarepath/rng.hpp"

/**
 * \file
 * \brief Conditional path functionals of the OU process dX = -X dt + dB,
 * X(0) = 1, given that it reaches N before 0.
 *
 * The importance sampler runs X'(t) = N - |B(t)| (B three-dimensional) to its
 * first zero T0', reverses the stretch before the last visit xi' of level 1,
 * and weights it by M' = exp((N^2 + T0' - int_0^T0' X'^2) / 2). The
 * self-normalized ratio of f * M' and M' estimates E[f(X up to T_N) | T_N < T_0].
 */

namespace rarepath::ou {

/// Bounded functional of a path that starts at 1 and ends at N.
struct PathFunctional {
  enum class Kind { kCappedDuration, kOccupationAbove, kRunningMax, kIndicator };

  Kind kind = Kind::kIndicator;
  double cap = 1.0;
  double level = 0.0;  // kOccupationAbove only

  static PathFunctional capped_duration(double cap);
  static PathFunctional occupation_above(double level, double cap);
  static PathFunctional running_max(double cap);
  static PathFunctional indicator();

  /// Parses "capped-duration:CAP", "occupation-above:LEVEL:CAP",
  /// "running-max:CAP" or "indicator"; throws kConfig otherwise.
  static PathFunctional parse(const std::string& text);
  [[nodiscard]] std::string name() const;

  /// `path` is gridded; `duration` is its refined length in time. The
  /// occupation time integrates the linear interpolant exactly.
  [[nodiscard]] double eval(const ContinuousPath& path, double duration) const;
};

struct OuQuery {
  int level = 2;  // N
  PathFunctional functional = PathFunctional::indicator();
  std::size_t replicas = 1000;
  double step = 1e-3;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  StopPolicy policy{};
};

struct BridgeSample {
  ReversedExcursion excursion;  // runs from the last visit of 1 back to N
  double t0_prime = 0.0;
  double integral_sq = 0.0;
  double log_weight = 0.0;
  double xi_prime = 0.0;
};

/// (N^2 + T0' - int X'^2) / 2.
double bridge_log_weight(int level, double t0_prime, double integral_sq) noexcept;

/// Throws kHorizonExpired if X' does not reach 0 within the policy.
BridgeSample sample_reversed_bridge(RngStream& stream, int level, double step,
                                    const StopPolicy& policy = {});

/// Copy of the excursion with its first point set to exactly 1.
ContinuousPath snapped_excursion(const BridgeSample& sample);

struct SampleRecord {
  std::uint64_t replica_id = 0;
  double t0_prime = 0.0;
  double integral_sq = 0.0;
  double log_weight = 0.0;
  double payoff = 0.0;
};

/// Self-normalized estimate over query.replicas bridge samples. Extras:
/// max_log_weight, top1_weight_share, mean_weight, mean_weight_stderr,
/// mean_t0_prime, time_units (total simulated time).
EstimatorReport estimate_conditional(const OuQuery& query, std::vector<SampleRecord>* dump = nullptr);
/// Same sample set evaluated under several functionals (query.functional is
/// ignored); dump payoffs refer to the first.
std::vector<EstimatorReport> estimate_conditional(const OuQuery& query,
                                                  const std::vector<PathFunctional>& functionals,
                                                  std::vector<SampleRecord>* dump = nullptr);

/// Plain Monte Carlo over query.replicas OU paths from 1 kept when they hit N
/// before 0. Extras: acceptance_rate, acceptance_stderr, accepted,
/// time_units, mean_attempt_cost. Throws kEstimateUndefined with no acceptance.
EstimatorReport oracle_rejection(const OuQuery& query);
std::vector<EstimatorReport> oracle_rejection(const OuQuery& query,
                                              const std::vector<PathFunctional>& functionals);

struct ScalingRow {
  int level = 0;
  double is_cost = 0.0;                        // time units per effective IS sample
  double rejection_cost_per_effective = 0.0;  // time units per accepted path
  double ratio = 0.0;
  double acceptance = 0.0;
  bool acceptance_from_quadrature = false;
  double ess_fraction = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  /// Least-squares slopes of log cost against log N.
  double is_exponent = 0.0;
  double rejection_exponent = 0.0;
};

/// Per level: IS cost is mean T0' divided by ESS / replicas; rejection cost is
/// mean attempt length divided by the acceptance rate. With fewer than
/// `min_accepts` acceptances the quadrature value s(1)/s(N) is used instead.
ScalingReport scaling_report(const std::vector<int>& levels, double step, std::size_t replicas,
                             std::uint64_t seed, unsigned workers = 1, std::size_t min_accepts = 20);

/// field,value CSV: estimate, stderr, ess, replicas, then `context`, then extras in key order.
void write_report_csv(std::ostream& out, const EstimatorReport& report,
                      const std::vector<std::pair<std::string, std::string>>& context = {});
void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& records);
void write_scaling_csv(std::ostream& out, const ScalingReport& report);

}  // namespace rarepath::ou

#endif  // RAREPATH_OU_RARE_EVENT_HPP
