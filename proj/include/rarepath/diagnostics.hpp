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

#ifndef RAREPATH_DIAGNOSTICS_HPP
#define RAREPATH_DIAGNOSTICS_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rarepath/rng.hpp"

/**
 * \file
 * \brief Monte Carlo checks of whether a family of nonnegative local
 * martingales M_n yields true martingales in the limit: weighted tail
 * profiles Q_n(M_n(t) >= kappa) = E[M_n(t) 1{M_n(t) >= kappa}], stopped
 * tails and plain means.
 *
 * Every verdict here is statistical. Member index 0 denotes the
 * untruncated, unlocalized process.
 */

namespace rarepath::diag {

/// One realization of M_n at a single time.
struct Realization {
  double m = 1.0;
  /// tau_n <= t, decided pathwise while simulating.
  bool stopped = false;
  /// <L_n>(t) where available, NaN otherwise.
  double quadratic_variation = 0.0;
};

struct MartingaleFamily {
  std::string description;
  std::vector<int> n_grid;
  std::vector<double> t_grid;  // increasing, positive
  bool has_stopping = false;
  /// One path of member n, read off at every time of `t_grid`. Members are
  /// driven by the same stream, so results are coupled across n.
  std::function<std::vector<Realization>(RngStream&, int n, const std::vector<double>& t_grid)> simulate;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct ProfileEntry {
  int n = 0;
  double t = 0.0;
  double kappa = 0.0;
  Estimate tail;
};

enum class Verdict { kTightnessConsistent, kTightnessViolated, kInconclusive };

struct TightnessConfig {
  double threshold = 0.05;
  double consistent_sigmas = 2.0;
  double violated_sigmas = 3.0;
};

struct TightnessProfile {
  std::vector<ProfileEntry> entries;  // ordered by t, n, kappa
  Verdict verdict = Verdict::kInconclusive;
  double violated_kappa = 0.0;  // largest kappa, when violated
  double floor = 0.0;           // smallest tail estimate among the violating entries
  /// Per (n, t): E[M], E[M 1{M >= kappa}] + E[M 1{M < kappa}] is checked against it.
  std::vector<ProfileEntry> means;  // kappa field unused
};

struct RunSettings {
  std::size_t replicas = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

/// Verdict rules: consistent if, for every t, every n has estimate +
/// consistent_sigmas * stderr below the threshold at the largest kappa;
/// violated if for some t the estimate - violated_sigmas * stderr exceeds
/// the threshold at the two largest kappas for every n in the upper half
/// of n_grid; inconclusive otherwise.
TightnessProfile q_tail_profile(const MartingaleFamily& family, const std::vector<double>& kappas,
                                const RunSettings& run, const TightnessConfig& config = {});

struct GridEntry {
  int n = 0;
  double t = 0.0;
  Estimate estimate;
};

/// E[M_n(t) 1{tau_n <= t}] for each (n, t).
std::vector<GridEntry> stopped_tail(const MartingaleFamily& family, const RunSettings& run);

/// E[M_n(t)] for each (n, t).
std::vector<GridEntry> unity_check(const MartingaleFamily& family, const RunSettings& run);

/// Weighted quantiles of <L_n>(t) under Q_n (weights M_n(t)); a heuristic
/// view of whether the quadratic variation stays tight. NaN when the family
/// does not report it.
std::vector<double> quadratic_variation_quantiles(const MartingaleFamily& family, int n, double t,
                                                  const std::vector<double>& probs, const RunSettings& run);

/// Drift mu(t, W) for the continuous exponential families.
struct Drift {
  /// Writes mu at time t from the current point W(t). `state` holds `dim`
  /// zero-initialized slots per path for drifts that depend on the past.
  using Eval = std::function<void(double t, std::span<const double> w, std::span<double> state,
                                  std::span<double> mu)>;

  std::string name;
  Eval eval;

  static Drift constant(double c);
  /// c * sin(W), componentwise; bounded by |c|.
  static Drift bounded_sine(double c);
  /// c * max_{s <= t} |W_i(s)| per component; linear growth.
  static Drift running_max(double c);
  /// "constant:C", "bounded-sine:C" or "running-max:C"; throws kConfig otherwise.
  static Drift parse(const std::string& text);
};

/// Componentwise (mu ^ n) v (-n); n = 0 leaves mu unchanged.
void clamp_drift(std::span<double> mu, int n) noexcept;

/// Member n: M_n = exp(int mu_n dW - 1/2 int |mu_n|^2 dt) on a grid of
/// `step`. With `stop_at_level`, M_n is stopped at the first grid time it
/// reaches n.
MartingaleFamily benes_truncation_family(const Drift& mu, double step, std::size_t dim,
                                         std::vector<int> n_grid, std::vector<double> t_grid,
                                         bool stop_at_level = false);

/// M = 1 / |e_1 + B(t)| for a three-dimensional Brownian motion, member n
/// stopped when M first reaches n. The hit is decided exactly between grid
/// points from the Bessel-3 bridge law, so only `step` (the grid on which
/// the radius is sampled) sets the cost.
MartingaleFamily inverse_bessel_family(std::vector<int> n_grid, std::vector<double> t_grid,
                                       double step = 1.0 / 64.0);

/// M = 1 with tau_n = n.
MartingaleFamily unit_family(std::vector<int> n_grid, std::vector<double> t_grid);

/// E[1 / R_t] for a Bessel-3 process started at 1: 2 Phi(1 / sqrt(t)) - 1.
double inverse_bessel_mean(double t);

std::string to_string(Verdict v);

/// CSV rows n,t,kappa,estimate,stderr followed by a "# verdict ..." line.
void write_profile_csv(std::ostream& out, const TightnessProfile& profile);
/// CSV rows n,t,estimate,stderr.
void write_grid_csv(std::ostream& out, const std::vector<GridEntry>& entries);
/// One-line summary, e.g. "verdict=TightnessViolatedAt kappa=16 floor=0.31".
std::string verdict_line(const TightnessProfile& profile);

}  // namespace rarepath::diag

#endif  // RAREPATH_DIAGNOSTICS_HPP
