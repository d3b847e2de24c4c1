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

#ifndef RAREPATH_CHAIN_HPP
#define RAREPATH_CHAIN_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "rarepath/rng.hpp"

/**
 * \file
 * \brief Dyadic lattice walks, finite Markov chains, time reversal and
 * exhaustive path enumeration.
 *
 * Lattice states are stored as integer multiples of delta = 2^-n, so the
 * value of state k is k * delta and no rounding accumulates along a walk.
 */

namespace rarepath::chain {

using State = std::int64_t;

struct LatticeSpec {
  explicit LatticeSpec(int n);

  int n;
  double delta;      // 2^-n
  double time_step;  // 2^-2n == delta * delta

  [[nodiscard]] double value(State k) const noexcept { return static_cast<double>(k) * delta; }
  /// Lattice index of an integer level.
  [[nodiscard]] State index_of(std::int64_t level) const noexcept { return level << n; }
};

/// Nearest-neighbour kernel on the nonnegative lattice.
struct BirthDeathKernel {
  LatticeSpec lattice;
  std::function<double(State)> up_prob;
  std::set<State> absorbing;
  /// Largest reachable state, if the kernel lives on a bounded interval.
  std::optional<State> max_state;

  [[nodiscard]] bool is_absorbing(State k) const { return absorbing.contains(k); }
};

/// Up with probability (1 - delta (y ^ n)) / 2 at y > 0, up with probability 1 at 0.
BirthDeathKernel ou_chain_kernel(const LatticeSpec& spec);

/// Symmetric walk conditioned to reach 0 before returning to `level`:
/// up 1/2 (1 - delta / (N - y)), down 1/2 (1 + delta / (N - y)) on (0, N),
/// 0 absorbing and the top state forced down.
BirthDeathKernel h_transform_kernel(const LatticeSpec& spec, int level);

struct ChainPath {
  std::vector<State> states;
  [[nodiscard]] std::size_t steps() const noexcept { return states.empty() ? 0 : states.size() - 1; }
};

using StopRule = std::function<bool(State state, std::size_t step)>;

/// Runs the kernel from `start` until an absorbing state or `stop` fires.
/// Throws kNonterminationSuspected after `max_steps` steps.
ChainPath simulate_chain(const BirthDeathKernel& kernel, State start, const StopRule& stop,
                         RngStream& stream, std::size_t max_steps = 1'000'000'000);

enum class WeightForm { kProduct, kExponent };

struct DiscreteWeight {
  double log_weight = 0.0;
  /// sum over steps of q^2 / 2 (reported by both forms).
  double half_sum_q2 = 0.0;
};

/// Likelihood ratio of the OU chain against the symmetric walk along a path
/// ending at 0. Product: sum log(1 - q_{k-1} J_k). Exponent: y_0^2/2 + T/2 - half_sum_q2.
DiscreteWeight discrete_weight(const ChainPath& path, const LatticeSpec& spec, WeightForm form);

/// Finite chain with a dense row-stochastic kernel; states are 0..size-1.
class FiniteChain {
 public:
  using Matrix = std::vector<std::vector<double>>;

  explicit FiniteChain(Matrix kernel, std::optional<std::vector<double>> pi = std::nullopt);

  [[nodiscard]] std::size_t size() const noexcept { return kernel_.size(); }
  [[nodiscard]] const Matrix& kernel() const noexcept { return kernel_; }
  [[nodiscard]] double operator()(std::size_t from, std::size_t to) const { return kernel_[from][to]; }
  [[nodiscard]] const std::optional<std::vector<double>>& pi() const noexcept { return pi_; }
  [[nodiscard]] bool is_birth_death() const noexcept;

 private:
  Matrix kernel_;
  std::optional<std::vector<double>> pi_;
};

/// Birth-death chain on {0..size-1} with the given up probabilities; row
/// k moves down with probability 1 - up[k] (up[0] is forced to 1, up[last] to 0
/// unless `absorbing_zero`, which makes state 0 absorbing).
FiniteChain birth_death_chain(const std::vector<double>& up, bool absorbing_zero = false);

/// The OU chain on lattice states {0, delta, .., level + delta}. Rows up to
/// `level` are exact; the extra top state reflects downward.
FiniteChain ou_chain_truncated(const LatticeSpec& spec, int level);

/// pi K = pi, sum pi = 1; detailed balance for birth-death kernels, dense LU otherwise.
/// Throws kReducibleChain when the solution is not unique.
std::vector<double> stationary_distribution(const FiniteChain& chain);

/// K'(y, x) = pi(x) K(x, y) / pi(y); uses the chain's pi or computes it.
FiniteChain reversal_kernel(const FiniteChain& chain);

/// One step of the chain from `from`.
std::size_t sample_next(const FiniteChain& chain, std::size_t from, RngStream& stream);

using Potential = std::function<double(std::size_t)>;

struct ConvSample {
  ChainPath path;          // x = X_0, ..., X_{T_*}
  ChainPath reversed_run;  // X'_0, ..., X'_{T'_b}
  std::size_t pivot = 0;   // last visit of x before T'_b in reversed_run
  std::size_t attempts = 0;
};

/// Samples the path from x up to the first entry of {V >= level},
/// conditioned on reaching it before b, by running the reversed chain from
/// pi restricted to {V >= level} and rejecting runs outside
/// {T'_x <= T'_b < T'_*}.
ConvSample conv_sampler(const FiniteChain& chain, const Potential& v, double level, std::size_t x,
                        std::size_t b, RngStream& stream, std::size_t max_attempts = 100'000'000);

struct Enumeration {
  /// Exact probability of every path (start included) that terminates in success.
  std::map<std::vector<std::size_t>, double> success_paths;
  double success_mass = 0.0;
  double failure_mass = 0.0;
  /// Mass of paths still alive after max_len steps.
  double truncated_mass = 0.0;
};

enum class Outcome { kContinue, kSuccess, kFailure };

/// Exhaustive path enumeration from `start`; `classify(state, step)` is
/// consulted at every step >= 1. Refuses chains above 12 states or
/// max_len above 24 with kGuardExceeded.
Enumeration enumerate_paths(const FiniteChain& chain, std::size_t start,
                            const std::function<Outcome(std::size_t, std::size_t)>& classify,
                            std::size_t max_len);

/// Paths from x stopped at T_* or T_b; success is {T_* < T_b}. The
/// conditional law is success_paths scaled by 1 / success_mass.
Enumeration enumerate_conditioned(const FiniteChain& chain, const Potential& v, double level,
                                  std::size_t x, std::size_t b, std::size_t max_len);

/// Plain numeric CSV, one kernel row per line, no header.
void write_matrix_csv(std::ostream& out, const FiniteChain::Matrix& m);
FiniteChain::Matrix read_matrix_csv(std::istream& in);

/// CSV columns: step, state (state written as its lattice value when `spec` is given).
void write_chain_path_csv(std::ostream& out, const ChainPath& path,
                          const std::optional<LatticeSpec>& spec = std::nullopt);

}  // namespace rarepath::chain

#endif  // RAREPATH_CHAIN_HPP
