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

#ifndef RAREPATH_JUMPS_HPP
#define RAREPATH_JUMPS_HPP

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "rarepath/rng.hpp"

namespace rarepath {

using Point = std::vector<double>;

/// Law of the jump sizes; never produces the zero vector.
class MarkDistribution {
 public:
  enum class Kind { kPointMass, kDiscreteTable, kGaussianShifted, kCustom };

  static MarkDistribution point_mass(Point mark);
  static MarkDistribution discrete_table(std::vector<Point> values, std::vector<double> probs);
  static MarkDistribution gaussian_shifted(Point mean, double sd);
  static MarkDistribution custom(std::size_t dim, std::function<Point(RngStream&)> sampler);

  /// Throws kInvalidArgument when the draw is exactly the zero vector.
  [[nodiscard]] Point sample(RngStream& stream) const;

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }

 private:
  MarkDistribution() = default;

  Kind kind_ = Kind::kPointMass;
  std::size_t dim_ = 1;
  std::vector<Point> values_;
  std::vector<double> cumulative_;
  double sd_ = 0.0;
  std::function<Point(RngStream&)> sampler_;
};

/// Piecewise-constant path x0 + sum of marks with jump_time <= t.
class JumpPath {
 public:
  JumpPath(Point x0, double horizon);

  /// Appends a jump; times must be strictly increasing in (0, horizon].
  void add_jump(double time, Point mark);

  [[nodiscard]] const Point& x0() const noexcept { return x0_; }
  [[nodiscard]] double horizon() const noexcept { return horizon_; }
  [[nodiscard]] std::size_t dim() const noexcept { return x0_.size(); }
  [[nodiscard]] std::size_t jumps() const noexcept { return times_.size(); }
  [[nodiscard]] const std::vector<double>& jump_times() const noexcept { return times_; }
  [[nodiscard]] const std::vector<Point>& marks() const noexcept { return marks_; }

  /// N(t): number of jumps at times <= t.
  [[nodiscard]] std::size_t count_at(double t) const noexcept;
  /// Number of jumps at times < t.
  [[nodiscard]] std::size_t count_before(double t) const noexcept;
  [[nodiscard]] Point value_at(double t) const;
  [[nodiscard]] Point left_limit(double t) const;
  /// State after the first `jumps` jumps.
  [[nodiscard]] Point state_after(std::size_t jumps) const;

 private:
  Point x0_;
  double horizon_;
  std::vector<double> times_;
  std::vector<Point> marks_;
};

/// The restriction of a jump path to [0, t): all an intensity may look at.
class PathHistory {
 public:
  PathHistory(const JumpPath& path, double t) noexcept
      : path_(&path), visible_(path.count_before(t)), t_(t) {}

  [[nodiscard]] double time() const noexcept { return t_; }
  [[nodiscard]] std::size_t jumps() const noexcept { return visible_; }
  [[nodiscard]] double jump_time(std::size_t i) const noexcept { return path_->jump_times()[i]; }
  [[nodiscard]] const Point& mark(std::size_t i) const noexcept { return path_->marks()[i]; }
  [[nodiscard]] const Point& x0() const noexcept { return path_->x0(); }
  /// Left limit X(t-).
  [[nodiscard]] Point state() const { return path_->state_after(visible_); }

 private:
  const JumpPath* path_;
  std::size_t visible_;
  double t_;
};

/// Jump intensity g(t, path restricted to [0, t)).
class IntensityFn {
 public:
  enum class Kind { kStateDependent, kDeterministic, kPredictable };

  using StateFn = std::function<double(std::span<const double>)>;
  using TimeFn = std::function<double(double)>;
  using HistoryFn = std::function<double(double, const PathHistory&)>;

  static IntensityFn state_dependent(StateFn g);
  static IntensityFn deterministic(TimeFn g);
  static IntensityFn predictable(HistoryFn g);

  [[nodiscard]] Kind kind() const noexcept { return kind_; }

  /// Evaluates at time t on the part of `path` strictly before t.
  [[nodiscard]] double operator()(double t, const JumpPath& path) const;
  [[nodiscard]] double operator()(const PathHistory& history) const;
  /// Direct evaluation of a state-dependent intensity at a state.
  [[nodiscard]] double at_state(std::span<const double> state) const;

 private:
  Kind kind_ = Kind::kDeterministic;
  StateFn state_fn_;
  TimeFn time_fn_;
  HistoryFn history_fn_;
};

struct JumpLimits {
  std::size_t max_jumps = 100'000'000;
};

/// Builds X(t) = J(Gamma^{-1}(t)) from a supplied unit-rate compound Poisson path J.
/**
 * Gamma(u) = int_0^u 1/g(J(s)) ds is linear between jumps of J, so each jump of
 * J at u maps to the jump time Gamma(u) of X without root finding. `unit_path`
 * must extend past Gamma^{-1}(horizon).
 */
JumpPath time_change_path(const JumpPath& unit_path, const IntensityFn& g_state, double horizon);

/// Simulates the state-dependent compound Poisson process by the time change above.
JumpPath simulate_cpp_time_change(RngStream& stream, const IntensityFn& g_state,
                                  const MarkDistribution& marks, const Point& x0, double horizon,
                                  const JumpLimits& limits = {});

/// Simulates by thinning a rate-`g_bound` Poisson stream; a candidate with
/// g > g_bound is a hard bound-violation error.
JumpPath simulate_cpp_thinning(RngStream& stream, const IntensityFn& g, double g_bound,
                               const MarkDistribution& marks, const Point& x0, double horizon,
                               const JumpLimits& limits = {});

/// Psi_g(t) = int_0^t g(s, X) ds: exact for state-dependent g, adaptive
/// Gauss-Kronrod (relative tolerance 1e-10) on each inter-jump piece otherwise.
double compensator(const JumpPath& path, const IntensityFn& g, double t);

/// CSV columns: jump_index, time, mark (or mark_0..mark_{d-1}).
void write_jump_path_csv(std::ostream& out, const JumpPath& path);

}  // namespace rarepath

#endif  // RAREPATH_JUMPS_HPP
