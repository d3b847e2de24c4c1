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

#ifndef RAREPATH_PATHS_HPP
#define RAREPATH_PATHS_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "rarepath/rng.hpp"

/**
 * \file
 * \brief Gridded continuous paths and the stopped diffusion simulators built on them.
 */

namespace rarepath {

/// Uniformly gridded path in R^d; point k sits at time k * step.
class ContinuousPath {
 public:
  ContinuousPath(double step, std::size_t dim, std::vector<double> values);

  [[nodiscard]] double step() const noexcept { return step_; }
  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size() / dim_; }
  [[nodiscard]] double time(std::size_t k) const noexcept { return static_cast<double>(k) * step_; }
  [[nodiscard]] double duration() const noexcept { return time(size() - 1); }

  [[nodiscard]] std::span<const double> point(std::size_t k) const noexcept {
    return {values_.data() + k * dim_, dim_};
  }
  [[nodiscard]] double operator()(std::size_t k, std::size_t coord = 0) const noexcept {
    return values_[k * dim_ + coord];
  }
  /// Row-major storage, size() * dim() entries.
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  /// First `points` grid points as a new path.
  [[nodiscard]] ContinuousPath prefix(std::size_t points) const;

 private:
  double step_;
  std::size_t dim_;
  std::vector<double> values_;
};

enum class BarrierHit { kLowerBarrier, kUpperBarrier, kHorizonExpired };

/// How barrier crossings between grid points are detected.
enum class Monitoring {
  /// First grid point at or past the barrier.
  kGrid,
  /// Grid check plus a Brownian-bridge crossing draw on each interval.
  kBrownianBridge,
};

struct StopPolicy {
  double horizon = 1.0;
  /// The horizon doubles until it reaches this cap before a run is flagged expired.
  double horizon_cap = 1e6;
  Monitoring monitoring = Monitoring::kGrid;
  /// Guard on stored grid points; reaching it also flags the run expired.
  std::size_t max_points = 50'000'000;
};

struct StoppedSegment {
  ContinuousPath path;  // ends at stop_index
  std::size_t stop_index = 0;
  BarrierHit hit = BarrierHit::kHorizonExpired;
  /// Crossing time interpolated linearly between the last two grid points
  /// (midpoint of the interval for bridge-detected crossings).
  double stop_time_refined = 0.0;
};

/// Time-reversed segment ending at the path origin, starting at a last passage.
struct ReversedExcursion {
  ContinuousPath segment;  // segment(0) ~ level, last point = original path start
  double origin_time = 0.0;  // interpolated last-passage time of `level`
  double level = 0.0;
};

ContinuousPath simulate_bm(RngStream& stream, std::size_t dim, double step, double horizon);

/// Euler scheme for dX = -X dt + dB started at x0, stopped on leaving (lower, upper).
StoppedSegment simulate_ou_stopped(RngStream& stream, double x0, double step, double lower,
                                   double upper, const StopPolicy& policy);

/// X'(t) = level - |B(t)| for a three-dimensional Brownian motion B, stopped at X' <= 0.
StoppedSegment simulate_bessel3_complement_stopped(RngStream& stream, double level, double step,
                                                   const StopPolicy& policy);

/// Reverses the part of a stopped scalar path before its last passage of `level`.
/**
 * The last passage is the final grid interval whose endpoints straddle
 * `level` (an exact grid hit counts, later index wins). The returned segment
 * starts at the grid point on the start side of that passage and runs
 * backwards to the path origin, so for X' it is X'(xi - s), 0 <= s <= xi.
 */
ReversedExcursion reversed_last_excursion(const StoppedSegment& seg, double level);

/// Point order reversed; applying it twice is the identity.
ContinuousPath reversed(const ContinuousPath& path);

/// Trapezoidal integral of x(t)^2 over [0, stop_time] for a scalar path; the
/// final partial cell uses the linearly interpolated value at stop_time.
double path_integral_square(const ContinuousPath& path, double stop_time);

/// s(x) / s(N) for the OU scale function s(y) = int_0^y exp(u^2) du.
double ou_scale_ratio(double x, double level);

/// CSV columns: index, time, value (or value_0..value_{d-1}).
void write_path_csv(std::ostream& out, const ContinuousPath& path);

}  // namespace rarepath

#endif  // RAREPATH_PATHS_HPP
