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

#include "rarepath/paths.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <ostream>
#include <string>

#include "rarepath/csv.hpp"
#include "rarepath/error.hpp"
#include "rarepath/kernels.hpp"

namespace rarepath {
namespace {

// Crossing probabilities below this are treated as zero without a draw.
constexpr double kBridgeExponentCutoff = 40.0;

std::size_t steps_for(double horizon, double step) {
  return static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
}

double interpolate_crossing(double t_prev, double step, double before, double after, double level) {
  const double denom = before - after;
  const double frac = denom == 0.0 ? 1.0 : (before - level) / denom;
  return t_prev + step * std::clamp(frac, 0.0, 1.0);
}

void validate_policy(double step, const StopPolicy& policy) {
  require(step > 0 && std::isfinite(step), "step must be positive");
  require(policy.horizon > 0, "horizon must be positive");
  require(policy.horizon_cap >= policy.horizon, "horizon cap below horizon");
}

// Grows the step limit by doubling the horizon; false once the cap is reached.
bool extend_horizon(double& current, std::size_t& limit, double step, const StopPolicy& policy) {
  if (current >= policy.horizon_cap) {
    return false;
  }
  current = std::min(2.0 * current, policy.horizon_cap);
  limit = steps_for(current, step);
  return true;
}

// Brownian-bridge probability of touching a barrier at signed distances a, b (same sign).
double bridge_cross_probability(double a, double b, double step) {
  const double exponent = 2.0 * a * b / step;
  return exponent > kBridgeExponentCutoff ? 0.0 : std::exp(-exponent);
}

}  // namespace

ContinuousPath::ContinuousPath(double step, std::size_t dim, std::vector<double> values)
    : step_(step), dim_(dim), values_(std::move(values)) {
  require(step > 0 && std::isfinite(step), "ContinuousPath: step must be positive");
  require(dim >= 1, "ContinuousPath: dim must be at least 1");
  require(!values_.empty() && values_.size() % dim == 0,
          "ContinuousPath: values must hold a nonzero whole number of points");
}

ContinuousPath ContinuousPath::prefix(std::size_t points) const {
  require(points >= 1 && points <= size(), "ContinuousPath::prefix: bad point count");
  return ContinuousPath(step_, dim_,
                        std::vector<double>(values_.begin(), values_.begin() + points * dim_));
}

ContinuousPath simulate_bm(RngStream& stream, std::size_t dim, double step, double horizon) {
  require(dim >= 1, "simulate_bm: dim must be at least 1");
  require(step > 0 && std::isfinite(step), "simulate_bm: step must be positive");
  require(horizon >= step, "simulate_bm: horizon must be at least one step");
  const std::size_t steps = steps_for(horizon, step);
  const double scale = std::sqrt(step);
  std::vector<double> values((steps + 1) * dim, 0.0);
  for (std::size_t k = 1; k <= steps; ++k) {
    for (std::size_t c = 0; c < dim; ++c) {
      values[k * dim + c] = values[(k - 1) * dim + c] + scale * stream.normal();
    }
  }
  return ContinuousPath(step, dim, std::move(values));
}

StoppedSegment simulate_ou_stopped(RngStream& stream, double x0, double step, double lower,
                                   double upper, const StopPolicy& policy) {
  validate_policy(step, policy);
  require(lower < upper, "simulate_ou_stopped: lower barrier must be below upper");
  require(x0 >= lower && x0 <= upper, "simulate_ou_stopped: x0 outside [lower, upper]");

  std::vector<double> values{x0};
  if (x0 <= lower || x0 >= upper) {
    const BarrierHit hit = x0 <= lower ? BarrierHit::kLowerBarrier : BarrierHit::kUpperBarrier;
    return {ContinuousPath(step, 1, std::move(values)), 0, hit, 0.0};
  }

  double current = policy.horizon;
  std::size_t limit = steps_for(current, step);
  values.reserve(std::min<std::size_t>(limit + 1, 1u << 16));
  const double scale = std::sqrt(step);
  const bool bridge = policy.monitoring == Monitoring::kBrownianBridge;

  double x = x0;
  std::size_t k = 0;
  auto finish = [&](BarrierHit hit, double refined) {
    return StoppedSegment{ContinuousPath(step, 1, std::move(values)), k, hit, refined};
  };

  for (;;) {
    if (k == limit && !extend_horizon(current, limit, step, policy)) {
      return finish(BarrierHit::kHorizonExpired, static_cast<double>(k) * step);
    }
    if (values.size() >= policy.max_points) {
      return finish(BarrierHit::kHorizonExpired, static_cast<double>(k) * step);
    }
    const double next = x - x * step + scale * stream.normal();
    const double t_prev = static_cast<double>(k) * step;
    ++k;
    if (next <= lower) {
      values.push_back(next);
      return finish(BarrierHit::kLowerBarrier, interpolate_crossing(t_prev, step, x, next, lower));
    }
    if (next >= upper) {
      values.push_back(next);
      return finish(BarrierHit::kUpperBarrier, interpolate_crossing(t_prev, step, x, next, upper));
    }
    if (bridge) {
      const double p_lower = bridge_cross_probability(x - lower, next - lower, step);
      const double p_upper = bridge_cross_probability(upper - x, upper - next, step);
      if (p_lower + p_upper > 0.0) {
        const double u = stream.uniform();
        if (u < p_lower || u < p_lower + p_upper) {
          const bool low = u < p_lower;
          values.push_back(low ? lower : upper);
          return finish(low ? BarrierHit::kLowerBarrier : BarrierHit::kUpperBarrier,
                        t_prev + 0.5 * step);
        }
      }
    }
    values.push_back(next);
    x = next;
  }
}

StoppedSegment simulate_bessel3_complement_stopped(RngStream& stream, double level, double step,
                                                   const StopPolicy& policy) {
  validate_policy(step, policy);
  require(level > 0, "simulate_bessel3_complement_stopped: level must be positive");

  constexpr std::size_t kChunk = 1024;
  const double scale = std::sqrt(step);
  const bool bridge = policy.monitoring == Monitoring::kBrownianBridge;

  std::vector<double> values{level};
  double current = policy.horizon;
  std::size_t limit = steps_for(current, step);
  values.reserve(std::min<std::size_t>(limit + 1, 1u << 16));

  std::vector<double> x(kChunk), y(kChunk), z(kChunk), out(kChunk);
  double px = 0.0, py = 0.0, pz = 0.0;
  std::size_t k = 0;

  auto finish = [&](BarrierHit hit, double refined) {
    return StoppedSegment{ContinuousPath(step, 1, std::move(values)), k, hit, refined};
  };

  for (;;) {
    if (k == limit && !extend_horizon(current, limit, step, policy)) {
      return finish(BarrierHit::kHorizonExpired, static_cast<double>(k) * step);
    }
    if (values.size() >= policy.max_points) {
      return finish(BarrierHit::kHorizonExpired, static_cast<double>(k) * step);
    }
    const std::size_t m = std::min({kChunk, limit - k, policy.max_points - values.size()});
    stream.fill_normal(x.data(), m);
    stream.fill_normal(y.data(), m);
    stream.fill_normal(z.data(), m);
    for (std::size_t i = 0; i < m; ++i) {
      px += scale * x[i];
      py += scale * y[i];
      pz += scale * z[i];
      x[i] = px;
      y[i] = py;
      z[i] = pz;
    }
    const std::span<double> chunk(out.data(), m);
    kernels::radial_complement(std::span<const double>(x.data(), m),
                               std::span<const double>(y.data(), m),
                               std::span<const double>(z.data(), m), level, chunk);
    const std::size_t grid_hit = kernels::first_at_or_below(chunk, 0.0);

    if (bridge) {
      double prev = values.back();
      const std::size_t scan = std::min(grid_hit, m);
      for (std::size_t i = 0; i < scan; ++i) {
        const double p = bridge_cross_probability(prev, chunk[i], step);
        if (p > 0.0 && stream.uniform() < p) {
          values.insert(values.end(), chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(i));
          values.push_back(0.0);
          k += i + 1;
          return finish(BarrierHit::kLowerBarrier, static_cast<double>(k) * step - 0.5 * step);
        }
        prev = chunk[i];
      }
    }

    if (grid_hit < m) {
      const double before = grid_hit == 0 ? values.back() : chunk[grid_hit - 1];
      values.insert(values.end(), chunk.begin(),
                    chunk.begin() + static_cast<std::ptrdiff_t>(grid_hit + 1));
      k += grid_hit + 1;
      const double t_prev = static_cast<double>(k - 1) * step;
      return finish(BarrierHit::kLowerBarrier,
                    interpolate_crossing(t_prev, step, before, chunk[grid_hit], 0.0));
    }
    values.insert(values.end(), chunk.begin(), chunk.end());
    k += m;
  }
}

ReversedExcursion reversed_last_excursion(const StoppedSegment& seg, double level) {
  require(seg.hit == BarrierHit::kLowerBarrier,
          "reversed_last_excursion: segment must be stopped at its lower barrier");
  const ContinuousPath& path = seg.path;
  require(path.dim() == 1, "reversed_last_excursion: scalar path required");
  require(seg.stop_index < path.size(), "reversed_last_excursion: stop index out of range");

  const double h = path.step();
  std::size_t pivot = 0;
  double passage = 0.0;
  bool found = false;
  for (std::size_t k = seg.stop_index; k >= 1; --k) {
    const double after = path(k) - level;
    const double before = path(k - 1) - level;
    if (after == 0.0) {
      pivot = k;
      passage = path.time(k);
      found = true;
      break;
    }
    if (before * after < 0.0) {
      pivot = k - 1;
      passage = interpolate_crossing(path.time(k - 1), h, path(k - 1), path(k), level);
      found = true;
      break;
    }
  }
  if (!found && path(0) == level) {
    found = true;
  }
  if (!found) {
    fail(ErrorCode::kLevelNeverReached,
         "reversed_last_excursion: path never reaches level " + csv::format_real(level));
  }
  std::vector<double> values(path.values().begin(),
                             path.values().begin() + static_cast<std::ptrdiff_t>(pivot + 1));
  std::reverse(values.begin(), values.end());
  return {ContinuousPath(h, 1, std::move(values)), passage, level};
}

ContinuousPath reversed(const ContinuousPath& path) {
  const std::size_t n = path.size();
  const std::size_t d = path.dim();
  std::vector<double> values(n * d);
  for (std::size_t k = 0; k < n; ++k) {
    const auto src = path.point(n - 1 - k);
    std::copy(src.begin(), src.end(), values.begin() + static_cast<std::ptrdiff_t>(k * d));
  }
  return ContinuousPath(path.step(), d, std::move(values));
}

double path_integral_square(const ContinuousPath& path, double stop_time) {
  require(path.dim() == 1, "path_integral_square: scalar path required");
  const double h = path.step();
  const double duration = path.duration();
  require(stop_time >= 0, "path_integral_square: negative stop time");
  require(stop_time <= duration * (1 + 1e-12) + 1e-15, "path_integral_square: stop time beyond path");
  stop_time = std::min(stop_time, duration);

  auto full = static_cast<std::size_t>(std::floor(stop_time / h));
  // Absorb rounding when stop_time is a grid time.
  if (full + 1 < path.size() && std::abs(stop_time - path.time(full + 1)) <= 1e-12 * h) {
    ++full;
  }
  full = std::min(full, path.size() - 1);
  const auto values = path.values();
  double integral = h * kernels::trapezoid_sum_sq(values.subspan(0, full + 1));
  const double tail = stop_time - path.time(full);
  if (tail > 0 && full + 1 < path.size()) {
    const double frac = tail / h;
    const double end = values[full] + frac * (values[full + 1] - values[full]);
    integral += 0.5 * (values[full] * values[full] + end * end) * tail;
  }
  return integral;
}

double ou_scale_ratio(double x, double level) {
  require(level > 0, "ou_scale_ratio: level must be positive");
  require(x >= 0 && x <= level, "ou_scale_ratio: x must lie in [0, N]");
  if (x == level) {
    return 1.0;
  }
  if (x == 0.0) {
    return 0.0;
  }
  // Both integrals carry the factor exp(-N^2) so large N does not overflow.
  const double shift = level * level;
  auto integrand = [shift](double u) { return std::exp(u * u - shift); };
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double num = Quadrature::integrate(integrand, 0.0, x, 20, 1e-14);
  const double den = Quadrature::integrate(integrand, 0.0, level, 20, 1e-14);
  return num / den;
}

void write_path_csv(std::ostream& out, const ContinuousPath& path) {
  std::vector<std::string> header{"index", "time"};
  if (path.dim() == 1) {
    header.emplace_back("value");
  } else {
    for (std::size_t c = 0; c < path.dim(); ++c) {
      header.push_back("value_" + std::to_string(c));
    }
  }
  csv::write_row(out, header);
  for (std::size_t k = 0; k < path.size(); ++k) {
    std::vector<std::string> row{csv::format_int(static_cast<long long>(k)),
                                 csv::format_real(path.time(k))};
    for (const double v : path.point(k)) {
      row.push_back(csv::format_real(v));
    }
    csv::write_row(out, row);
  }
}

}  // namespace rarepath
