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

#include "rarepath/measure.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "rarepath/csv.hpp"
#include "rarepath/error.hpp"
#include "rarepath/kernels.hpp"

namespace rarepath {
namespace {

using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;

double stieltjes(const std::function<double(double)>& f, const Compensator& a, double t) {
  if (t <= 0) {
    return 0.0;
  }
  if (a.rate) {
    return Quadrature::integrate([&](double s) { return f(s) * a.rate(s); }, 0.0, t, 15, 1e-12);
  }
  auto midpoint_sum = [&](std::size_t cells) {
    double sum = 0.0;
    double left = a.value(0.0);
    for (std::size_t i = 0; i < cells; ++i) {
      const double lo = t * static_cast<double>(i) / static_cast<double>(cells);
      const double hi = t * static_cast<double>(i + 1) / static_cast<double>(cells);
      const double right = a.value(hi);
      sum += f(0.5 * (lo + hi)) * (right - left);
      left = right;
    }
    return sum;
  };
  std::size_t cells = 64;
  double previous = midpoint_sum(cells);
  while (cells < (1u << 22)) {
    cells *= 2;
    const double current = midpoint_sum(cells);
    if (std::abs(current - previous) <= 1e-10 * std::max(1.0, std::abs(current))) {
      return current;
    }
    previous = current;
  }
  return previous;
}

// int_0^t f(s, history at s) ds, piecewise between jumps of `path`.
double integrate_along(const JumpPath& path, double t, bool piecewise_constant,
                       const std::function<double(const PathHistory&)>& f) {
  const std::size_t pieces = path.count_before(t);
  double total = 0.0;
  double start = 0.0;
  for (std::size_t i = 0; i <= pieces; ++i) {
    const double end = i < pieces ? path.jump_times()[i] : t;
    if (end > start) {
      if (piecewise_constant) {
        total += f(PathHistory(path, 0.5 * (start + end))) * (end - start);
      } else {
        total += Quadrature::integrate([&](double s) { return f(PathHistory(path, s)); }, start, end,
                                       15, 1e-10);
      }
    }
    start = end;
  }
  return total;
}

double positive_intensity(const IntensityFn& g, const PathHistory& history) {
  const double v = g(history);
  if (!(v > 0.0) || !std::isfinite(v)) {
    fail(ErrorCode::kInvalidIntensity,
         "intensity must be strictly positive along the path, got " + csv::format_real(v) +
             " at t=" + csv::format_real(history.time()));
  }
  return v;
}

}  // namespace

DensityAccumulator continuous_exponential(const ContinuousPath& w, const ContinuousPath& mu) {
  require(w.dim() == mu.dim(), "continuous_exponential: drift and path dimensions differ");
  require(std::abs(w.step() - mu.step()) <= 1e-15 * w.step(),
          "continuous_exponential: drift and path grids differ");
  require(mu.size() == w.size() || mu.size() + 1 == w.size(),
          "continuous_exponential: drift must cover every left grid point of the path");
  DensityAccumulator acc;
  const std::size_t steps = w.size() - 1;
  if (steps == 0) {
    return acc;
  }
  const auto sums =
      kernels::increment_dot(mu.values().subspan(0, steps * w.dim()), w.values(), w.dim());
  acc.add_stochastic(sums.dot);
  acc.add_compensator(-0.5 * sums.sum_sq * w.step());
  acc.advance_to(w.duration());
  return acc;
}

DensityAccumulator counting_density(const JumpPath& counts, const Compensator& a,
                                    const std::function<double(double)>& u, double u_bound, double t) {
  require(static_cast<bool>(a.value), "counting_density: compensator evaluator missing");
  require(counts.dim() == 1, "counting_density: counting path must be scalar");
  require(t >= 0 && t <= counts.horizon(), "counting_density: t outside [0, horizon]");
  require(u_bound >= 0, "counting_density: negative bound on u");
  auto bounded_u = [&](double s) {
    const double v = u(s);
    if (!(std::abs(v) <= u_bound)) {
      fail(ErrorCode::kInvalidArgument, "counting_density: |u(" + csv::format_real(s) +
                                            ")| exceeds the declared bound " + csv::format_real(u_bound));
    }
    return v;
  };
  DensityAccumulator acc;
  const std::size_t jumps = counts.count_at(t);
  double stochastic = 0.0;
  for (std::size_t i = 0; i < jumps; ++i) {
    require(counts.marks()[i][0] == 1.0, "counting_density: counting path must have unit jumps");
    stochastic -= bounded_u(counts.jump_times()[i]);
  }
  acc.add_stochastic(stochastic);
  acc.add_compensator(-stieltjes([&](double s) { return std::expm1(-bounded_u(s)); }, a, t));
  acc.advance_to(t);
  return acc;
}

DensityAccumulator cpp_intensity_density(const JumpPath& path, const IntensityFn& g1,
                                         const IntensityFn& g2, double t, DensityMode mode) {
  require(t >= 0 && t <= path.horizon(), "cpp_intensity_density: t outside [0, horizon]");
  const bool constant_pieces = g1.kind() == IntensityFn::Kind::kStateDependent &&
                               g2.kind() == IntensityFn::Kind::kStateDependent;
  DensityAccumulator acc;
  double jump_sum = 0.0;
  const std::size_t jumps = path.count_at(t);
  for (std::size_t i = 0; i < jumps; ++i) {
    const PathHistory before(path, path.jump_times()[i]);
    jump_sum += std::log(positive_intensity(g2, before)) - std::log(positive_intensity(g1, before));
  }
  const double drift = integrate_along(path, t, constant_pieces, [&](const PathHistory& h) {
    return positive_intensity(g2, h) - positive_intensity(g1, h);
  });
  double stochastic = jump_sum;
  if (mode == DensityMode::kLiteral) {
    stochastic -= integrate_along(path, t, constant_pieces, [&](const PathHistory& h) {
      const double a = positive_intensity(g1, h);
      return (std::log(positive_intensity(g2, h)) - std::log(a)) * a;
    });
  }
  acc.add_stochastic(stochastic);
  acc.add_compensator(-drift);
  acc.advance_to(t);
  return acc;
}

EstimatorReport importance_estimate(std::span<const WeightedSample> samples, bool self_normalized) {
  require(!samples.empty(), "importance_estimate: no samples");
  double max_log = -std::numeric_limits<double>::infinity();
  for (const WeightedSample& s : samples) {
    if (!std::isfinite(s.log_weight)) {
      fail(ErrorCode::kInvalidWeight, "importance_estimate: non-finite log weight for replica " +
                                          std::to_string(s.replica_id));
    }
    max_log = std::max(max_log, s.log_weight);
  }
  const double n = static_cast<double>(samples.size());
  double sum_w = 0.0, sum_w2 = 0.0, sum_wh = 0.0;
  for (const WeightedSample& s : samples) {
    const double w = std::exp(s.log_weight - max_log);
    sum_w += w;
    sum_w2 += w * w;
    sum_wh += w * s.payoff;
  }

  EstimatorReport report;
  report.n_samples = samples.size();
  report.ess = sum_w * sum_w / sum_w2;
  report.extras["max_log_weight"] = max_log;
  report.extras["top1_weight_share"] = 1.0 / sum_w;

  if (self_normalized) {
    report.estimate = sum_wh / sum_w;
    double spread = 0.0;
    for (const WeightedSample& s : samples) {
      const double w = std::exp(s.log_weight - max_log);
      const double d = s.payoff - report.estimate;
      spread += w * w * d * d;
    }
    report.std_error = std::sqrt(spread) / sum_w;
  } else {
    const double scale = std::exp(max_log);
    const double mean_scaled = sum_wh / n;
    double spread = 0.0;
    for (const WeightedSample& s : samples) {
      const double d = std::exp(s.log_weight - max_log) * s.payoff - mean_scaled;
      spread += d * d;
    }
    report.estimate = scale * mean_scaled;
    report.std_error = samples.size() > 1 ? scale * std::sqrt(spread / (n - 1.0) / n) : 0.0;
  }
  if (samples.size() == 1) {
    report.std_error = std::numeric_limits<double>::infinity();
  }
  return report;
}

void write_weighted_samples_csv(std::ostream& out, std::span<const WeightedSample> samples) {
  csv::write_row(out, {"replica_id", "payoff", "log_weight"});
  for (const WeightedSample& s : samples) {
    csv::write_row(out, {csv::format_int(static_cast<long long>(s.replica_id)),
                         csv::format_real(s.payoff), csv::format_real(s.log_weight)});
  }
}

std::vector<WeightedSample> read_weighted_samples_csv(std::istream& in) {
  std::vector<WeightedSample> samples;
  for (const auto& row : csv::read_numeric(in, true)) {
    require(row.size() == 3, "weighted sample rows need 3 columns");
    samples.push_back({row[1], row[2], static_cast<std::uint64_t>(row[0])});
  }
  return samples;
}

}  // namespace rarepath
