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

#include "rarepath/jumps.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numeric>
#include <ostream>
#include <string>

#include "rarepath/csv.hpp"
#include "rarepath/error.hpp"

namespace rarepath {
namespace {

bool is_zero(const Point& p) {
  return std::all_of(p.begin(), p.end(), [](double v) { return v == 0.0; });
}

void add_into(Point& state, const Point& mark) {
  for (std::size_t c = 0; c < state.size(); ++c) {
    state[c] += mark[c];
  }
}

double checked_intensity(double value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    fail(ErrorCode::kInvalidIntensity,
         "intensity must be strictly positive and finite, got " + csv::format_real(value));
  }
  return value;
}

}  // namespace

// --- MarkDistribution -------------------------------------------------------

MarkDistribution MarkDistribution::point_mass(Point mark) {
  require(!mark.empty(), "point_mass: empty mark");
  require(!is_zero(mark), "point_mass: the mark must not be the zero vector");
  MarkDistribution d;
  d.kind_ = Kind::kPointMass;
  d.dim_ = mark.size();
  d.values_ = {std::move(mark)};
  return d;
}

MarkDistribution MarkDistribution::discrete_table(std::vector<Point> values, std::vector<double> probs) {
  require(!values.empty() && values.size() == probs.size(), "discrete_table: size mismatch");
  const std::size_t dim = values.front().size();
  require(dim > 0, "discrete_table: empty mark");
  for (const Point& v : values) {
    require(v.size() == dim, "discrete_table: marks differ in dimension");
    require(!is_zero(v), "discrete_table: the zero vector is not an admissible mark");
  }
  for (const double p : probs) {
    require(p >= 0.0, "discrete_table: negative probability");
  }
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  require(std::abs(total - 1.0) <= 1e-12, "discrete_table: probabilities must sum to 1");
  MarkDistribution d;
  d.kind_ = Kind::kDiscreteTable;
  d.dim_ = dim;
  d.values_ = std::move(values);
  d.cumulative_.resize(probs.size());
  std::partial_sum(probs.begin(), probs.end(), d.cumulative_.begin());
  return d;
}

MarkDistribution MarkDistribution::gaussian_shifted(Point mean, double sd) {
  require(!mean.empty(), "gaussian_shifted: empty mean");
  require(sd >= 0.0, "gaussian_shifted: negative sd");
  require(sd > 0.0 || !is_zero(mean), "gaussian_shifted: degenerate at the zero vector");
  MarkDistribution d;
  d.kind_ = Kind::kGaussianShifted;
  d.dim_ = mean.size();
  d.values_ = {std::move(mean)};
  d.sd_ = sd;
  return d;
}

MarkDistribution MarkDistribution::custom(std::size_t dim, std::function<Point(RngStream&)> sampler) {
  require(dim > 0 && static_cast<bool>(sampler), "custom: need a dimension and a sampler");
  MarkDistribution d;
  d.kind_ = Kind::kCustom;
  d.dim_ = dim;
  d.sampler_ = std::move(sampler);
  return d;
}

Point MarkDistribution::sample(RngStream& stream) const {
  Point mark;
  switch (kind_) {
    case Kind::kPointMass:
      return values_.front();
    case Kind::kDiscreteTable: {
      const double u = stream.uniform() * cumulative_.back();
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      const auto index = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()),
                                                values_.size() - 1);
      return values_[index];
    }
    case Kind::kGaussianShifted:
      mark = values_.front();
      for (double& c : mark) {
        c += sd_ * stream.normal();
      }
      break;
    case Kind::kCustom:
      mark = sampler_(stream);
      require(mark.size() == dim_, "mark sampler returned a point of the wrong dimension");
      break;
  }
  if (is_zero(mark)) {
    fail(ErrorCode::kInvalidArgument, "mark sampler produced the zero vector");
  }
  return mark;
}

// --- JumpPath ---------------------------------------------------------------

JumpPath::JumpPath(Point x0, double horizon) : x0_(std::move(x0)), horizon_(horizon) {
  require(!x0_.empty(), "JumpPath: empty initial point");
  require(horizon >= 0 && !std::isnan(horizon), "JumpPath: negative horizon");
}

void JumpPath::add_jump(double time, Point mark) {
  require(time > 0 && time <= horizon_, "JumpPath: jump time outside (0, horizon]");
  require(times_.empty() || time > times_.back(), "JumpPath: jump times must increase strictly");
  require(mark.size() == x0_.size(), "JumpPath: mark dimension mismatch");
  require(!is_zero(mark), "JumpPath: zero mark");
  times_.push_back(time);
  marks_.push_back(std::move(mark));
}

std::size_t JumpPath::count_at(double t) const noexcept {
  return static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin());
}

std::size_t JumpPath::count_before(double t) const noexcept {
  return static_cast<std::size_t>(std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
}

Point JumpPath::state_after(std::size_t jumps) const {
  Point state = x0_;
  for (std::size_t i = 0; i < jumps && i < marks_.size(); ++i) {
    add_into(state, marks_[i]);
  }
  return state;
}

Point JumpPath::value_at(double t) const { return state_after(count_at(t)); }

Point JumpPath::left_limit(double t) const { return state_after(count_before(t)); }

// --- IntensityFn ------------------------------------------------------------

IntensityFn IntensityFn::state_dependent(StateFn g) {
  IntensityFn fn;
  fn.kind_ = Kind::kStateDependent;
  fn.state_fn_ = std::move(g);
  return fn;
}

IntensityFn IntensityFn::deterministic(TimeFn g) {
  IntensityFn fn;
  fn.kind_ = Kind::kDeterministic;
  fn.time_fn_ = std::move(g);
  return fn;
}

IntensityFn IntensityFn::predictable(HistoryFn g) {
  IntensityFn fn;
  fn.kind_ = Kind::kPredictable;
  fn.history_fn_ = std::move(g);
  return fn;
}

double IntensityFn::operator()(double t, const JumpPath& path) const {
  return (*this)(PathHistory(path, t));
}

double IntensityFn::operator()(const PathHistory& history) const {
  switch (kind_) {
    case Kind::kStateDependent: {
      const Point state = history.state();
      return state_fn_(state);
    }
    case Kind::kDeterministic:
      return time_fn_(history.time());
    case Kind::kPredictable:
      return history_fn_(history.time(), history);
  }
  return 0.0;
}

double IntensityFn::at_state(std::span<const double> state) const {
  require(kind_ == Kind::kStateDependent, "at_state: intensity is not state-dependent");
  return state_fn_(state);
}

// --- Simulation -------------------------------------------------------------

JumpPath time_change_path(const JumpPath& unit_path, const IntensityFn& g_state, double horizon) {
  require(g_state.kind() == IntensityFn::Kind::kStateDependent,
          "time change needs a state-dependent intensity");
  require(horizon >= 0, "time change: negative horizon");
  JumpPath out(unit_path.x0(), horizon);
  Point state = unit_path.x0();
  double gamma = 0.0;
  double last_u = 0.0;
  for (std::size_t i = 0; i < unit_path.jumps(); ++i) {
    const double u = unit_path.jump_times()[i];
    gamma += (u - last_u) / checked_intensity(g_state.at_state(state));
    last_u = u;
    if (gamma > horizon) {
      return out;
    }
    out.add_jump(gamma, unit_path.marks()[i]);
    add_into(state, unit_path.marks()[i]);
  }
  const double tail = (unit_path.horizon() - last_u) / checked_intensity(g_state.at_state(state));
  require(gamma + tail >= horizon,
          "time change: unit-rate path ends before Gamma^{-1}(horizon)");
  return out;
}

JumpPath simulate_cpp_time_change(RngStream& stream, const IntensityFn& g_state,
                                  const MarkDistribution& marks, const Point& x0, double horizon,
                                  const JumpLimits& limits) {
  require(g_state.kind() == IntensityFn::Kind::kStateDependent,
          "time change needs a state-dependent intensity");
  require(marks.dim() == x0.size(), "mark and state dimensions differ");
  require(horizon >= 0, "negative horizon");
  JumpPath out(x0, horizon);
  Point state = x0;
  double gamma = 0.0;
  for (;;) {
    const double rate = checked_intensity(g_state.at_state(state));
    double next = gamma + stream.exponential() / rate;
    if (next > horizon) {
      return out;
    }
    if (next <= gamma) {
      next = std::nextafter(gamma, horizon + 1.0);
    }
    gamma = next;
    Point mark = marks.sample(stream);
    add_into(state, mark);
    out.add_jump(gamma, std::move(mark));
    if (out.jumps() > limits.max_jumps) {
      fail(ErrorCode::kExplosionSuspected,
           "more than " + std::to_string(limits.max_jumps) + " jumps before the horizon");
    }
  }
}

JumpPath simulate_cpp_thinning(RngStream& stream, const IntensityFn& g, double g_bound,
                               const MarkDistribution& marks, const Point& x0, double horizon,
                               const JumpLimits& limits) {
  require(g_bound > 0 && std::isfinite(g_bound), "thinning: bound must be positive and finite");
  require(marks.dim() == x0.size(), "mark and state dimensions differ");
  require(horizon >= 0, "negative horizon");
  JumpPath out(x0, horizon);
  double t = 0.0;
  for (;;) {
    t += stream.exponential() / g_bound;
    if (t > horizon) {
      return out;
    }
    const double rate = g(t, out);
    if (!(rate >= 0.0)) {
      fail(ErrorCode::kInvalidIntensity, "thinning: negative or NaN intensity");
    }
    if (rate > g_bound) {
      fail(ErrorCode::kBoundViolation, "thinning: intensity " + csv::format_real(rate) +
                                           " exceeds the declared bound " + csv::format_real(g_bound));
    }
    if (stream.uniform() * g_bound < rate) {
      out.add_jump(t, marks.sample(stream));
      if (out.jumps() > limits.max_jumps) {
        fail(ErrorCode::kExplosionSuspected,
             "more than " + std::to_string(limits.max_jumps) + " jumps before the horizon");
      }
    }
  }
}

double compensator(const JumpPath& path, const IntensityFn& g, double t) {
  require(t >= 0 && t <= path.horizon(), "compensator: t outside [0, horizon]");
  const std::size_t pieces = path.count_before(t);
  double total = 0.0;
  double start = 0.0;
  if (g.kind() == IntensityFn::Kind::kStateDependent) {
    Point state = path.x0();
    for (std::size_t i = 0; i <= pieces; ++i) {
      const double end = i < pieces ? path.jump_times()[i] : t;
      total += g.at_state(state) * (end - start);
      if (i < pieces) {
        add_into(state, path.marks()[i]);
      }
      start = end;
    }
    return total;
  }
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;
  auto integrand = [&](double s) { return g(s, path); };
  for (std::size_t i = 0; i <= pieces; ++i) {
    const double end = i < pieces ? path.jump_times()[i] : t;
    if (end > start) {
      total += Quadrature::integrate(integrand, start, end, 15, 1e-10);
    }
    start = end;
  }
  return total;
}

void write_jump_path_csv(std::ostream& out, const JumpPath& path) {
  std::vector<std::string> header{"jump_index", "time"};
  if (path.dim() == 1) {
    header.emplace_back("mark");
  } else {
    for (std::size_t c = 0; c < path.dim(); ++c) {
      header.push_back("mark_" + std::to_string(c));
    }
  }
  csv::write_row(out, header);
  for (std::size_t i = 0; i < path.jumps(); ++i) {
    std::vector<std::string> row{csv::format_int(static_cast<long long>(i)),
                                 csv::format_real(path.jump_times()[i])};
    for (const double v : path.marks()[i]) {
      row.push_back(csv::format_real(v));
    }
    csv::write_row(out, row);
  }
}

}  // namespace rarepath
