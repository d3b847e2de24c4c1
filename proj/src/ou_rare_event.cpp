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

#include "rarepath/ou_rare_event.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "rarepath/csv.hpp"
#include "rarepath/error.hpp"
#include "rarepath/parallel.hpp"
#include "rarepath/stats.hpp"

namespace rarepath::ou {
namespace {

constexpr std::uint64_t kImportanceTag = 0x1517;
constexpr std::uint64_t kRejectionTag = 0x0c1e;

double parse_number(const std::string& text, const std::string& whole) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || !std::isfinite(value)) {
    fail(ErrorCode::kConfig, "functional '" + whole + "': '" + text + "' is not a number");
  }
  return value;
}

void check_query(const OuQuery& q) {
  require(q.level >= 2, "OU query: N must be at least 2");
  require(q.replicas >= 1, "OU query: replicas must be at least 1");
  require(q.step > 0 && std::isfinite(q.step), "OU query: step must be positive");
}

double time_above(const ContinuousPath& path, double level) {
  const double h = path.step();
  double total = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double a = path(k - 1);
    const double b = path(k);
    if (a > level && b > level) {
      total += h;
    } else if (a > level) {
      total += h * (a - level) / (a - b);
    } else if (b > level) {
      total += h * (b - level) / (b - a);
    }
  }
  return total;
}

}  // namespace

PathFunctional PathFunctional::capped_duration(double cap) {
  require(cap > 0, "capped duration: cap must be positive");
  return {Kind::kCappedDuration, cap, 0.0};
}

PathFunctional PathFunctional::occupation_above(double level, double cap) {
  require(cap > 0, "occupation: cap must be positive");
  return {Kind::kOccupationAbove, cap, level};
}

PathFunctional PathFunctional::running_max(double cap) {
  require(cap > 0, "running max: cap must be positive");
  return {Kind::kRunningMax, cap, 0.0};
}

PathFunctional PathFunctional::indicator() { return {Kind::kIndicator, 1.0, 0.0}; }

PathFunctional PathFunctional::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ':');) {
    parts.push_back(part);
  }
  if (parts.empty()) {
    fail(ErrorCode::kConfig, "empty functional");
  }
  const std::string& kind = parts[0];
  try {
    if (kind == "indicator" && parts.size() == 1) {
      return indicator();
    }
    if (kind == "capped-duration" && parts.size() == 2) {
      return capped_duration(parse_number(parts[1], text));
    }
    if (kind == "running-max" && parts.size() == 2) {
      return running_max(parse_number(parts[1], text));
    }
    if (kind == "occupation-above" && parts.size() == 3) {
      return occupation_above(parse_number(parts[1], text), parse_number(parts[2], text));
    }
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  fail(ErrorCode::kConfig,
       "unknown functional '" + text +
           "' (expected indicator, capped-duration:CAP, running-max:CAP or occupation-above:LEVEL:CAP)");
}

std::string PathFunctional::name() const {
  switch (kind) {
    case Kind::kCappedDuration:
      return "capped-duration:" + csv::format_real(cap);
    case Kind::kOccupationAbove:
      return "occupation-above:" + csv::format_real(level) + ":" + csv::format_real(cap);
    case Kind::kRunningMax:
      return "running-max:" + csv::format_real(cap);
    case Kind::kIndicator:
      break;
  }
  return "indicator";
}

double PathFunctional::eval(const ContinuousPath& path, double duration) const {
  switch (kind) {
    case Kind::kCappedDuration:
      return std::min(duration, cap);
    case Kind::kOccupationAbove:
      return std::min(time_above(path, level), cap);
    case Kind::kRunningMax: {
      const auto v = path.values();
      return std::min(*std::max_element(v.begin(), v.end()), cap);
    }
    case Kind::kIndicator:
      break;
  }
  return 1.0;
}

double bridge_log_weight(int level, double t0_prime, double integral_sq) noexcept {
  const double n = level;
  return 0.5 * (n * n + t0_prime - integral_sq);
}

BridgeSample sample_reversed_bridge(RngStream& stream, int level, double step, const StopPolicy& policy) {
  require(level >= 2, "sample_reversed_bridge: N must be at least 2");
  require(step > 0, "sample_reversed_bridge: step must be positive");
  StoppedSegment seg = simulate_bessel3_complement_stopped(stream, level, step, policy);
  if (seg.hit != BarrierHit::kLowerBarrier) {
    fail(ErrorCode::kHorizonExpired, "sample_reversed_bridge: X' did not reach 0 within the horizon cap");
  }
  BridgeSample out{reversed_last_excursion(seg, 1.0), seg.stop_time_refined, 0.0, 0.0, 0.0};
  out.integral_sq = path_integral_square(seg.path, out.t0_prime);
  out.log_weight = bridge_log_weight(level, out.t0_prime, out.integral_sq);
  out.xi_prime = out.excursion.origin_time;
  return out;
}

ContinuousPath snapped_excursion(const BridgeSample& sample) {
  const ContinuousPath& seg = sample.excursion.segment;
  std::vector<double> values(seg.values().begin(), seg.values().end());
  values.front() = sample.excursion.level;
  return ContinuousPath(seg.step(), 1, std::move(values));
}

std::vector<EstimatorReport> estimate_conditional(const OuQuery& query,
                                                  const std::vector<PathFunctional>& functionals,
                                                  std::vector<SampleRecord>* dump) {
  check_query(query);
  require(!functionals.empty(), "estimate_conditional: no functionals");
  struct Draw {
    SampleRecord record;
    std::vector<double> payoffs;
  };
  const std::uint64_t master = derive_seed(query.seed, kImportanceTag);
  const auto draws = map_replicas<Draw>(query.replicas, query.workers, [&](std::size_t i) {
    RngStream stream(master, i);
    const BridgeSample s = sample_reversed_bridge(stream, query.level, query.step, query.policy);
    const ContinuousPath path = snapped_excursion(s);
    Draw d{{i, s.t0_prime, s.integral_sq, s.log_weight, 0.0}, {}};
    for (const PathFunctional& f : functionals) {
      d.payoffs.push_back(f.eval(path, s.xi_prime));
    }
    d.record.payoff = d.payoffs.front();
    return d;
  });

  double time_units = 0.0;
  double max_log = -std::numeric_limits<double>::infinity();
  for (const Draw& d : draws) {
    time_units += d.record.t0_prime;
    max_log = std::max(max_log, d.record.log_weight);
  }
  stats::RunningMoments weights;
  for (const Draw& d : draws) {
    weights.add(std::exp(d.record.log_weight - max_log));
  }
  const double scale = std::exp(max_log);

  std::vector<EstimatorReport> reports;
  std::vector<WeightedSample> samples(draws.size());
  for (std::size_t f = 0; f < functionals.size(); ++f) {
    for (std::size_t i = 0; i < draws.size(); ++i) {
      samples[i] = {draws[i].payoffs[f], draws[i].record.log_weight, draws[i].record.replica_id};
    }
    EstimatorReport report = importance_estimate(samples, true);
    report.extras["mean_weight"] = scale * weights.mean();
    report.extras["mean_weight_stderr"] = scale * weights.stderr_of_mean();
    report.extras["mean_t0_prime"] = time_units / static_cast<double>(draws.size());
    report.extras["time_units"] = time_units;
    reports.push_back(std::move(report));
  }
  if (dump != nullptr) {
    dump->clear();
    for (const Draw& d : draws) {
      dump->push_back(d.record);
    }
  }
  return reports;
}

EstimatorReport estimate_conditional(const OuQuery& query, std::vector<SampleRecord>* dump) {
  return estimate_conditional(query, std::vector<PathFunctional>{query.functional}, dump).front();
}

std::vector<EstimatorReport> oracle_rejection(const OuQuery& query,
                                              const std::vector<PathFunctional>& functionals) {
  check_query(query);
  require(!functionals.empty(), "oracle_rejection: no functionals");
  struct Attempt {
    bool accepted = false;
    double time = 0.0;
    std::vector<double> payoffs;
  };
  const double n = query.level;
  const std::uint64_t master = derive_seed(query.seed, kRejectionTag);
  const auto attempts = map_replicas<Attempt>(query.replicas, query.workers, [&](std::size_t i) {
    RngStream stream(master, i);
    StoppedSegment seg = simulate_ou_stopped(stream, 1.0, query.step, 0.0, n, query.policy);
    if (seg.hit == BarrierHit::kHorizonExpired) {
      fail(ErrorCode::kHorizonExpired, "oracle_rejection: OU path left neither barrier");
    }
    Attempt a{seg.hit == BarrierHit::kUpperBarrier, seg.stop_time_refined, {}};
    if (a.accepted) {
      std::vector<double> values(seg.path.values().begin(), seg.path.values().end());
      values.back() = n;
      const ContinuousPath path(query.step, 1, std::move(values));
      for (const PathFunctional& f : functionals) {
        a.payoffs.push_back(f.eval(path, seg.stop_time_refined));
      }
    }
    return a;
  });

  std::vector<stats::RunningMoments> payoff(functionals.size());
  double time_units = 0.0;
  for (const Attempt& a : attempts) {
    time_units += a.time;
    for (std::size_t f = 0; f < a.payoffs.size(); ++f) {
      payoff[f].add(a.payoffs[f]);
    }
  }
  const std::size_t accepted = payoff.front().count();
  if (accepted == 0) {
    fail(ErrorCode::kEstimateUndefined, "oracle_rejection: no path reached N before 0 in " +
                                            std::to_string(query.replicas) + " attempts");
  }
  const double total = static_cast<double>(attempts.size());
  const double rate = static_cast<double>(accepted) / total;
  const double quadrature = ou_scale_ratio(1.0, n);

  std::vector<EstimatorReport> reports;
  for (const stats::RunningMoments& m : payoff) {
    EstimatorReport report;
    report.estimate = m.mean();
    report.std_error = m.stderr_of_mean();
    report.ess = static_cast<double>(accepted);
    report.n_samples = accepted;
    report.extras["acceptance_rate"] = rate;
    report.extras["acceptance_stderr"] = std::sqrt(rate * (1.0 - rate) / total);
    report.extras["accepted"] = static_cast<double>(accepted);
    report.extras["attempts"] = total;
    report.extras["time_units"] = time_units;
    report.extras["mean_attempt_cost"] = time_units / total;
    if (quadrature < 1e-4) {
      report.warnings.push_back("acceptance probability s(1)/s(N) = " + csv::format_real(quadrature) +
                                " is below 1e-4");
    }
    reports.push_back(std::move(report));
  }
  return reports;
}

EstimatorReport oracle_rejection(const OuQuery& query) {
  return oracle_rejection(query, std::vector<PathFunctional>{query.functional}).front();
}

ScalingReport scaling_report(const std::vector<int>& levels, double step, std::size_t replicas,
                             std::uint64_t seed, unsigned workers, std::size_t min_accepts) {
  require(!levels.empty(), "scaling_report: no levels");
  require(replicas >= 2, "scaling_report: need at least 2 replicas");
  ScalingReport out;
  for (int level : levels) {
    require(level >= 2, "scaling_report: every N must be at least 2");
    OuQuery q;
    q.level = level;
    q.replicas = replicas;
    q.step = step;
    q.seed = derive_seed(seed, static_cast<std::uint64_t>(level));
    q.workers = workers;
    const EstimatorReport is = estimate_conditional(q);

    ScalingRow row;
    row.level = level;
    row.ess_fraction = is.ess / static_cast<double>(replicas);
    row.is_cost = is.extras.at("mean_t0_prime") / row.ess_fraction;

    q.policy.monitoring = Monitoring::kBrownianBridge;
    double attempt_cost = 0.0;
    double accepted = 0.0;
    try {
      const EstimatorReport rej = oracle_rejection(q);
      attempt_cost = rej.extras.at("mean_attempt_cost");
      accepted = rej.extras.at("accepted");
      row.acceptance = rej.extras.at("acceptance_rate");
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kEstimateUndefined) {
        throw;
      }
    }
    if (accepted < static_cast<double>(min_accepts) || attempt_cost == 0.0) {
      row.acceptance = ou_scale_ratio(1.0, level);
      row.acceptance_from_quadrature = true;
      if (attempt_cost == 0.0) {
        // Every attempt failed; the rejection helper threw before costing.
        stats::RunningMoments cost;
        const std::uint64_t master = derive_seed(q.seed, kRejectionTag);
        for (std::size_t i = 0; i < replicas; ++i) {
          RngStream stream(master, i);
          cost.add(simulate_ou_stopped(stream, 1.0, step, 0.0, level, q.policy).stop_time_refined);
        }
        attempt_cost = cost.mean();
      }
    }
    row.rejection_cost_per_effective = attempt_cost / row.acceptance;
    row.ratio = row.rejection_cost_per_effective / row.is_cost;
    out.rows.push_back(row);
  }

  auto slope = [&](auto cost_of) {
    if (out.rows.size() < 2) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(out.rows.size());
    for (const ScalingRow& r : out.rows) {
      const double x = std::log(static_cast<double>(r.level));
      const double y = std::log(cost_of(r));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };
  out.is_exponent = slope([](const ScalingRow& r) { return r.is_cost; });
  out.rejection_exponent = slope([](const ScalingRow& r) { return r.rejection_cost_per_effective; });
  return out;
}

void write_report_csv(std::ostream& out, const EstimatorReport& report,
                      const std::vector<std::pair<std::string, std::string>>& context) {
  csv::write_row(out, {"field", "value"});
  csv::write_row(out, {"estimate", csv::format_real(report.estimate)});
  csv::write_row(out, {"stderr", csv::format_real(report.std_error)});
  csv::write_row(out, {"ess", csv::format_real(report.ess)});
  csv::write_row(out, {"replicas", csv::format_int(static_cast<long long>(report.n_samples))});
  for (const auto& [key, value] : context) {
    csv::write_row(out, {key, value});
  }
  for (const auto& [key, value] : report.extras) {
    csv::write_row(out, {key, csv::format_real(value)});
  }
}

void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& records) {
  csv::write_row(out, {"replica_id", "t0_prime", "integral_sq", "log_weight", "payoff"});
  for (const SampleRecord& r : records) {
    csv::write_row(out, {csv::format_int(static_cast<long long>(r.replica_id)), csv::format_real(r.t0_prime),
                         csv::format_real(r.integral_sq), csv::format_real(r.log_weight),
                         csv::format_real(r.payoff)});
  }
}

void write_scaling_csv(std::ostream& out, const ScalingReport& report) {
  csv::write_row(out, {"N", "is_cost", "rejection_cost_per_effective", "ratio", "acceptance",
                       "acceptance_from_quadrature"});
  for (const ScalingRow& r : report.rows) {
    csv::write_row(out, {csv::format_int(r.level), csv::format_real(r.is_cost),
                         csv::format_real(r.rejection_cost_per_effective), csv::format_real(r.ratio),
                         csv::format_real(r.acceptance), r.acceptance_from_quadrature ? "1" : "0"});
  }
}

}  // namespace rarepath::ou
