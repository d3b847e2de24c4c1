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

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "rarepath/chain.hpp"
#include "rarepath/cli.hpp"
#include "rarepath/csv.hpp"
#include "rarepath/diagnostics.hpp"
#include "rarepath/error.hpp"
#include "rarepath/jumps.hpp"
#include "rarepath/measure.hpp"
#include "rarepath/ou_rare_event.hpp"
#include "rarepath/parallel.hpp"
#include "rarepath/paths.hpp"
#include "rarepath/stats.hpp"

namespace rarepath::cli {
namespace {

constexpr std::uint64_t kJumpTag = 0x6a75;
constexpr std::uint64_t kMeasureTag = 0x6d65;
constexpr std::uint64_t kChainTag = 0xc4a1;

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  CommonOptions common;
  std::function<void(Command&, std::ostream&, std::ostream&)> run;
};

Monitoring parse_monitoring(const std::string& text) {
  if (text == "grid") {
    return Monitoring::kGrid;
  }
  if (text == "bridge") {
    return Monitoring::kBrownianBridge;
  }
  fail(ErrorCode::kConfig, "--monitoring must be grid or bridge");
}

// Evaluates `f` on every replica and reduces in replica order.
stats::RunningMoments replica_moments(std::size_t replicas, unsigned workers,
                                      const std::function<double(std::size_t)>& f) {
  const auto values = map_replicas<double>(replicas, workers, f);
  stats::RunningMoments m;
  for (double v : values) {
    m.add(v);
  }
  return m;
}

void write_pairs(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
  csv::write_row(out, {"field", "value"});
  for (const auto& [k, v] : rows) {
    csv::write_row(out, {k, v});
  }
}

// ---------------------------------------------------------------------------

struct OuParams {
  int level = 2;
  std::string functional = "capped-duration:50";
  std::string monitoring;
  std::string samples;
};

void add_ou_options(CLI::App& app, OuParams& p, const std::string& monitoring_default) {
  p.monitoring = monitoring_default;
  app.add_option("--N", p.level, "Upper level N >= 2 (the process starts at 1, lower barrier 0)")
      ->capture_default_str();
  app.add_option("--functional", p.functional,
                 "indicator | capped-duration:CAP | occupation-above:LEVEL:CAP | running-max:CAP")
      ->capture_default_str();
  app.add_option("--monitoring", p.monitoring, "Barrier monitoring between grid points: grid or bridge")
      ->capture_default_str();
}

ou::OuQuery make_query(const CommonOptions& c, const OuParams& p) {
  if (p.level < 2) {
    fail(ErrorCode::kConfig, "--N must be at least 2");
  }
  ou::OuQuery q;
  q.level = p.level;
  q.functional = ou::PathFunctional::parse(p.functional);
  q.replicas = c.replicas;
  q.step = c.step;
  q.seed = *c.seed;
  q.workers = c.workers;
  q.policy.monitoring = parse_monitoring(p.monitoring);
  return q;
}

std::vector<std::pair<std::string, std::string>> ou_context(const ou::OuQuery& q, const std::string& monitoring) {
  return {{"step", csv::format_real(q.step)},
          {"seed", std::to_string(q.seed)},
          {"N", csv::format_int(q.level)},
          {"functional", q.functional.name()},
          {"monitoring", monitoring}};
}

void register_ou_estimate(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds) {
  auto cmd = std::make_unique<Command>();
  auto params = std::make_shared<OuParams>();
  cmd->name = "ou-estimate";
  cmd->app = root.add_subcommand(
      cmd->name,
      "Importance-sampling estimate of E[f(X) | X reaches N before 0] for dX = -X dt + dB, "
      "X(0) = 1. Exercises the time-reversal change of measure: X' = N - |B| (B a 3-d Brownian "
      "motion) is run to its first zero T0', reversed at its last visit of 1, and weighted by "
      "exp((N^2 + T0' - int X'^2) / 2); the weights are self-normalized.");
  add_common_options(*cmd->app, cmd->common, {10000, 1e-3});
  add_ou_options(*cmd->app, *params, "grid");
  cmd->app->add_option("--samples", params->samples,
                       "Optional per-sample CSV (replica_id, t0_prime, integral_sq, log_weight, payoff)");
  cmd->run = [params](Command& self, std::ostream& out, std::ostream&) {
    const ou::OuQuery q = make_query(self.common, *params);
    std::vector<ou::SampleRecord> records;
    const EstimatorReport r = ou::estimate_conditional(q, params->samples.empty() ? nullptr : &records);
    const auto path = output_path(self.common, self.name);
    auto file = open_output(path);
    ou::write_report_csv(file, r, ou_context(q, params->monitoring));
    if (!params->samples.empty()) {
      CommonOptions dump = self.common;
      dump.output = params->samples;
      auto samples = open_output(output_path(dump, self.name + "-samples"));
      ou::write_samples_csv(samples, records);
    }
    out << "ou-estimate N=" << q.level << " functional=" << q.functional.name()
        << " estimate=" << csv::format_real(r.estimate) << " stderr=" << csv::format_real(r.std_error)
        << " ess=" << csv::format_real(r.ess) << " report=" << path.string() << '\n';
  };
  cmds.push_back(std::move(cmd));
}

void register_ou_oracle(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds) {
  auto cmd = std::make_unique<Command>();
  auto params = std::make_shared<OuParams>();
  cmd->name = "ou-oracle";
  cmd->app = root.add_subcommand(
      cmd->name,
      "Brute-force reference for ou-estimate: Euler paths of the OU process from 1, kept when "
      "they reach N before 0. Reports the plain conditional mean and the acceptance rate, whose "
      "exact value is s(1)/s(N) with s(y) = int_0^y exp(u^2) du.");
  add_common_options(*cmd->app, cmd->common, {100000, 1e-3});
  add_ou_options(*cmd->app, *params, "bridge");
  cmd->run = [params](Command& self, std::ostream& out, std::ostream& err) {
    const ou::OuQuery q = make_query(self.common, *params);
    const EstimatorReport r = ou::oracle_rejection(q);
    for (const std::string& w : r.warnings) {
      err << "rarepath: warning " << w << '\n';
    }
    auto context = ou_context(q, params->monitoring);
    context.emplace_back("quadrature_acceptance", csv::format_real(ou_scale_ratio(1.0, q.level)));
    const auto path = output_path(self.common, self.name);
    auto file = open_output(path);
    ou::write_report_csv(file, r, context);
    out << "ou-oracle N=" << q.level << " functional=" << q.functional.name()
        << " estimate=" << csv::format_real(r.estimate) << " stderr=" << csv::format_real(r.std_error)
        << " acceptance=" << csv::format_real(r.extras.at("acceptance_rate"))
        << " report=" << path.string() << '\n';
  };
  cmds.push_back(std::move(cmd));
}

void register_ou_scaling(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds) {
  struct Params {
    std::string levels = "2,3,4,6,8";
    std::size_t min_accepts = 20;
  };
  auto cmd = std::make_unique<Command>();
  auto params = std::make_shared<Params>();
  cmd->name = "ou-scaling";
  cmd->app = root.add_subcommand(
      cmd->name,
      "Simulated time per effective sample for the importance sampler and for rejection as N "
      "grows, with fitted log-log slopes. The slopes are recorded, not asserted. Rejection falls "
      "back to the quadrature acceptance s(1)/s(N) when too few paths are accepted.");
  add_common_options(*cmd->app, cmd->common, {2000, 1e-3});
  cmd->app->add_option("--levels", params->levels, "Comma-separated N values")->capture_default_str();
  cmd->app->add_option("--min-accepts", params->min_accepts,
                       "Accepted paths needed before the empirical acceptance is trusted")
      ->capture_default_str();
  cmd->run = [params](Command& self, std::ostream& out, std::ostream&) {
    const auto levels = parse_int_list(params->levels, "--levels");
    for (int n : levels) {
      if (n < 2) {
        fail(ErrorCode::kConfig, "--levels: every N must be at least 2");
      }
    }
    if (self.common.replicas < 2) {
      fail(ErrorCode::kConfig, "--replicas must be at least 2");
    }
    const auto report = ou::scaling_report(levels, self.common.step, self.common.replicas, *self.common.seed,
                                           self.common.workers, params->min_accepts);
    const auto path = output_path(self.common, self.name);
    auto file = open_output(path);
    ou::write_scaling_csv(file, report);
    for (const auto& row : report.rows) {
      out << "N=" << row.level << " is_cost=" << csv::format_real(row.is_cost)
          << " rejection_cost_per_effective=" << csv::format_real(row.rejection_cost_per_effective)
          << " ratio=" << csv::format_real(row.ratio) << '\n';
    }
    out << "fitted exponents: is=" << csv::format_real(report.is_exponent)
        << " rejection=" << csv::format_real(report.rejection_exponent) << " report=" << path.string()
        << '\n';
  };
  cmds.push_back(std::move(cmd));
}

// ---------------------------------------------------------------------------

IntensityFn parse_intensity(const std::string& text) {
  // affine:A:B  ->  g(y) = A + B |y|
  std::vector<std::string> parts;
  std::stringstream in(text);
  for (std::string part; std::getline(in, part, ':');) {
    parts.push_back(part);
  }
  if (parts.size() != 3 || parts[0] != "affine") {
    fail(ErrorCode::kConfig, "--intensity must be affine:A:B (g(y) = A + B|y|)");
  }
  const auto ab = parse_real_list(parts[1] + "," + parts[2], "--intensity");
  const double a = ab[0];
  const double b = ab[1];
  return IntensityFn::state_dependent([a, b](std::span<const double> y) {
    double norm = 0.0;
    for (double v : y) {
      norm += v * v;
    }
    return a + b * std::sqrt(norm);
  });
}

MarkDistribution parse_mark(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  std::string list = rest;
  std::replace(list.begin(), list.end(), ':', ',');
  try {
    if (kind == "point" && !rest.empty()) {
      const auto v = parse_real_list(list, "--mark");
      if (v.size() == 1) {
        return MarkDistribution::point_mass({v[0]});
      }
    }
    if (kind == "gaussian" && !rest.empty()) {
      const auto v = parse_real_list(list, "--mark");
      if (v.size() == 2) {
        return MarkDistribution::gaussian_shifted({v[0]}, v[1]);
      }
    }
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  fail(ErrorCode::kConfig, "--mark must be point:M or gaussian:MEAN:SD");
}

void register_cpp_simulate(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds) {
  struct Params {
    std::string method = "time-change";
    std::string intensity = "affine:1:1";
    std::string mark = "point:1";
    double x0 = 0.0;
    double horizon = 1.0;
    double bound = 60.0;
    std::string path_dump;
  };
  auto cmd = std::make_unique<Command>();
  auto params = std::make_shared<Params>();
  cmd->name = "cpp-simulate";
  cmd->app = root.add_subcommand(
      cmd->name,
      "Compound Poisson process with state-dependent intensity g, built either by the random "
      "time change X(t) = J(Gamma^{-1}(t)) of a unit-rate process J, Gamma(u) = int_0^u ds / g(J(s)), "
      "or by thinning a Poisson stream of rate --bound. Both constructions give the same law.");
  add_common_options(*cmd->app, cmd->common, {10000, 1e-3});
  cmd->app->add_option("--method", params->method, "time-change or thinning")->capture_default_str();
  cmd->app->add_option("--intensity", params->intensity, "affine:A:B for g(y) = A + B|y|")->capture_default_str();
  cmd->app->add_option("--mark", params->mark, "point:M or gaussian:MEAN:SD")->capture_default_str();
  cmd->app->add_option("--x0", params->x0, "Initial state")->capture_default_str();
  cmd->app->add_option("--horizon", params->horizon, "Final time")->capture_default_str();
  cmd->app->add_option("--bound", params->bound, "Thinning rate; exceeding it is an error")->capture_default_str();
  cmd->app->add_option("--path-dump", params->path_dump, "Optional CSV of the jumps of replica 0");
  cmd->run = [params](Command& self, std::ostream& out, std::ostream&) {
    if (params->method != "time-change" && params->method != "thinning") {
      fail(ErrorCode::kConfig, "--method must be time-change or thinning");
    }
    if (!(params->horizon > 0)) {
      fail(ErrorCode::kConfig, "--horizon must be positive");
    }
    const IntensityFn g = parse_intensity(params->intensity);
    const MarkDistribution marks = parse_mark(params->mark);
    const bool thinning = params->method == "thinning";
    const std::uint64_t master = derive_seed(*self.common.seed, kJumpTag);
    auto simulate = [&](std::size_t i) {
      RngStream stream(master, i);
      return thinning ? simulate_cpp_thinning(stream, g, params->bound, marks, {params->x0}, params->horizon)
                      : simulate_cpp_time_change(stream, g, marks, {params->x0}, params->horizon);
    };
    struct Row {
      std::size_t jumps = 0;
      double final_state = 0.0;
    };
    const auto rows = map_replicas<Row>(self.common.replicas, self.common.workers, [&](std::size_t i) {
      const JumpPath p = simulate(i);
      return Row{p.jumps(), p.state_after(p.jumps())[0]};
    });
    const auto path = output_path(self.common, self.name);
    auto file = open_output(path);
    csv::write_row(file, {"replica_id", "jumps", "final_state"});
    stats::RunningMoments count;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      csv::write_row(file, {csv::format_int(static_cast<long long>(i)),
                            csv::format_int(static_cast<long long>(rows[i].jumps)),
                            csv::format_real(rows[i].final_state)});
      count.add(static_cast<double>(rows[i].jumps));
    }
    if (!params->path_dump.empty()) {
      CommonOptions dump = self.common;
      dump.output = params->path_dump;
      auto f = open_output(output_path(dump, self.name + "-path"));
      write_jump_path_csv(f, simulate(0));
    }
    out << "cpp-simulate method=" << params->method << " mean_jumps=" << csv::format_real(count.mean())
        << " stderr=" << csv::format_real(count.stderr_of_mean()) << " report=" << path.string() << '\n';
  };
  cmds.push_back(std::move(cmd));
}

// ---------------------------------------------------------------------------

void register_measure_check(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds) {
  struct Params {
    std::string density = "continuous";
    double mu = 1.0;
    double u = 0.5;
    double g1 = 1.0;
    double g2 = 2.0;
    std::string mode = "bremaud";
    double t = 1.0;
  };
  auto cmd = std::make_unique<Command>();
  auto params = std::make_shared<Params>();
  cmd->name = "measure-check";
  cmd->app = root.add_subcommand(
      cmd->name,
      "Monte Carlo mean of a candidate density process M(t); a density of a change of measure "
      "has mean 1. continuous: exp(mu W(t) - mu^2 t / 2). counting: exp(-u N(t) - (e^-u - 1) t) "
      "for a unit Poisson N. cpp: intensity change g1 -> g2 of a counting process, in bremaud or "
      "literal form.");
  add_common_options(*cmd->app, cmd->common, {100000, 1.0 / 64.0});
  cmd->app->add_option("--density", params->density, "continuous, counting or cpp")->capture_default_str();
  cmd->app->add_option("--mu", params->mu, "Constant drift (continuous)")->capture_default_str();
  cmd->app->add_option("--u", params->u, "Constant exponent u (counting)")->capture_default_str();
  cmd->app->add_option("--g1", params->g1, "Reference intensity (cpp)")->capture_default_str();
  cmd->app->add_option("--g2", params->g2, "Target intensity (cpp)")->capture_default_str();
  cmd->app->add_option("--mode", params->mode, "bremaud or literal (cpp)")->capture_default_str();
  cmd->app->add_option("--t", params->t, "Evaluation time")->capture_default_str();
  cmd->run = [params](Command& self, std::ostream& out, std::ostream&) {
    const Params& p = *params;
    if (!(p.t > 0)) {
      fail(ErrorCode::kConfig, "--t must be positive");
    }
    if (p.mode != "bremaud" && p.mode != "literal") {
      fail(ErrorCode::kConfig, "--mode must be bremaud or literal");
    }
    const std::uint64_t master = derive_seed(*self.common.seed, kMeasureTag);
    const CommonOptions& c = self.common;
    std::function<double(std::size_t)> sample;
    if (p.density == "continuous") {
      sample = [&](std::size_t i) {
        RngStream stream(master, i);
        const ContinuousPath w = simulate_bm(stream, 1, c.step, p.t);
        const ContinuousPath mu(c.step, 1, std::vector<double>(w.size(), p.mu));
        return std::exp(continuous_exponential(w, mu).log_m());
      };
    } else if (p.density == "counting") {
      const IntensityFn unit = IntensityFn::state_dependent([](std::span<const double>) { return 1.0; });
      const MarkDistribution one = MarkDistribution::point_mass({1.0});
      const Compensator a{[](double s) { return s; }, [](double) { return 1.0; }};
      sample = [&, unit, one, a](std::size_t i) {
        RngStream stream(master, i);
        const JumpPath n = simulate_cpp_time_change(stream, unit, one, {0.0}, p.t);
        const double u = p.u;
        return std::exp(
            counting_density(n, a, [u](double) { return u; }, std::abs(u), p.t).log_m());
      };
    } else if (p.density == "cpp") {
      if (!(p.g1 > 0) || !(p.g2 > 0)) {
        fail(ErrorCode::kConfig, "--g1 and --g2 must be positive");
      }
      const double g1v = p.g1;
      const double g2v = p.g2;
      const IntensityFn g1 = IntensityFn::state_dependent([g1v](std::span<const double>) { return g1v; });
      const IntensityFn g2 = IntensityFn::state_dependent([g2v](std::span<const double>) { return g2v; });
      const MarkDistribution one = MarkDistribution::point_mass({1.0});
      const DensityMode mode = p.mode == "bremaud" ? DensityMode::kBremaud : DensityMode::kLiteral;
      sample = [&, g1, g2, one, mode](std::size_t i) {
        RngStream stream(master, i);
        const JumpPath x = simulate_cpp_time_change(stream, g1, one, {0.0}, p.t);
        return std::exp(cpp_intensity_density(x, g1, g2, p.t, mode).log_m());
      };
    } else {
      fail(ErrorCode::kConfig, "--density must be continuous, counting or cpp");
    }
    const stats::RunningMoments m = replica_moments(c.replicas, c.workers, sample);
    const double se = m.stderr_of_mean();
    const double z = se > 0 ? (m.mean() - 1.0) / se : 0.0;
    const auto path = output_path(c, self.name);
    auto file = open_output(path);
    write_pairs(file, {{"density", p.density},
                       {"mode", p.density == "cpp" ? p.mode : "-"},
                       {"t", csv::format_real(p.t)},
                       {"mean", csv::format_real(m.mean())},
                       {"stderr", csv::format_real(se)},
                       {"z_vs_unity", csv::format_real(z)},
                       {"replicas", csv::format_int(static_cast<long long>(m.count()))},
                       {"step", csv::format_real(c.step)},
                       {"seed", std::to_string(*c.seed)}});
    out << "measure-check density=" << p.density << " mean=" << csv::format_real(m.mean())
        << " stderr=" << csv::format_real(se) << " z=" << csv::format_real(z) << " report=" << path.string()
        << '\n';
  };
  cmds.push_back(std::move(cmd));
}

// ---------------------------------------------------------------------------

void register_tightness(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds) {
  struct Params {
    std::string family = "inverse-bessel";
    std::string drift = "bounded-sine:3";
    std::size_t dim = 1;
    std::string t = "1";
    std::string kappas = "2,4,8,16";
    std::string n_grid = "16,32,64,128";
    double threshold = 0.05;
    bool stop_at_level = false;
    std::string report = "tail";
  };
  auto cmd = std::make_unique<Command>();
  auto params = std::make_shared<Params>();
  cmd->name = "tightness";
  cmd->app = root.add_subcommand(
      cmd->name,
      "Tail profile Q_n(M_n(t) >= kappa) = E[M_n(t) 1{M_n(t) >= kappa}] of an approximating "
      "family M_n of a nonnegative local martingale M. M is a true martingale exactly when these "
      "tails are tight in n; the verdict is a statistical reading of that criterion. "
      "--report stopped gives E[M_n(t) 1{tau_n <= t}], --report unity gives E[M_n(t)].");
  add_common_options(*cmd->app, cmd->common, {20000, 1.0 / 64.0});
  cmd->app->add_option("--family", params->family, "unit, benes or inverse-bessel")->capture_default_str();
  cmd->app->add_option("--drift", params->drift, "benes drift: constant:C, bounded-sine:C or running-max:C")
      ->capture_default_str();
  cmd->app->add_option("--dim", params->dim, "benes dimension")->capture_default_str();
  cmd->app->add_option("--t", params->t, "Comma-separated evaluation times (on the step grid)")
      ->capture_default_str();
  cmd->app->add_option("--kappas", params->kappas, "Comma-separated increasing kappa grid")->capture_default_str();
  cmd->app->add_option("--n-grid", params->n_grid, "Comma-separated family members")->capture_default_str();
  cmd->app->add_option("--threshold", params->threshold, "Tail level separating the verdicts")
      ->capture_default_str();
  cmd->app->add_flag("--stop-at-level", params->stop_at_level, "benes: stop M_n when it first reaches n");
  cmd->app->add_option("--report", params->report, "tail, stopped or unity")->capture_default_str();
  cmd->run = [params](Command& self, std::ostream& out, std::ostream&) {
    const Params& p = *params;
    const auto ts = parse_real_list(p.t, "--t");
    const auto ns = parse_int_list(p.n_grid, "--n-grid");
    diag::MartingaleFamily family;
    if (p.family == "inverse-bessel") {
      family = diag::inverse_bessel_family(ns, ts, self.common.step);
    } else if (p.family == "benes") {
      if (p.dim < 1) {
        fail(ErrorCode::kConfig, "--dim must be at least 1");
      }
      family = diag::benes_truncation_family(diag::Drift::parse(p.drift), self.common.step, p.dim, ns, ts,
                                             p.stop_at_level);
    } else if (p.family == "unit") {
      family = diag::unit_family(ns, ts);
    } else {
      fail(ErrorCode::kConfig, "--family must be unit, benes or inverse-bessel");
    }
    const diag::RunSettings run{self.common.replicas, *self.common.seed, self.common.workers};
    const auto path = output_path(self.common, self.name);
    if (p.report == "tail") {
      const auto kappas = parse_real_list(p.kappas, "--kappas");
      const auto profile = diag::q_tail_profile(family, kappas, run, {p.threshold, 2.0, 3.0});
      auto file = open_output(path);
      diag::write_profile_csv(file, profile);
      out << diag::verdict_line(profile) << " report=" << path.string() << '\n';
    } else if (p.report == "stopped" || p.report == "unity") {
      const auto grid = p.report == "stopped" ? diag::stopped_tail(family, run) : diag::unity_check(family, run);
      auto file = open_output(path);
      diag::write_grid_csv(file, grid);
      for (const auto& e : grid) {
        out << "n=" << e.n << " t=" << csv::format_real(e.t) << " estimate=" << csv::format_real(e.estimate.value)
            << " stderr=" << csv::format_real(e.estimate.std_error) << '\n';
      }
      out << "report=" << path.string() << '\n';
    } else {
      fail(ErrorCode::kConfig, "--report must be tail, stopped or unity");
    }
  };
  cmds.push_back(std::move(cmd));
}

// ---------------------------------------------------------------------------

void register_chain_demo(CLI::App& root, std::vector<std::unique_ptr<Command>>& cmds) {
  struct Params {
    int n = 4;
    int level = 2;
  };
  auto cmd = std::make_unique<Command>();
  auto params = std::make_shared<Params>();
  cmd->name = "chain-demo";
  cmd->app = root.add_subcommand(
      cmd->name,
      "Lattice version of ou-estimate. The OU birth-death chain on the 2^-n lattice is sampled "
      "through the symmetric walk from N conditioned (Doob h-transform, h(y) = (N - y)/N) to hit 0 "
      "before returning to N; each path is reversed at its last visit of 1 and weighted by the "
      "likelihood ratio prod (1 - q_{k-1} J_k). Writes one row per replica.");
  add_common_options(*cmd->app, cmd->common, {10000, 1e-3});
  cmd->app->add_option("--n", params->n, "Lattice refinement (delta = 2^-n)")->capture_default_str();
  cmd->app->add_option("--N", params->level, "Level N >= 2")->capture_default_str();
  cmd->run = [params](Command& self, std::ostream& out, std::ostream&) {
    if (params->n < 1 || params->n > 12) {
      fail(ErrorCode::kConfig, "--n must lie in [1, 12]");
    }
    if (params->level < 2) {
      fail(ErrorCode::kConfig, "--N must be at least 2");
    }
    const chain::LatticeSpec spec(params->n);
    const chain::BirthDeathKernel kernel = chain::h_transform_kernel(spec, params->level);
    const chain::State top = spec.index_of(params->level);
    const chain::State one = spec.index_of(1);
    const std::uint64_t master = derive_seed(*self.common.seed, kChainTag);
    struct Row {
      std::size_t steps = 0;
      double duration = 0.0;
      double log_product = 0.0;
      double log_exponent = 0.0;
    };
    const auto rows = map_replicas<Row>(self.common.replicas, self.common.workers, [&](std::size_t i) {
      RngStream stream(master, i);
      const chain::ChainPath path = chain::simulate_chain(kernel, top, nullptr, stream);
      std::size_t last_one = 0;
      for (std::size_t k = 0; k < path.states.size(); ++k) {
        if (path.states[k] == one) {
          last_one = k;
        }
      }
      return Row{path.steps(), static_cast<double>(last_one) * spec.time_step,
                 chain::discrete_weight(path, spec, chain::WeightForm::kProduct).log_weight,
                 chain::discrete_weight(path, spec, chain::WeightForm::kExponent).log_weight};
    });
    std::vector<WeightedSample> samples;
    const auto path = output_path(self.common, self.name);
    auto file = open_output(path);
    csv::write_row(file, {"replica_id", "steps", "duration", "log_weight_product", "log_weight_exponent"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const Row& r = rows[i];
      csv::write_row(file, {csv::format_int(static_cast<long long>(i)), csv::format_int(static_cast<long long>(r.steps)),
                            csv::format_real(r.duration), csv::format_real(r.log_product),
                            csv::format_real(r.log_exponent)});
      samples.push_back({r.duration, r.log_product, i});
    }
    const EstimatorReport est = importance_estimate(samples, true);
    out << "chain-demo n=" << params->n << " N=" << params->level
        << " conditional_duration=" << csv::format_real(est.estimate)
        << " stderr=" << csv::format_real(est.std_error) << " ess=" << csv::format_real(est.ess)
        << " report=" << path.string() << '\n';
  };
  cmds.push_back(std::move(cmd));
}

std::string one_line(std::string text) {
  for (char& ch : text) {
    if (ch == '\n' || ch == '\r') {
      ch = ' ';
    }
  }
  return text;
}

int report_error(std::ostream& err, std::string_view code, const std::string& reason, int status) {
  err << "rarepath: error code=" << code << " reason=" << one_line(reason) << '\n';
  return status;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("rarepath: rare-event path simulation and change-of-measure diagnostics", "rarepath");
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> cmds;
  register_ou_estimate(app, cmds);
  register_ou_oracle(app, cmds);
  register_ou_scaling(app, cmds);
  register_cpp_simulate(app, cmds);
  register_measure_check(app, cmds);
  register_tightness(app, cmds);
  register_chain_demo(app, cmds);

  try {
    const std::vector<std::string> expanded = expand_config(app, args);
    std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);
    }
    return report_error(err, to_string(ErrorCode::kConfig), e.what(), kExitConfig);
  } catch (const Error& e) {
    return report_error(err, to_string(e.code()), e.what(), kExitConfig);
  }

  for (auto& cmd : cmds) {
    if (!cmd->app->parsed()) {
      continue;
    }
    try {
      finalize_common(cmd->common);
      cmd->run(*cmd, out, err);
      return kExitOk;
    } catch (const Error& e) {
      const bool config = e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kInvalidArgument;
      return report_error(err, to_string(e.code()), e.what(), config ? kExitConfig : kExitRuntime);
    } catch (const std::exception& e) {
      return report_error(err, "runtime-error", e.what(), kExitRuntime);
    }
  }
  return report_error(err, to_string(ErrorCode::kConfig), "no subcommand given", kExitConfig);
}

}  // namespace rarepath::cli
