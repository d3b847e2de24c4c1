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

#include "rarepath/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rarepath/csv.hpp"
#include "rarepath/error.hpp"
#include "rarepath/parallel.hpp"
#include "rarepath/stats.hpp"

namespace rarepath::diag {
namespace {

constexpr std::uint64_t kFamilyTag = 0xd1a6;
// Replicas per accumulation chunk. Fixed so that merged moments do not
// depend on the worker count.
constexpr std::size_t kChunk = 4096;

using stats::RunningMoments;

struct CellMoments {
  RunningMoments m;
  RunningMoments stopped;
  std::vector<RunningMoments> above;  // M 1{M >= kappa}
  std::vector<RunningMoments> below;  // M 1{M < kappa}

  void merge(const CellMoments& other) {
    m.merge(other.m);
    stopped.merge(other.stopped);
    for (std::size_t j = 0; j < above.size(); ++j) {
      above[j].merge(other.above[j]);
      below[j].merge(other.below[j]);
    }
  }
};

// cells[n_index * |t| + t_index]
std::vector<CellMoments> accumulate(const MartingaleFamily& family, const std::vector<double>& kappas,
                                    const RunSettings& run) {
  require(static_cast<bool>(family.simulate), "martingale family: no simulator");
  require(!family.n_grid.empty() && !family.t_grid.empty(), "martingale family: empty n or t grid");
  require(run.replicas >= 1, "diagnostics: replicas must be at least 1");
  const std::size_t cells = family.n_grid.size() * family.t_grid.size();
  const CellMoments blank{{}, {}, std::vector<RunningMoments>(kappas.size()),
                          std::vector<RunningMoments>(kappas.size())};
  const std::uint64_t master = derive_seed(run.seed, kFamilyTag);
  const std::size_t chunks = (run.replicas + kChunk - 1) / kChunk;

  auto partial = map_replicas<std::vector<CellMoments>>(chunks, run.workers, [&](std::size_t c) {
    std::vector<CellMoments> local(cells, blank);
    const std::size_t end = std::min(run.replicas, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      for (std::size_t a = 0; a < family.n_grid.size(); ++a) {
        RngStream stream(master, i);
        const auto path = family.simulate(stream, family.n_grid[a], family.t_grid);
        for (std::size_t b = 0; b < family.t_grid.size(); ++b) {
          const Realization& r = path[b];
          CellMoments& cell = local[a * family.t_grid.size() + b];
          cell.m.add(r.m);
          cell.stopped.add(r.stopped ? r.m : 0.0);
          for (std::size_t j = 0; j < kappas.size(); ++j) {
            const bool high = r.m >= kappas[j];
            cell.above[j].add(high ? r.m : 0.0);
            cell.below[j].add(high ? 0.0 : r.m);
          }
        }
      }
    }
    return local;
  });

  std::vector<CellMoments> total(cells, blank);
  for (const auto& chunk : partial) {
    for (std::size_t k = 0; k < cells; ++k) {
      total[k].merge(chunk[k]);
    }
  }
  return total;
}

Estimate estimate_of(const RunningMoments& m) {
  return {m.mean(), m.count() > 1 ? m.stderr_of_mean() : std::numeric_limits<double>::infinity()};
}

std::size_t grid_index(double t, double step) {
  const double k = t / step;
  const double rounded = std::round(k);
  require(t >= 0 && std::abs(k - rounded) <= 1e-9 * std::max(1.0, k),
          "martingale family: t = " + csv::format_real(t) + " is not on the simulation grid");
  return static_cast<std::size_t>(rounded);
}

std::vector<std::size_t> grid_indices(const std::vector<double>& t_grid, double step) {
  std::vector<std::size_t> out;
  for (double t : t_grid) {
    out.push_back(grid_index(t, step));
  }
  require(std::is_sorted(out.begin(), out.end()), "martingale family: t grid must be increasing");
  return out;
}

double parse_coefficient(const std::string& text, std::size_t colon) {
  std::size_t used = 0;
  double c = 0.0;
  try {
    c = std::stod(text.substr(colon + 1), &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() - colon - 1) {
    fail(ErrorCode::kConfig, "drift '" + text + "': bad coefficient");
  }
  return c;
}

}  // namespace

TightnessProfile q_tail_profile(const MartingaleFamily& family, const std::vector<double>& kappas,
                                const RunSettings& run, const TightnessConfig& config) {
  require(!kappas.empty(), "q_tail_profile: empty kappa grid");
  for (std::size_t j = 0; j < kappas.size(); ++j) {
    require(kappas[j] > 0 && (j == 0 || kappas[j] > kappas[j - 1]),
            "q_tail_profile: kappas must be positive and increasing");
  }
  for (int n : family.n_grid) {
    require(n >= 1, "q_tail_profile: members must be localized (n >= 1)");
  }
  const auto cells = accumulate(family, kappas, run);
  const std::size_t nt = family.t_grid.size();

  TightnessProfile out;
  for (std::size_t b = 0; b < nt; ++b) {
    for (std::size_t a = 0; a < family.n_grid.size(); ++a) {
      const CellMoments& cell = cells[a * nt + b];
      out.means.push_back({family.n_grid[a], family.t_grid[b], 0.0, estimate_of(cell.m)});
      for (std::size_t j = 0; j < kappas.size(); ++j) {
        out.entries.push_back({family.n_grid[a], family.t_grid[b], kappas[j], estimate_of(cell.above[j])});
      }
    }
  }

  auto entry = [&](std::size_t a, std::size_t b, std::size_t j) -> const Estimate& {
    return out.entries[(b * family.n_grid.size() + a) * kappas.size() + j].tail;
  };
  const std::size_t last = kappas.size() - 1;

  bool consistent = true;
  for (std::size_t b = 0; b < nt && consistent; ++b) {
    for (std::size_t a = 0; a < family.n_grid.size(); ++a) {
      const Estimate& e = entry(a, b, last);
      if (!(e.value + config.consistent_sigmas * e.std_error < config.threshold)) {
        consistent = false;
        break;
      }
    }
  }
  if (consistent) {
    out.verdict = Verdict::kTightnessConsistent;
    return out;
  }

  std::vector<std::size_t> order(family.n_grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return family.n_grid[x] < family.n_grid[y]; });
  const std::vector<std::size_t> large(order.begin() + static_cast<std::ptrdiff_t>(order.size() / 2),
                                       order.end());
  const std::size_t first_kappa = kappas.size() >= 2 ? last - 1 : last;
  for (std::size_t b = 0; b < nt; ++b) {
    bool persists = true;
    double floor = std::numeric_limits<double>::infinity();
    for (std::size_t a : large) {
      for (std::size_t j = first_kappa; j <= last; ++j) {
        const Estimate& e = entry(a, b, j);
        persists = persists && e.value - config.violated_sigmas * e.std_error > config.threshold;
        floor = std::min(floor, e.value);
      }
    }
    if (persists) {
      out.verdict = Verdict::kTightnessViolated;
      out.violated_kappa = kappas[last];
      out.floor = floor;
      return out;
    }
  }
  out.verdict = Verdict::kInconclusive;
  return out;
}

std::vector<GridEntry> stopped_tail(const MartingaleFamily& family, const RunSettings& run) {
  require(family.has_stopping, "stopped_tail: family has no stopping rule");
  const auto cells = accumulate(family, {}, run);
  std::vector<GridEntry> out;
  for (std::size_t a = 0; a < family.n_grid.size(); ++a) {
    for (std::size_t b = 0; b < family.t_grid.size(); ++b) {
      out.push_back({family.n_grid[a], family.t_grid[b],
                     estimate_of(cells[a * family.t_grid.size() + b].stopped)});
    }
  }
  return out;
}

std::vector<GridEntry> unity_check(const MartingaleFamily& family, const RunSettings& run) {
  const auto cells = accumulate(family, {}, run);
  std::vector<GridEntry> out;
  for (std::size_t a = 0; a < family.n_grid.size(); ++a) {
    for (std::size_t b = 0; b < family.t_grid.size(); ++b) {
      out.push_back({family.n_grid[a], family.t_grid[b], estimate_of(cells[a * family.t_grid.size() + b].m)});
    }
  }
  return out;
}

std::vector<double> quadratic_variation_quantiles(const MartingaleFamily& family, int n, double t,
                                                  const std::vector<double>& probs, const RunSettings& run) {
  const auto where = std::find(family.t_grid.begin(), family.t_grid.end(), t);
  require(where != family.t_grid.end(), "quadratic_variation_quantiles: t not in the family's grid");
  const auto b = static_cast<std::size_t>(where - family.t_grid.begin());
  const std::uint64_t master = derive_seed(run.seed, kFamilyTag);
  auto draws = map_replicas<Realization>(run.replicas, run.workers, [&](std::size_t i) {
    RngStream stream(master, i);
    return family.simulate(stream, n, family.t_grid)[b];
  });
  std::vector<double> out;
  if (std::any_of(draws.begin(), draws.end(),
                  [](const Realization& r) { return std::isnan(r.quadratic_variation); })) {
    out.assign(probs.size(), std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  std::stable_sort(draws.begin(), draws.end(), [](const Realization& x, const Realization& y) {
    return x.quadratic_variation < y.quadratic_variation;
  });
  double total = 0.0;
  for (const Realization& r : draws) {
    total += r.m;
  }
  for (double p : probs) {
    require(p >= 0 && p <= 1, "quadratic_variation_quantiles: probabilities must lie in [0, 1]");
    double cumulative = 0.0;
    double value = draws.back().quadratic_variation;
    for (const Realization& r : draws) {
      cumulative += r.m;
      if (cumulative >= p * total) {
        value = r.quadratic_variation;
        break;
      }
    }
    out.push_back(value);
  }
  return out;
}

Drift Drift::constant(double c) {
  return {"constant:" + csv::format_real(c),
          [c](double, std::span<const double>, std::span<double>, std::span<double> mu) {
            std::fill(mu.begin(), mu.end(), c);
          }};
}

Drift Drift::bounded_sine(double c) {
  return {"bounded-sine:" + csv::format_real(c),
          [c](double, std::span<const double> w, std::span<double>, std::span<double> mu) {
            for (std::size_t i = 0; i < mu.size(); ++i) {
              mu[i] = c * std::sin(w[i]);
            }
          }};
}

Drift Drift::running_max(double c) {
  return {"running-max:" + csv::format_real(c),
          [c](double, std::span<const double> w, std::span<double> state, std::span<double> mu) {
            for (std::size_t i = 0; i < mu.size(); ++i) {
              state[i] = std::max(state[i], std::abs(w[i]));
              mu[i] = c * state[i];
            }
          }};
}

Drift Drift::parse(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (colon != std::string::npos) {
    const double c = parse_coefficient(text, colon);
    if (kind == "constant") {
      return constant(c);
    }
    if (kind == "bounded-sine") {
      return bounded_sine(c);
    }
    if (kind == "running-max") {
      return running_max(c);
    }
  }
  fail(ErrorCode::kConfig,
       "unknown drift '" + text + "' (expected constant:C, bounded-sine:C or running-max:C)");
}

void clamp_drift(std::span<double> mu, int n) noexcept {
  if (n <= 0) {
    return;
  }
  const double bound = n;
  for (double& v : mu) {
    v = std::clamp(v, -bound, bound);
  }
}

MartingaleFamily benes_truncation_family(const Drift& mu, double step, std::size_t dim,
                                         std::vector<int> n_grid, std::vector<double> t_grid,
                                         bool stop_at_level) {
  require(step > 0, "benes family: step must be positive");
  require(dim >= 1, "benes family: dim must be at least 1");
  require(static_cast<bool>(mu.eval), "benes family: drift missing");
  grid_indices(t_grid, step);
  MartingaleFamily family;
  family.description = "continuous exponential, drift " + mu.name + " clamped to [-n, n]";
  family.n_grid = std::move(n_grid);
  family.t_grid = std::move(t_grid);
  family.has_stopping = stop_at_level;
  family.simulate = [mu, step, dim, stop_at_level](RngStream& stream, int n, const std::vector<double>& ts) {
    const auto marks = grid_indices(ts, step);
    const std::size_t steps = marks.back();
    const double scale = std::sqrt(step);
    const double log_level = n > 0 ? std::log(static_cast<double>(n)) : 0.0;
    std::vector<double> w(dim, 0.0), state(dim, 0.0), drift(dim), dw(dim);
    std::vector<Realization> out;
    out.reserve(ts.size());
    double log_m = 0.0, qv = 0.0;
    bool stopped = false;
    std::size_t next = 0;
    for (std::size_t k = 0;; ++k) {
      while (next < marks.size() && marks[next] == k) {
        out.push_back({std::exp(log_m), stopped, qv});
        ++next;
      }
      if (k == steps) {
        break;
      }
      stream.fill_normal(dw.data(), dim);
      mu.eval(static_cast<double>(k) * step, w, state, drift);
      clamp_drift(drift, n);
      double dot = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        dw[i] *= scale;
        dot += drift[i] * dw[i];
        sq += drift[i] * drift[i];
        w[i] += dw[i];
      }
      if (!stopped) {
        log_m += dot - 0.5 * sq * step;
        qv += sq * step;
        stopped = stop_at_level && n > 0 && log_m >= log_level;
      }
    }
    return out;
  };
  return family;
}

MartingaleFamily inverse_bessel_family(std::vector<int> n_grid, std::vector<double> t_grid, double step) {
  require(step > 0, "inverse Bessel family: step must be positive");
  grid_indices(t_grid, step);
  MartingaleFamily family;
  family.description = "inverse Bessel-3: M = 1/|e_1 + B|, member n stopped at M = n";
  family.n_grid = std::move(n_grid);
  family.t_grid = std::move(t_grid);
  family.has_stopping = true;
  family.simulate = [step](RngStream& stream, int n, const std::vector<double>& ts) {
    const auto marks = grid_indices(ts, step);
    const std::size_t steps = marks.back();
    const double scale = std::sqrt(step);
    const double eps = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
    double p[3] = {1.0, 0.0, 0.0};
    double r = 1.0;
    bool stopped = false;
    std::vector<Realization> out;
    out.reserve(ts.size());
    std::size_t next = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0;; ++k) {
      while (next < marks.size() && marks[next] == k) {
        out.push_back({stopped ? static_cast<double>(n) : 1.0 / r, stopped, nan});
        ++next;
      }
      if (k == steps) {
        break;
      }
      double z[3];
      stream.fill_normal(z, 3);
      const double u = stream.uniform();
      for (int i = 0; i < 3; ++i) {
        p[i] += scale * z[i];
      }
      const double s = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
      if (!stopped && n > 0) {
        if (s <= eps) {
          stopped = true;
        } else {
          // Bessel-3 bridge from r to s avoids the ball of radius eps with this probability.
          const double miss = std::expm1(-2.0 * (s - eps) * (r - eps) / step) / std::expm1(-2.0 * r * s / step);
          stopped = u > miss;
        }
      }
      r = s;
    }
    return out;
  };
  return family;
}

MartingaleFamily unit_family(std::vector<int> n_grid, std::vector<double> t_grid) {
  MartingaleFamily family;
  family.description = "constant M = 1, tau_n = n";
  family.n_grid = std::move(n_grid);
  family.t_grid = std::move(t_grid);
  family.has_stopping = true;
  family.simulate = [](RngStream&, int n, const std::vector<double>& ts) {
    std::vector<Realization> out;
    for (double t : ts) {
      out.push_back({1.0, n > 0 && static_cast<double>(n) <= t, 0.0});
    }
    return out;
  };
  return family;
}

double inverse_bessel_mean(double t) {
  require(t > 0, "inverse_bessel_mean: t must be positive");
  return 2.0 * stats::normal_cdf(1.0 / std::sqrt(t)) - 1.0;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kTightnessConsistent:
      return "TightnessConsistent";
    case Verdict::kTightnessViolated:
      return "TightnessViolatedAt";
    case Verdict::kInconclusive:
      break;
  }
  return "Inconclusive";
}

std::string verdict_line(const TightnessProfile& profile) {
  std::string line("verdict=");
  line += to_string(profile.verdict);
  if (profile.verdict == Verdict::kTightnessViolated) {
    line += " kappa=" + csv::format_real(profile.violated_kappa) + " floor=" + csv::format_real(profile.floor);
  }
  return line;
}

void write_profile_csv(std::ostream& out, const TightnessProfile& profile) {
  csv::write_row(out, {"n", "t", "kappa", "estimate", "stderr"});
  for (const ProfileEntry& e : profile.entries) {
    csv::write_row(out, {csv::format_int(e.n), csv::format_real(e.t), csv::format_real(e.kappa),
                         csv::format_real(e.tail.value), csv::format_real(e.tail.std_error)});
  }
  out << "# " << verdict_line(profile) << '\n';
}

void write_grid_csv(std::ostream& out, const std::vector<GridEntry>& entries) {
  csv::write_row(out, {"n", "t", "estimate", "stderr"});
  for (const GridEntry& e : entries) {
    csv::write_row(out, {csv::format_int(e.n), csv::format_real(e.t), csv::format_real(e.estimate.value),
                         csv::format_real(e.estimate.std_error)});
  }
}

}  // namespace rarepath::diag
