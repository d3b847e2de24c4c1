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

#include "rarepath/chain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>

#include "rarepath/csv.hpp"
#include "rarepath/error.hpp"

namespace rarepath::chain {
namespace {

constexpr double kRowTolerance = 1e-12;

void check_stochastic(const FiniteChain::Matrix& k, double tolerance) {
  require(!k.empty(), "finite chain: empty kernel");
  for (std::size_t i = 0; i < k.size(); ++i) {
    require(k[i].size() == k.size(), "finite chain: kernel must be square");
    double sum = 0.0;
    for (double p : k[i]) {
      require(p >= 0.0 && std::isfinite(p), "finite chain: negative or non-finite entry in row " +
                                                 std::to_string(i));
      sum += p;
    }
    require(std::abs(sum - 1.0) <= tolerance,
            "finite chain: row " + std::to_string(i) + " sums to " + csv::format_real(sum));
  }
}

}  // namespace

LatticeSpec::LatticeSpec(int n_) : n(n_), delta(std::ldexp(1.0, -n_)), time_step(std::ldexp(1.0, -2 * n_)) {
  require(n_ >= 1 && n_ <= 26, "lattice: n must lie in [1, 26]");
}

BirthDeathKernel ou_chain_kernel(const LatticeSpec& spec) {
  const double delta = spec.delta;
  const double cap = spec.n;
  return BirthDeathKernel{
      spec,
      [delta, cap](State k) {
        if (k == 0) {
          return 1.0;
        }
        return 0.5 * (1.0 - delta * std::min(static_cast<double>(k) * delta, cap));
      },
      {},
      std::nullopt};
}

BirthDeathKernel h_transform_kernel(const LatticeSpec& spec, int level) {
  require(level >= 1, "h-transform: level must be at least 1");
  const State top = spec.index_of(level);
  return BirthDeathKernel{spec,
                          [top](State k) {
                            if (k >= top || k <= 0) {
                              return 0.0;
                            }
                            return 0.5 * (1.0 - 1.0 / static_cast<double>(top - k));
                          },
                          {0},
                          top};
}

ChainPath simulate_chain(const BirthDeathKernel& kernel, State start, const StopRule& stop,
                         RngStream& stream, std::size_t max_steps) {
  require(start >= 0, "simulate_chain: negative start state");
  require(!kernel.max_state || start <= *kernel.max_state, "simulate_chain: start above the top state");
  ChainPath path;
  path.states.push_back(start);
  State state = start;
  for (std::size_t step = 0;; ++step) {
    if (kernel.is_absorbing(state) || (stop && stop(state, step))) {
      return path;
    }
    if (step >= max_steps) {
      fail(ErrorCode::kNonterminationSuspected,
           "simulate_chain: no stop after " + std::to_string(max_steps) + " steps");
    }
    const double up = kernel.up_prob(state);
    state += stream.uniform() < up ? 1 : -1;
    path.states.push_back(state);
  }
}

DiscreteWeight discrete_weight(const ChainPath& path, const LatticeSpec& spec, WeightForm form) {
  require(!path.states.empty() && path.states.back() == 0, "discrete_weight: path must end at 0");
  DiscreteWeight out;
  double log_product = 0.0;
  for (std::size_t k = 1; k < path.states.size(); ++k) {
    const State prev = path.states[k - 1];
    const State jump = path.states[k] - prev;
    require(jump == 1 || jump == -1, "discrete_weight: path steps must be +-delta");
    const double q = spec.delta * std::min(spec.value(prev), static_cast<double>(spec.n));
    out.half_sum_q2 += 0.5 * q * q;
    if (form == WeightForm::kProduct) {
      const double factor = 1.0 - q * static_cast<double>(jump);
      if (!(factor > 0.0)) {
        fail(ErrorCode::kInvalidWeight, "discrete_weight: nonpositive factor at step " + std::to_string(k));
      }
      log_product += std::log(factor);
    }
  }
  if (form == WeightForm::kProduct) {
    out.log_weight = log_product;
  } else {
    const double y0 = spec.value(path.states.front());
    const double duration = static_cast<double>(path.steps()) * spec.time_step;
    out.log_weight = 0.5 * y0 * y0 + 0.5 * duration - out.half_sum_q2;
  }
  return out;
}

FiniteChain::FiniteChain(Matrix kernel, std::optional<std::vector<double>> pi)
    : kernel_(std::move(kernel)), pi_(std::move(pi)) {
  check_stochastic(kernel_, kRowTolerance);
  if (pi_) {
    require(pi_->size() == kernel_.size(), "finite chain: pi has the wrong length");
    double total = 0.0;
    for (double p : *pi_) {
      require(p >= 0.0, "finite chain: negative stationary mass");
      total += p;
    }
    require(std::abs(total - 1.0) <= 1e-10, "finite chain: pi does not sum to 1");
    for (std::size_t j = 0; j < size(); ++j) {
      double mass = 0.0;
      for (std::size_t i = 0; i < size(); ++i) {
        mass += (*pi_)[i] * kernel_[i][j];
      }
      require(std::abs(mass - (*pi_)[j]) <= 1e-10, "finite chain: pi is not stationary");
    }
  }
}

bool FiniteChain::is_birth_death() const noexcept {
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap > 1 && kernel_[i][j] != 0.0) {
        return false;
      }
    }
  }
  return true;
}

FiniteChain birth_death_chain(const std::vector<double>& up, bool absorbing_zero) {
  require(up.size() >= 2, "birth_death_chain: need at least two states");
  const std::size_t m = up.size();
  FiniteChain::Matrix k(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    double p = up[i];
    if (i == 0) {
      p = absorbing_zero ? 0.0 : 1.0;
    } else if (i + 1 == m) {
      p = 0.0;
    }
    require(p >= 0.0 && p <= 1.0, "birth_death_chain: up probability outside [0, 1]");
    if (i == 0 && absorbing_zero) {
      k[0][0] = 1.0;
      continue;
    }
    if (i + 1 < m) {
      k[i][i + 1] = p;
    }
    if (i > 0) {
      k[i][i - 1] = 1.0 - p;
    }
  }
  return FiniteChain(std::move(k));
}

FiniteChain ou_chain_truncated(const LatticeSpec& spec, int level) {
  require(level >= 1, "ou_chain_truncated: level must be at least 1");
  const BirthDeathKernel kernel = ou_chain_kernel(spec);
  const State top = spec.index_of(level) + 1;
  std::vector<double> up(static_cast<std::size_t>(top) + 1);
  for (State k = 0; k <= top; ++k) {
    up[static_cast<std::size_t>(k)] = kernel.up_prob(k);
  }
  return birth_death_chain(up);
}

std::vector<double> stationary_distribution(const FiniteChain& chain) {
  const std::size_t m = chain.size();
  std::vector<double> pi(m, 0.0);
  if (chain.is_birth_death()) {
    pi[0] = 1.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      const double up = chain(k, k + 1);
      const double down = chain(k + 1, k);
      if (up == 0.0 || down == 0.0) {
        fail(ErrorCode::kReducibleChain,
             "stationary_distribution: birth-death chain splits between states " + std::to_string(k) +
                 " and " + std::to_string(k + 1));
      }
      pi[k + 1] = pi[k] * up / down;
    }
  } else {
    Eigen::MatrixXd a(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
            chain(i, j) - (i == j ? 1.0 : 0.0);
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> rank_probe(a);
    rank_probe.setThreshold(1e-10);
    if (rank_probe.rank() + 1 < static_cast<Eigen::Index>(m)) {
      fail(ErrorCode::kReducibleChain, "stationary_distribution: stationary law is not unique");
    }
    a.row(static_cast<Eigen::Index>(m) - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    rhs(static_cast<Eigen::Index>(m) - 1) = 1.0;
    const Eigen::VectorXd solution = a.fullPivLu().solve(rhs);
    for (std::size_t i = 0; i < m; ++i) {
      pi[i] = solution(static_cast<Eigen::Index>(i));
      if (pi[i] < -1e-12) {
        fail(ErrorCode::kReducibleChain, "stationary_distribution: negative stationary mass");
      }
      pi[i] = std::max(pi[i], 0.0);
    }
  }
  double total = 0.0;
  for (double p : pi) {
    total += p;
  }
  for (double& p : pi) {
    p /= total;
  }
  return pi;
}

FiniteChain reversal_kernel(const FiniteChain& chain) {
  const std::vector<double> pi = chain.pi() ? *chain.pi() : stationary_distribution(chain);
  const std::size_t m = chain.size();
  FiniteChain::Matrix k(m, std::vector<double>(m, 0.0));
  for (std::size_t y = 0; y < m; ++y) {
    require(pi[y] > 0.0, "reversal_kernel: zero stationary mass at state " + std::to_string(y));
    for (std::size_t x = 0; x < m; ++x) {
      k[y][x] = pi[x] * chain(x, y) / pi[y];
    }
  }
  check_stochastic(k, 1e-10);
  return FiniteChain(std::move(k), pi);
}

std::size_t sample_next(const FiniteChain& chain, std::size_t from, RngStream& stream) {
  const auto& row = chain.kernel()[from];
  const double u = stream.uniform();
  double cumulative = 0.0;
  std::size_t last = from;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > 0.0) {
      cumulative += row[j];
      last = j;
      if (u < cumulative) {
        return j;
      }
    }
  }
  return last;
}

ConvSample conv_sampler(const FiniteChain& chain, const Potential& v, double level, std::size_t x,
                        std::size_t b, RngStream& stream, std::size_t max_attempts) {
  const std::size_t m = chain.size();
  require(x < m && b < m, "conv_sampler: state out of range");
  require(v(x) < level && v(b) < level, "conv_sampler: x and b must lie below the level");
  const FiniteChain rev = reversal_kernel(chain);
  const std::vector<double>& pi = *rev.pi();

  // Support check: some start in {V >= level} must reach x and then b while
  // staying below the level.
  std::vector<std::size_t> starts;
  double start_mass = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    if (v(s) >= level && pi[s] > 0.0) {
      starts.push_back(s);
      start_mass += pi[s];
    }
  }
  auto reachable = [&](std::deque<std::size_t> frontier, std::size_t target, bool avoid_b) {
    std::vector<bool> seen(m, false);
    while (!frontier.empty()) {
      const std::size_t s = frontier.front();
      frontier.pop_front();
      for (std::size_t y = 0; y < m; ++y) {
        if (rev(s, y) == 0.0 || seen[y] || v(y) >= level) {
          continue;
        }
        if (y == target) {
          return true;
        }
        if (avoid_b && y == b) {
          continue;
        }
        seen[y] = true;
        frontier.push_back(y);
      }
    }
    return false;
  };
  if (starts.empty() || !reachable({starts.begin(), starts.end()}, x, true) ||
      (x != b && !reachable({x}, b, false))) {
    fail(ErrorCode::kInfeasibleConditioning,
         "conv_sampler: the event {T_* < T_b} has zero probability from x");
  }

  std::vector<double> start_cdf;
  double acc = 0.0;
  for (std::size_t s : starts) {
    acc += pi[s] / start_mass;
    start_cdf.push_back(acc);
  }

  ConvSample out;
  std::vector<std::size_t> run;
  for (out.attempts = 1; out.attempts <= max_attempts; ++out.attempts) {
    const double u = stream.uniform();
    const auto pos = std::upper_bound(start_cdf.begin(), start_cdf.end(), u) - start_cdf.begin();
    run.assign(1, starts[std::min<std::size_t>(static_cast<std::size_t>(pos), starts.size() - 1)]);
    bool seen_x = false;
    bool accepted = false;
    while (true) {
      const std::size_t next = sample_next(rev, run.back(), stream);
      run.push_back(next);
      if (v(next) >= level) {
        break;
      }
      seen_x = seen_x || next == x;
      if (next == b) {
        accepted = seen_x;
        break;
      }
    }
    if (accepted) {
      std::size_t pivot = run.size() - 1;
      while (run[pivot] != x) {
        --pivot;
      }
      out.pivot = pivot;
      out.reversed_run.states.assign(run.begin(), run.end());
      out.path.states.assign(run.rend() - static_cast<std::ptrdiff_t>(pivot) - 1, run.rend());
      return out;
    }
  }
  fail(ErrorCode::kNonterminationSuspected,
       "conv_sampler: no accepted run after " + std::to_string(max_attempts) + " attempts");
}

Enumeration enumerate_paths(const FiniteChain& chain, std::size_t start,
                            const std::function<Outcome(std::size_t, std::size_t)>& classify,
                            std::size_t max_len) {
  if (chain.size() > 12 || max_len > 24) {
    fail(ErrorCode::kGuardExceeded, "enumerate_paths: limited to 12 states and paths of 24 steps");
  }
  require(start < chain.size(), "enumerate_paths: start out of range");
  Enumeration out;
  std::vector<std::size_t> path{start};
  std::size_t visited = 0;
  auto walk = [&](auto&& self, double prob) -> void {
    if (++visited > (std::size_t{1} << 26)) {
      fail(ErrorCode::kGuardExceeded, "enumerate_paths: more than 2^26 partial paths");
    }
    const std::size_t step = path.size();
    if (step > max_len) {
      out.truncated_mass += prob;
      return;
    }
    const auto& row = chain.kernel()[path.back()];
    for (std::size_t y = 0; y < row.size(); ++y) {
      if (row[y] == 0.0) {
        continue;
      }
      const double p = prob * row[y];
      path.push_back(y);
      switch (classify(y, step)) {
        case Outcome::kSuccess:
          out.success_paths[path] += p;
          out.success_mass += p;
          break;
        case Outcome::kFailure:
          out.failure_mass += p;
          break;
        case Outcome::kContinue:
          self(self, p);
          break;
      }
      path.pop_back();
    }
  };
  walk(walk, 1.0);
  return out;
}

Enumeration enumerate_conditioned(const FiniteChain& chain, const Potential& v, double level,
                                  std::size_t x, std::size_t b, std::size_t max_len) {
  require(v(x) < level && v(b) < level, "enumerate_conditioned: x and b must lie below the level");
  return enumerate_paths(
      chain, x,
      [&](std::size_t state, std::size_t) {
        if (v(state) >= level) {
          return Outcome::kSuccess;
        }
        return state == b ? Outcome::kFailure : Outcome::kContinue;
      },
      max_len);
}

void write_matrix_csv(std::ostream& out, const FiniteChain::Matrix& m) {
  for (const auto& row : m) {
    std::vector<std::string> cells;
    cells.reserve(row.size());
    for (double p : row) {
      cells.push_back(csv::format_real(p));
    }
    csv::write_row(out, cells);
  }
}

FiniteChain::Matrix read_matrix_csv(std::istream& in) { return csv::read_numeric(in, false); }

void write_chain_path_csv(std::ostream& out, const ChainPath& path, const std::optional<LatticeSpec>& spec) {
  csv::write_row(out, {"step", "state"});
  for (std::size_t k = 0; k < path.states.size(); ++k) {
    const std::string state =
        spec ? csv::format_real(spec->value(path.states[k])) : csv::format_int(path.states[k]);
    csv::write_row(out, {csv::format_int(static_cast<long long>(k)), state});
  }
}

}  // namespace rarepath::chain
