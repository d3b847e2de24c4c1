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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rarepath/error.hpp"
#include "rarepath/stats.hpp"

namespace rarepath::chain {
namespace {

double max_abs_diff(const FiniteChain::Matrix& a, const FiniteChain::Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      worst = std::max(worst, std::abs(a[i][j] - b[i][j]));
    }
  }
  return worst;
}

FiniteChain symmetric_walk(std::size_t states) {
  return birth_death_chain(std::vector<double>(states, 0.5));
}

// P_x(hit top before 0) for a birth-death chain, by the scale function.
double hit_top_first(const std::vector<double>& up, std::size_t x) {
  std::vector<double> s{0.0, 1.0};
  double ratio = 1.0;
  for (std::size_t k = 1; k + 1 < up.size(); ++k) {
    ratio *= (1.0 - up[k]) / up[k];
    s.push_back(s.back() + ratio);
  }
  return s[x] / s.back();
}

TEST(Lattice, DyadicSpacing) {
  const LatticeSpec spec(3);
  EXPECT_EQ(spec.delta, 0.125);
  EXPECT_EQ(spec.delta * spec.delta, spec.time_step);
  EXPECT_EQ(spec.index_of(2), 16);
  EXPECT_EQ(spec.value(12), 1.5);
}

TEST(OuChainKernel, UpProbabilities) {
  const BirthDeathKernel k = ou_chain_kernel(LatticeSpec(3));
  EXPECT_EQ(k.up_prob(8), 7.0 / 16.0);   // y = 1
  EXPECT_EQ(k.up_prob(80), 5.0 / 16.0);  // y = 10, capped at n = 3
  EXPECT_EQ(k.up_prob(0), 1.0);
}

TEST(HTransformKernel, HarmonicAndForcedDownAtTop) {
  for (int n : {1, 2, 3, 5}) {
    for (int level : {1, 2, 3}) {
      const LatticeSpec spec(n);
      const BirthDeathKernel k = h_transform_kernel(spec, level);
      const State top = spec.index_of(level);
      auto h = [&](State s) { return (level - spec.value(s)) / level; };
      for (State y = 1; y < top; ++y) {
        const double up = k.up_prob(y);
        ASSERT_GE(up, 0.0);
        ASSERT_LE(up, 1.0);
        // Doob transform of the symmetric walk: K_h(y, y') = K(y, y') h(y') / h(y).
        EXPECT_NEAR(up, 0.5 * h(y + 1) / h(y), 1e-12);
        EXPECT_NEAR(h(y), 0.5 * h(y - 1) + 0.5 * h(y + 1), 1e-12);
      }
      EXPECT_EQ(k.up_prob(top - 1), 0.0);
      EXPECT_EQ(k.up_prob(top), 0.0);
      EXPECT_TRUE(k.is_absorbing(0));
    }
  }
}

TEST(SimulateChain, AbsorbingStartAndStepCap) {
  const LatticeSpec spec(2);
  const BirthDeathKernel k = h_transform_kernel(spec, 2);
  RngStream s(1, 0);
  const ChainPath p = simulate_chain(k, 0, [](State, std::size_t) { return false; }, s);
  EXPECT_EQ(p.states.size(), 1u);
  const BirthDeathKernel walk{spec, [](State) { return 0.5; }, {}, std::nullopt};
  try {
    simulate_chain(walk, 4, [](State, std::size_t) { return false; }, s, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonterminationSuspected);
  }
}

TEST(SimulateChain, SymmetricRuinProbability) {
  const LatticeSpec spec(1);
  const BirthDeathKernel walk{spec, [](State) { return 0.5; }, {0}, std::nullopt};
  const int n = 40000;
  int ruined = 0;
  for (int i = 0; i < n; ++i) {
    RngStream s(2, static_cast<std::uint64_t>(i));
    const ChainPath p = simulate_chain(walk, 1, [](State y, std::size_t) { return y == 4; }, s);
    ruined += p.states.back() == 0;
  }
  const double se = std::sqrt(0.75 * 0.25 / n);
  EXPECT_NEAR(static_cast<double>(ruined) / n, 0.75, 4.0 * se);
}

// prod (1 - q_{k-1} J_k) with q = delta (y ^ n), written out independently.
double product_weight(const std::vector<State>& states, const LatticeSpec& spec) {
  double w = 1.0;
  for (std::size_t k = 1; k < states.size(); ++k) {
    const double y = spec.value(states[k - 1]);
    const double q = spec.delta * std::min(y, static_cast<double>(spec.n));
    w *= 1.0 - q * static_cast<double>(states[k] - states[k - 1]);
  }
  return w;
}

TEST(DiscreteWeight, HandComputedFactors) {
  const LatticeSpec spec(3);
  // Straight down from y = 1: the first factor is 1 + 1/8, then 1 + j/64.
  std::vector<State> down;
  for (State k = 8; k >= 0; --k) down.push_back(k);
  double expect = 1.0;
  for (int j = 1; j <= 8; ++j) expect *= 1.0 + j / 64.0;
  EXPECT_NEAR(std::exp(discrete_weight({down}, spec, WeightForm::kProduct).log_weight), expect, 1e-14);
  EXPECT_NEAR(expect, product_weight(down, spec), 1e-14);
  // Two up-steps at the cap contribute (1 - 3/8)^2.
  std::vector<State> capped{24, 25, 26};
  for (State k = 25; k >= 0; --k) capped.push_back(k);
  EXPECT_NEAR(discrete_weight({capped}, spec, WeightForm::kProduct).log_weight,
              std::log(product_weight(capped, spec)), 1e-12);
  EXPECT_NEAR(product_weight({24, 25, 26}, spec), (5.0 / 8.0) * (5.0 / 8.0), 1e-15);
  const auto e = discrete_weight({down}, spec, WeightForm::kExponent);
  double half_q2 = 0.0;
  for (int j = 1; j <= 8; ++j) half_q2 += 0.5 * (j / 64.0) * (j / 64.0);
  EXPECT_NEAR(e.half_sum_q2, half_q2, 1e-15);
  EXPECT_NEAR(e.log_weight, 0.5 + 0.5 * 8.0 / 64.0 - half_q2, 1e-15);
  EXPECT_THROW(discrete_weight({{8, 7}}, spec, WeightForm::kProduct), Error);
}

TEST(DiscreteWeight, ProductAndExponentConverge) {
  // On paths from N = 2 to 0 the two forms differ by O(T delta); the gap
  // per unit of T delta should stay bounded as n grows.
  std::vector<double> scaled;
  for (int n : {4, 5, 6}) {
    const LatticeSpec spec(n);
    const BirthDeathKernel k = h_transform_kernel(spec, 2);
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
      RngStream s(3, i);
      const ChainPath p = simulate_chain(k, spec.index_of(2), [](State y, std::size_t) { return y == 0; }, s);
      const double t = static_cast<double>(p.steps()) * spec.time_step;
      const double gap = std::abs(discrete_weight(p, spec, WeightForm::kProduct).log_weight -
                                  discrete_weight(p, spec, WeightForm::kExponent).log_weight);
      worst = std::max(worst, gap / (t * spec.delta + spec.delta));
    }
    scaled.push_back(worst);
  }
  EXPECT_LT(scaled[2], 2.0 * scaled[0] + 1.0);
}

TEST(FiniteChain, ValidatesRowsAndPi) {
  EXPECT_THROW(FiniteChain({{0.5, 0.4}, {0.5, 0.5}}), Error);
  EXPECT_THROW(FiniteChain({{0.5, 0.5}, {0.5, 0.5}}, std::vector<double>{0.9, 0.2}), Error);
  EXPECT_NO_THROW(FiniteChain({{0.5, 0.5}, {0.5, 0.5}}, std::vector<double>{0.5, 0.5}));
}

TEST(Stationary, ClosedForms) {
  const double a = 0.3, b = 0.1;
  const auto pi = stationary_distribution(FiniteChain({{1 - a, a}, {b, 1 - b}}));
  EXPECT_NEAR(pi[0], b / (a + b), 1e-14);
  EXPECT_NEAR(pi[1], a / (a + b), 1e-14);
  const auto uniform = stationary_distribution(
      FiniteChain({{0.2, 0.5, 0.3}, {0.3, 0.2, 0.5}, {0.5, 0.3, 0.2}}));
  for (double p : uniform) EXPECT_NEAR(p, 1.0 / 3.0, 1e-14);
}

TEST(Stationary, RandomDenseKernelResidual) {
  RngStream s(4, 0);
  FiniteChain::Matrix k(6, std::vector<double>(6));
  for (auto& row : k) {
    double total = 0;
    for (double& p : row) total += (p = s.uniform());
    for (double& p : row) p /= total;
  }
  const FiniteChain chain(k);
  EXPECT_FALSE(chain.is_birth_death());
  const auto pi = stationary_distribution(chain);
  double sum = 0.0;
  for (std::size_t j = 0; j < 6; ++j) {
    double v = 0.0;
    for (std::size_t i = 0; i < 6; ++i) v += pi[i] * k[i][j];
    EXPECT_NEAR(v, pi[j], 1e-10);
    sum += pi[j];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Stationary, ReducibleChainIsAnError) {
  try {
    stationary_distribution(FiniteChain({{1, 0, 0}, {0, 0.5, 0.5}, {0, 0.5, 0.5}}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReducibleChain);
  }
}

TEST(Reversal, BirthDeathIsSelfReversed) {
  const FiniteChain c = birth_death_chain({1.0, 0.3, 0.6, 0.45, 0.0});
  EXPECT_TRUE(c.is_birth_death());
  EXPECT_LT(max_abs_diff(reversal_kernel(c).kernel(), c.kernel()), 1e-12);
}

TEST(Reversal, ThreeCycleAndInvolution) {
  const FiniteChain cycle({{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  const FiniteChain rev = reversal_kernel(cycle);
  EXPECT_LT(max_abs_diff(rev.kernel(), {{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}), 1e-12);
  const FiniteChain mixed({{0.1, 0.6, 0.3}, {0.5, 0.1, 0.4}, {0.2, 0.7, 0.1}});
  EXPECT_LT(max_abs_diff(reversal_kernel(reversal_kernel(mixed)).kernel(), mixed.kernel()), 1e-12);
}

TEST(Enumeration, GamblersRuinSmallLevels) {
  for (std::size_t top = 2; top <= 4; ++top) {
    const FiniteChain walk = symmetric_walk(top + 1);
    for (std::size_t x = 1; x < top; ++x) {
      const Enumeration e = enumerate_conditioned(walk, [](std::size_t s) { return double(s); },
                                                  double(top), x, 0, 24);
      const double exact = double(x) / double(top);
      EXPECT_NEAR(e.success_mass + e.failure_mass + e.truncated_mass, 1.0, 1e-10);
      EXPECT_LE(e.success_mass, exact + 1e-15);
      EXPECT_GE(e.success_mass + e.truncated_mass, exact - 1e-15);
      EXPECT_LT(e.truncated_mass, 1e-3);
      if (top == 2) {
        EXPECT_EQ(e.success_mass, exact);
      }
    }
  }
}

TEST(Enumeration, GuardRefusesLargeProblems) {
  try {
    enumerate_paths(symmetric_walk(13), 1, [](std::size_t, std::size_t) { return Outcome::kContinue; }, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGuardExceeded);
  }
  EXPECT_THROW(
      enumerate_paths(symmetric_walk(4), 1, [](std::size_t, std::size_t) { return Outcome::kContinue; }, 25),
      Error);
}

// Under the h-transformed walk from N the weight prod (1 - q J) is the
// likelihood ratio of the OU chain on {T_0 < T_N}, so E_h[M'] equals
// P_OU(T_0 < T_N) / P_sym(T_0 < T_N). Checked on paths of length <= L for
// each L, comparing against the OU chain's own enumeration.
TEST(HTransform, WeightIdentityByPathSummation) {
  const LatticeSpec spec(1);
  const int level = 2;
  const std::size_t top = static_cast<std::size_t>(spec.index_of(level));  // 4, five states
  const BirthDeathKernel hk = h_transform_kernel(spec, level);
  std::vector<double> up;
  for (std::size_t s = 0; s <= top; ++s) up.push_back(s == 0 ? 0.0 : hk.up_prob(static_cast<State>(s)));
  const FiniteChain hchain = birth_death_chain(up, true);
  ASSERT_EQ(hchain.size(), 5u);
  const FiniteChain ou = ou_chain_truncated(spec, level);
  const double p_sym = 0.5 / static_cast<double>(top);

  for (std::size_t len : {6u, 12u, 18u, 24u}) {
    const Enumeration eh = enumerate_paths(
        hchain, top, [](std::size_t s, std::size_t) { return s == 0 ? Outcome::kSuccess : Outcome::kContinue; },
        len);
    double weighted = 0.0;
    for (const auto& [path, prob] : eh.success_paths) {
      ChainPath p;
      for (std::size_t s : path) p.states.push_back(static_cast<State>(s));
      weighted += prob * std::exp(discrete_weight(p, spec, WeightForm::kProduct).log_weight);
    }
    const Enumeration eo = enumerate_paths(
        ou, top,
        [top](std::size_t s, std::size_t) {
          return s == 0 ? Outcome::kSuccess : s >= top ? Outcome::kFailure : Outcome::kContinue;
        },
        len);
    EXPECT_NEAR(weighted, eo.success_mass / p_sym, 1e-10) << "len " << len;
  }
}

TEST(ConvSampler, StructureAndReversal) {
  const std::vector<double> up{1.0, 0.4, 0.5, 0.6, 0.0};
  const FiniteChain c = birth_death_chain(up);
  RngStream s(6, 0);
  const auto v = [](std::size_t k) { return double(k); };
  for (int i = 0; i < 50; ++i) {
    const ConvSample out = conv_sampler(c, v, 4.0, 1, 0, s);
    ASSERT_EQ(out.path.states.front(), 1);
    ASSERT_EQ(out.path.states.back(), 4);
    for (std::size_t k = 0; k + 1 < out.path.states.size(); ++k) {
      ASSERT_LT(out.path.states[k], 4);
      ASSERT_NE(out.path.states[k], 0);
    }
    const auto& run = out.reversed_run.states;
    ASSERT_EQ(run[out.pivot], 1);
    for (std::size_t k = 0; k <= out.pivot; ++k) {
      ASSERT_EQ(out.path.states[out.pivot - k], run[k]);
    }
  }
}

TEST(ConvSampler, InfeasibleConditioning) {
  // x = 1 cannot reach 3 without passing b = 2.
  const FiniteChain c = birth_death_chain({1.0, 0.5, 0.5, 0.0});
  RngStream s(7, 0);
  try {
    conv_sampler(c, [](std::size_t k) { return double(k); }, 3.0, 1, 2, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleConditioning);
  }
}

TEST(ConvSampler, MatchesEnumeratedConditionalLaw) {
  const std::vector<double> up{1.0, 0.4, 0.5, 0.6, 0.0};
  const FiniteChain c = birth_death_chain(up);
  const auto v = [](std::size_t k) { return double(k); };
  const Enumeration e = enumerate_conditioned(c, v, 4.0, 1, 0, 24);
  const double p_event = hit_top_first(up, 1);
  std::map<std::vector<std::size_t>, std::size_t> index;
  std::vector<double> probs;
  for (const auto& [path, prob] : e.success_paths) {
    index[path] = probs.size();
    probs.push_back(prob / p_event);
  }
  double rest = 1.0;
  for (double p : probs) rest -= p;
  probs.push_back(std::max(rest, 0.0));
  std::vector<double> counts(probs.size(), 0.0);
  RngStream s(8, 0);
  for (int i = 0; i < 20000; ++i) {
    const ConvSample out = conv_sampler(c, v, 4.0, 1, 0, s);
    std::vector<std::size_t> key(out.path.states.begin(), out.path.states.end());
    const auto it = index.find(key);
    counts[it == index.end() ? probs.size() - 1 : it->second] += 1;
  }
  EXPECT_GT(stats::goodness_of_fit(counts, probs).p_value, 1e-3);
}

TEST(MatrixCsv, RoundTrip) {
  const FiniteChain::Matrix m{{0.25, 0.75}, {1.0 / 3.0, 2.0 / 3.0}};
  std::stringstream io;
  write_matrix_csv(io, m);
  EXPECT_EQ(read_matrix_csv(io), m);
}

}  // namespace
}  // namespace rarepath::chain
