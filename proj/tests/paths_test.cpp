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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rarepath/error.hpp"

namespace rarepath {
namespace {

TEST(ContinuousPath, ReversalIsAnInvolution) {
  RngStream s(1, 0);
  const ContinuousPath w = simulate_bm(s, 3, 0.01, 1.0);
  EXPECT_EQ(w.size(), 101u);
  const ContinuousPath r = reversed(w);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(r(0, c), w(100, c));
  }
  const ContinuousPath rr = reversed(r);
  EXPECT_TRUE(std::equal(rr.values().begin(), rr.values().end(), w.values().begin()));
}

TEST(ContinuousPath, RejectsRaggedStorage) {
  EXPECT_THROW(ContinuousPath(0.1, 2, {1.0, 2.0, 3.0}), Error);
}

TEST(ScaleRatio, MatchesSimpsonQuadrature) {
  EXPECT_NEAR(ou_scale_ratio(1.0, 2.0), oracle::ou_scale(1.0) / oracle::ou_scale(2.0), 1e-10);
  EXPECT_NEAR(ou_scale_ratio(1.0, 2.0), 0.0889007985, 1e-9);
  EXPECT_NEAR(ou_scale_ratio(1.0, 3.0), 0.0010125345, 1e-9);
  EXPECT_NEAR(ou_scale_ratio(0.5, 1.5), oracle::ou_scale(0.5) / oracle::ou_scale(1.5), 1e-10);
  EXPECT_NEAR(ou_scale_ratio(1.0, 6.0), oracle::ou_scale(1.0) / oracle::ou_scale(6.0), 1e-10 * ou_scale_ratio(1.0, 6.0));
}

TEST(PathIntegralSquare, ExactForLinearPath) {
  // x(t) = t on a grid of 0.1; trapezoid error for t^2 is h^2 t / 6 per unit.
  std::vector<double> v;
  for (int k = 0; k <= 10; ++k) v.push_back(0.1 * k);
  const ContinuousPath p(0.1, 1, v);
  EXPECT_NEAR(path_integral_square(p, 1.0), 1.0 / 3.0 + 0.01 / 6.0, 1e-12);
  // Partial last cell: stop at 0.95, interpolated value 0.95.
  const double partial = path_integral_square(p, 0.95);
  const double expect = (0.9 * 0.9 * 0.9) / 3.0 + 0.01 * 0.9 / 6.0 + 0.05 * (0.81 + 0.9025) / 2.0;
  EXPECT_NEAR(partial, expect, 1e-12);
}

TEST(SimulateOuStopped, StopsAtBarrierAndInterpolates) {
  RngStream s(3, 0);
  StopPolicy policy;
  const StoppedSegment seg = simulate_ou_stopped(s, 1.0, 1e-3, 0.0, 2.0, policy);
  ASSERT_NE(seg.hit, BarrierHit::kHorizonExpired);
  EXPECT_EQ(seg.stop_index + 1, seg.path.size());
  for (std::size_t k = 0; k < seg.stop_index; ++k) {
    ASSERT_GT(seg.path(k), 0.0);
    ASSERT_LT(seg.path(k), 2.0);
  }
  EXPECT_LE(seg.stop_time_refined, seg.path.duration() + 1e-15);
  EXPECT_GE(seg.stop_time_refined, seg.path.duration() - 1e-3 - 1e-15);
}

TEST(SimulateOuStopped, GridAcceptanceNearScaleRatio) {
  // Grid monitoring overshoots, so allow a generous band; the bridge variant
  // is checked tightly in the acceptance suite.
  StopPolicy policy;
  policy.monitoring = Monitoring::kBrownianBridge;
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    RngStream s(17, static_cast<std::uint64_t>(i));
    hits += simulate_ou_stopped(s, 1.0, 1e-2, 0.0, 2.0, policy).hit == BarrierHit::kUpperBarrier;
  }
  const double p = oracle::ou_hit_upper(1.0, 0.0, 2.0);
  const double se = std::sqrt(p * (1 - p) / n);
  EXPECT_NEAR(static_cast<double>(hits) / n, p, 4.0 * se + 0.01);
}

TEST(Bessel3Complement, EndsAtOrBelowZero) {
  RngStream s(5, 0);
  const StoppedSegment seg = simulate_bessel3_complement_stopped(s, 2.0, 1e-3, {});
  ASSERT_EQ(seg.hit, BarrierHit::kLowerBarrier);
  EXPECT_LE(seg.path(seg.stop_index), 0.0);
  EXPECT_EQ(seg.path(0), 2.0);
  for (std::size_t k = 0; k < seg.stop_index; ++k) {
    ASSERT_GT(seg.path(k), 0.0);
    ASSERT_LE(seg.path(k), 2.0);
  }
}

TEST(ReversedLastExcursion, PicksFinalPassage) {
  // Level 1 is crossed at k = 1..2 and again at k = 4..5.
  const std::vector<double> v{2.0, 1.5, 0.5, 0.8, 1.2, 0.6, -0.1};
  StoppedSegment seg{ContinuousPath(0.5, 1, v), 6, BarrierHit::kLowerBarrier, 3.0};
  const ReversedExcursion ex = reversed_last_excursion(seg, 1.0);
  ASSERT_EQ(ex.segment.size(), 5u);
  EXPECT_EQ(ex.segment(0), 1.2);
  EXPECT_EQ(ex.segment(4), 2.0);
  EXPECT_NEAR(ex.origin_time, 2.0 + 0.5 * (0.2 / 0.6), 1e-15);
}

TEST(ReversedLastExcursion, ExactGridHitAndMissingLevel) {
  const std::vector<double> v{2.0, 1.0, 0.5, -0.5};
  StoppedSegment seg{ContinuousPath(0.1, 1, v), 3, BarrierHit::kLowerBarrier, 0.25};
  const ReversedExcursion ex = reversed_last_excursion(seg, 1.0);
  EXPECT_EQ(ex.segment.size(), 2u);
  EXPECT_EQ(ex.segment(0), 1.0);
  EXPECT_NEAR(ex.origin_time, 0.1, 1e-15);
  try {
    reversed_last_excursion(seg, 3.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLevelNeverReached);
  }
}

TEST(WritePathCsv, HeaderAndRows) {
  std::ostringstream out;
  write_path_csv(out, ContinuousPath(0.5, 1, {1.0, 2.0}));
  EXPECT_EQ(out.str(), "index,time,value\n0,0,1\n1,0.5,2\n");
}

}  // namespace
}  // namespace rarepath
