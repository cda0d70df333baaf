//
// Copyright 2026 The dpgossip Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dpgossip/topology.h"

#include <cmath>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpgossip {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

TEST(DirectedEdgeSetTest, AddsSelfLoopsAndDeduplicates) {
  auto set = DirectedEdgeSet::Create(3, {{1, 0}, {1, 0}, {2, 1}});
  ASSERT_TRUE(set.ok());
  EXPECT_TRUE(set->Contains(0, 0));
  EXPECT_TRUE(set->Contains(2, 2));
  EXPECT_EQ(set->edges().size(), 5u);
  EXPECT_THAT(set->OutNeighbors(0), ElementsAre(0, 1));
}

TEST(DirectedEdgeSetTest, RejectsOutOfRangeIndices) {
  EXPECT_FALSE(DirectedEdgeSet::Create(3, {{3, 0}}).ok());
  EXPECT_FALSE(DirectedEdgeSet::Create(3, {{0, -1}}).ok());
}

TEST(MixingMatrixTest, CompleteGraphOfTwo) {
  auto set = DirectedEdgeSet::Create(2, {{0, 1}, {1, 0}});
  ASSERT_TRUE(set.ok());
  auto p = BuildMixingMatrix(*set);
  ASSERT_TRUE(p.ok());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ((*p)(i, j), 0.5);
  }
}

TEST(MixingMatrixTest, DirectedRingSplitsUniformly) {
  auto set = DirectedEdgeSet::Create(3, {{1, 0}, {2, 1}, {0, 2}});
  ASSERT_TRUE(set.ok());
  auto p = BuildMixingMatrix(*set);
  ASSERT_TRUE(p.ok());
  EXPECT_DOUBLE_EQ((*p)(0, 0), 0.5);
  EXPECT_DOUBLE_EQ((*p)(1, 0), 0.5);
  EXPECT_DOUBLE_EQ((*p)(2, 0), 0.0);
  EXPECT_TRUE(p->IsColumnStochastic());
}

TEST(MixingMatrixTest, ExponentialRoundZeroUsesUnitSteps) {
  auto schedule = TopologySchedule::ExponentialPeriodic(8);
  ASSERT_TRUE(schedule.ok());
  auto set = schedule->At(3);  // 3 mod log2(8) = 0
  ASSERT_TRUE(set.ok());
  auto p = BuildMixingMatrix(*set);
  ASSERT_TRUE(p.ok());
  for (int j = 0; j < 8; ++j) {
    EXPECT_THAT(set->OutNeighbors(j).size(), 4u);
    for (int off = 0; off < 4; ++off) {
      EXPECT_DOUBLE_EQ((*p)((j + off) % 8, j), 0.25);
    }
    for (int off = 4; off < 8; ++off) {
      EXPECT_DOUBLE_EQ((*p)((j + off) % 8, j), 0.0);
    }
  }
}

TEST(TopologyScheduleTest, StaticRingReceivesFromPredecessors) {
  auto ring = TopologySchedule::StaticRing(8, 2);
  ASSERT_TRUE(ring.ok());
  for (int64_t t : {0, 5, 1000}) {
    auto set = ring->At(t);
    ASSERT_TRUE(set.ok());
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        const int back = ((i - j) % 8 + 8) % 8;
        EXPECT_EQ(set->Contains(i, j), back <= 2) << i << " <- " << j;
      }
    }
  }
}

TEST(TopologyScheduleTest, ExponentialStepTwoAtRoundOne) {
  auto schedule = TopologySchedule::ExponentialPeriodic(8);
  ASSERT_TRUE(schedule.ok());
  auto set = schedule->At(1);
  ASSERT_TRUE(set.ok());
  EXPECT_THAT(set->OutNeighbors(0), ElementsAre(0, 2, 4, 6));
  EXPECT_EQ(schedule->period(), 3);
}

TEST(TopologyScheduleTest, ExponentialNeedsPowerOfTwo) {
  EXPECT_FALSE(TopologySchedule::ExponentialPeriodic(6).ok());
  EXPECT_FALSE(TopologySchedule::ExponentialPeriodic(1).ok());
}

TEST(TopologyScheduleTest, SingleExplicitRoundRepeats) {
  auto set = DirectedEdgeSet::Create(3, {{1, 0}, {2, 0}});
  ASSERT_TRUE(set.ok());
  auto schedule = TopologySchedule::ExplicitList(3, {*set});
  ASSERT_TRUE(schedule.ok());
  for (int64_t t : {0, 1, 17}) {
    auto at = schedule->At(t);
    ASSERT_TRUE(at.ok());
    EXPECT_EQ(*at, *set);
  }
}

TEST(TopologyScheduleTest, AtIsPure) {
  auto schedule = TopologySchedule::ExponentialPeriodic(16);
  ASSERT_TRUE(schedule.ok());
  for (int64_t t = 0; t < 10; ++t) EXPECT_EQ(*schedule->At(t), *schedule->At(t));
}

TEST(TopologyScheduleTest, EveryRoundIsColumnStochasticAndConservesMass) {
  std::vector<TopologySchedule> schedules = {
      *TopologySchedule::StaticRing(7, 3),
      *TopologySchedule::ExponentialPeriodic(16)};
  auto listed = ParseEdgeList(4, "1<0 2<0\n3<2\n\n0<3 1<3 2<3\n");
  ASSERT_TRUE(listed.ok());
  schedules.push_back(*TopologySchedule::ExplicitList(4, *listed));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (const TopologySchedule& s : schedules) {
    for (int64_t t = 0; t < 40; ++t) {
      auto p = BuildMixingMatrix(*s.At(t));
      ASSERT_TRUE(p.ok());
      EXPECT_TRUE(p->IsColumnStochastic(1e-12));
      Eigen::VectorXd v(s.n());
      for (int k = 0; k < s.n(); ++k) v[k] = gauss(rng);
      const double before = v.sum();
      const double after = (p->weights() * v).sum();
      EXPECT_NEAR(after, before, 1e-10 * std::max(1.0, std::abs(before)));
    }
  }
}

TEST(EdgeListTest, ParsesRoundsCommentsAndBlankLines) {
  auto rounds = ParseEdgeList(3, "# header\n1<0\n\n2<1 0<2\n");
  ASSERT_TRUE(rounds.ok());
  ASSERT_EQ(rounds->size(), 3u);
  EXPECT_TRUE((*rounds)[0].Contains(1, 0));
  EXPECT_EQ((*rounds)[1].edges().size(), 3u);  // self-loops only
  EXPECT_TRUE((*rounds)[2].Contains(0, 2));
}

TEST(EdgeListTest, ReportsMalformedTokens) {
  auto bad = ParseEdgeList(3, "1<0\n1-0\n");
  EXPECT_FALSE(bad.ok());
  EXPECT_THAT(bad.status().message(), HasSubstr("line 2"));
  EXPECT_FALSE(ParseEdgeList(3, "5<0\n").ok());
}

TEST(ConnectivityTest, RingWithinSevenHops) {
  auto ring = TopologySchedule::StaticRing(8, 2);
  ASSERT_TRUE(ring.ok());
  auto report = VerifyJointConnectivity(*ring, 1, 7, 8);
  ASSERT_TRUE(report.ok());
  EXPECT_TRUE(report->satisfied);
  EXPECT_FALSE(report->witness.has_value());
}

TEST(ConnectivityTest, DisjointCliquesFailAtWindowZero) {
  std::vector<Edge> edges;
  for (int base : {0, 4}) {
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) edges.push_back({base + i, base + j});
    }
  }
  auto set = DirectedEdgeSet::Create(8, edges);
  ASSERT_TRUE(set.ok());
  auto schedule = TopologySchedule::ExplicitList(8, {*set});
  ASSERT_TRUE(schedule.ok());
  auto report = VerifyJointConnectivity(*schedule, 3, 7, 12);
  ASSERT_TRUE(report.ok());
  EXPECT_FALSE(report->satisfied);
  EXPECT_EQ(report->witness, 0);
}

// One period of the n = 8 exponential schedule reaches offsets
// {0, 1, 2, 3, 4, 6}; offsets 5 and 7 need two hops.
TEST(ConnectivityTest, ExponentialPeriodUnionHasDiameterTwo) {
  auto schedule = TopologySchedule::ExponentialPeriodic(8);
  ASSERT_TRUE(schedule.ok());
  auto joined = UnionOver(*schedule, 0, 3);
  ASSERT_TRUE(joined.ok());
  EXPECT_EQ(Diameter(*joined), 2);
  EXPECT_FALSE(VerifyJointConnectivity(*schedule, 3, 1, 24)->satisfied);
  EXPECT_TRUE(VerifyJointConnectivity(*schedule, 3, 2, 24)->satisfied);
}

TEST(ConnectivityTest, MatchesFloydWarshallOnRandomSchedules) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> coin(0, 2);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 5;
    const int rounds = 1 + trial % 4;
    std::vector<DirectedEdgeSet> sets;
    std::vector<std::vector<std::vector<int>>> adj(
        rounds, std::vector<std::vector<int>>(n, std::vector<int>(n, 0)));
    for (int r = 0; r < rounds; ++r) {
      std::vector<Edge> edges;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j && coin(rng) == 0) {
            edges.push_back({i, j});
            adj[r][j][i] = 1;
          }
        }
      }
      sets.push_back(*DirectedEdgeSet::Create(n, edges));
    }
    auto schedule = TopologySchedule::ExplicitList(n, sets);
    ASSERT_TRUE(schedule.ok());
    const int window = 1 + trial % rounds;
    const int64_t horizon = std::min<int64_t>(20, FullCycleHorizon(*schedule, window));
    for (int64_t begin = 0; begin + window <= horizon; begin += window) {
      std::vector<std::vector<int>> dist(n, std::vector<int>(n, 1 << 20));
      for (int i = 0; i < n; ++i) dist[i][i] = 0;
      for (int64_t t = begin; t < begin + window; ++t) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            if (adj[t % rounds][i][j]) dist[i][j] = std::min(dist[i][j], 1);
          }
        }
      }
      for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            dist[i][j] = std::min(dist[i][j], dist[i][k] + dist[k][j]);
          }
        }
      }
      int oracle = 0;
      for (const auto& row : dist) {
        for (int v : row) oracle = std::max(oracle, v);
      }
      const std::optional<int> measured = Diameter(*UnionOver(*schedule, begin, begin + window));
      if (oracle >= (1 << 20)) {
        EXPECT_FALSE(measured.has_value());
      } else {
        EXPECT_EQ(measured, oracle);
      }
    }
  }
}

TEST(PropagationParamsTest, DirectEvaluation) {
  auto params = ComputePropagationParams(8, 3, 2, 1, 1);
  ASSERT_TRUE(params.ok());
  EXPECT_NEAR(params->lambda, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(params->q, std::cbrt(1.0 / 9.0), 1e-15);
  EXPECT_NEAR(params->q, 0.48075, 1e-5);
  // 2 sqrt(1) 3^2 / (1/9)^(4/3).
  EXPECT_NEAR(params->c_bound, 18.0 * std::pow(9.0, 4.0 / 3.0), 1e-9);
}

TEST(PropagationParamsTest, NonPositiveLambdaIsOutOfRegime) {
  auto boundary = ComputePropagationParams(1, 1, 1, 1, 1);
  EXPECT_EQ(boundary.status().code(), absl::StatusCode::kFailedPrecondition);
  auto negative = ComputePropagationParams(8, 2, 2, 1, 1);
  EXPECT_EQ(negative.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(negative.status().message(), HasSubstr("n < U^(kappa J)"));
}

TEST(PropagationParamsTest, MaxOutDegreeOverHorizon) {
  auto ring = TopologySchedule::StaticRing(8, 2);
  EXPECT_EQ(*MaxOutDegree(*ring, 1), 3);
  auto exp8 = TopologySchedule::ExponentialPeriodic(8);
  EXPECT_EQ(*MaxOutDegree(*exp8, 3), 4);
}

}  // namespace
}  // namespace dpgossip
