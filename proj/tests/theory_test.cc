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

#include "dpgossip/theory.h"

#include <cmath>

#include "dpgossip/fusion.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpgossip {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

TheoryParams Unit() {
  return TheoryParams{.L = 1, .a = 1, .m = 1, .c = 1, .q = 0, .lambda = 1,
                      .f0 = 1, .x0_norm = 1, .d = 1};
}

TEST(MinIterationsTest, TermByTermAtHalf) {
  auto report = MinIterations(Unit(), 1, 0.5, 1.0);
  ASSERT_TRUE(report.ok());
  EXPECT_THAT(report->terms, ElementsAre(4.0, 162.0, 1.0, 1.0, 2.0, 81.0));
  EXPECT_EQ(report->dominant, 1);
  EXPECT_EQ(report->floor, 162);
  EXPECT_FALSE(report->overflow);
}

TEST(MinIterationsTest, FirstTermIsLinearInNodes) {
  auto one = MinIterations(Unit(), 3, 0.5, 1.0);
  auto four = MinIterations(Unit(), 12, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(four->terms[0], 4.0 * one->terms[0]);
}

TEST(MinIterationsTest, IsolatedAgentsOverflow) {
  TheoryParams theory = Unit();
  theory.q = 1.0;
  auto report = MinIterations(theory, 4, 0.0, 1.0);
  ASSERT_TRUE(report.ok());
  EXPECT_TRUE(report->overflow);
  EXPECT_EQ(report->floor, kIterationOverflow);
  theory.q = 1.0 - 1e-12;
  EXPECT_TRUE(MinIterations(theory, 4, 0.0, 1.0)->overflow);
}

TEST(MinIterationsTest, RejectsExponentBlowUp) {
  EXPECT_EQ(MinIterations(Unit(), 1, -0.5, 1.0).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(ConvergenceBoundTest, AllOnesAudit) {
  const double h = NoiseFactor(0.5, 6);
  auto bound = ConvergenceBound(Unit(), 1, 1, 0.5, 6, 1.0, 1.0, 1.0);
  ASSERT_TRUE(bound.ok());
  // (6 + 108 + 18 * 4) / 1, 6 * (1 + 9), 110.
  EXPECT_NEAR(bound->a1, 186.0, 1e-9);
  EXPECT_NEAR(bound->a2, 60.0, 1e-9);
  EXPECT_NEAR(bound->a3, 110.0, 1e-9);
  EXPECT_NEAR(bound->h, h, 1e-12);
  EXPECT_EQ(bound->m_noise, 1.0);
  EXPECT_NEAR(bound->fixed_term, 4.0 + 5.0 * 186.0, 1e-9);
  EXPECT_NEAR(bound->noise_term, 4.0 * h * 301.0, 1e-9);
  EXPECT_NEAR(bound->bias_term, (4.0 + 550.0) * 2.0, 1e-9);
  EXPECT_NEAR(bound->total, bound->fixed_term + bound->noise_term + bound->bias_term, 1e-9);
}

TEST(ConvergenceBoundTest, OnlyFixedTermWithoutErrorSources) {
  auto bound = ConvergenceBound(Unit(), 4, 100, 0.0, 1, 0.0, 0.0, 0.0);
  ASSERT_TRUE(bound.ok());
  EXPECT_GT(bound->fixed_term, 0.0);
  EXPECT_EQ(bound->noise_term, 0.0);
  EXPECT_EQ(bound->bias_term, 0.0);
}

TEST(ConvergenceBoundTest, DoublingHorizonScalesByRootTwo) {
  auto a = ConvergenceBound(Unit(), 4, 100, 0.3, 3, 0.7, 2.0, 0.5);
  auto b = ConvergenceBound(Unit(), 4, 200, 0.3, 3, 0.7, 2.0, 0.5);
  EXPECT_NEAR(b->fixed_term / a->fixed_term, M_SQRT1_2, 1e-14);
  EXPECT_NEAR(b->noise_term / a->noise_term, M_SQRT1_2, 1e-14);
  EXPECT_NEAR(b->bias_term / a->bias_term, M_SQRT1_2, 1e-14);
}

TEST(ConvergenceBoundTest, RejectsUnitRate) {
  TheoryParams theory = Unit();
  theory.q = 1.0;
  EXPECT_EQ(ConvergenceBound(theory, 1, 1, 0, 1, 0, 0, 0).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(NoiseSumTest, MatchesBudgetFormWhenCalibrated) {
  auto schedule = NoiseSchedule::Stepwise(1.0, 10.0, 5, 0.2, 200);
  LrSchedule lr{.eta = 0.3, .xi = 0.5};
  std::vector<PrivacyBudget> budgets(3);
  for (int i = 0; i < 3; ++i) {
    budgets[i].epsilon = 0.5 + i;
    budgets[i].sampling_ratio = 0.3;
    ASSERT_TRUE(CalibrateSigma(budgets[i], 0.1, *schedule).ok());
  }
  auto m = ComputeNoiseSumM(budgets, 0.1, *schedule, lr);
  ASSERT_TRUE(m.ok());
  double sigma_sq = 0.0;
  for (const auto& b : budgets) sigma_sq += *b.sigma * *b.sigma;
  double weighted = 0.0;
  for (int64_t t = 0; t < 200; ++t) {
    const double beta = *BetaAt(*schedule, lr, t);
    weighted += std::pow(schedule->Alpha(200 - t), 2) / (beta * beta);
  }
  EXPECT_NEAR(*m, 0.09 / 9.0 * sigma_sq * weighted, 1e-12 * *m);
  EXPECT_GT(*BudgetNoiseMean(budgets, 0.1), 0.0);
}

TEST(ScheduleSumTest, ThreeExponentRanges) {
  const double a1 = 1.5, a2 = 2.0, a3 = 2.0;
  EXPECT_NEAR(*ScheduleSumConstant(a1, a2, a3, 0.2),
              a3 * a1 * a1 * (1 + std::pow(1 + a2, 0.6) / 0.6), 1e-12);
  EXPECT_NEAR(*ScheduleSumConstant(a1, a2, a3, 0.5),
              a3 * a1 * a1 * (1 + (1 + std::log(1 + 1 / a2)) / std::log(2.0)), 1e-12);
  EXPECT_NEAR(*ScheduleSumConstant(a1, a2, a3, 0.8),
              a3 * a1 * a1 * (1 + std::pow(a2, -0.6) / 0.6), 1e-12);
}

RegimeInputs DefaultRegime(double p, int64_t total) {
  TheoryParams theory = Unit();
  theory.q = 0.5;
  return RegimeInputs{.p = p, .n = 1, .total = total, .s = 0.25, .a1 = 1,
                      .a2 = 10, .a3 = 5, .budget_mean = 0.01, .h = 1.0,
                      .theory = theory};
}

TEST(RegimeTest, LabelsFollowSignOfExponent) {
  EXPECT_EQ(RefinedRegimeBound(DefaultRegime(0.0, 1000))->label, "(log T)^2 / sqrt(nT)");
  EXPECT_EQ(RefinedRegimeBound(DefaultRegime(0.1, 1000))->label, "sqrt(T/n)");
  EXPECT_EQ(RefinedRegimeBound(DefaultRegime(-0.1, 1000))->label,
            "1 / (sqrt(n) T^(1/2 + 2p))");
}

TEST(RegimeTest, RejectsOutOfRangeExponent) {
  auto bad = RefinedRegimeBound(DefaultRegime(0.5, 1000));
  EXPECT_EQ(bad.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(bad.status().message(), HasSubstr("outside"));
  EXPECT_FALSE(RefinedRegimeBound(DefaultRegime(-0.5, 1000)).ok());
}

TEST(RegimeTest, OrderedAtTenThousand) {
  const double low = RefinedRegimeBound(DefaultRegime(-0.1, 10000))->total;
  const double mid = RefinedRegimeBound(DefaultRegime(0.0, 10000))->total;
  const double high = RefinedRegimeBound(DefaultRegime(0.1, 10000))->total;
  EXPECT_LT(low, mid);
  EXPECT_LT(mid, high);
  auto crossover = RegimeCrossover(DefaultRegime(0.0, 2), 10000);
  ASSERT_TRUE(crossover.ok());
  EXPECT_LE(*crossover, 10000);
}

TEST(OptimalPTest, ReportedExponents) {
  EXPECT_NEAR(OptimalP(0.2), 0.1, 1e-15);
  EXPECT_NEAR(OptimalP(0.25), 0.0, 1e-15);
  EXPECT_NEAR(OptimalP(0.3), -0.1, 1e-15);
}

}  // namespace
}  // namespace dpgossip
