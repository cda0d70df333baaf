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

#include "dpgossip/engine.h"

#include <cmath>
#include <string>
#include <vector>

#include "dpgossip/verify.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpgossip {
namespace {

using ::testing::AllOf;
using ::testing::Contains;
using ::testing::HasSubstr;
using ::testing::Key;
using ::testing::SizeIs;

ExperimentConfig QuadraticConfig() {
  ExperimentConfig c;
  c.algorithm = Algorithm::kSdlr;
  c.n = 8;
  c.total = 400;
  c.topology.k = 1;
  c.noise.s = 0.0;
  c.lr.eta = 0.3;
  c.clip.g0 = 1e6;
  c.clip.psi = 1.0;
  c.privacy.sigma = 0.0;
  c.model.kind = Model::Kind::kQuadratic;
  c.data.samples = 64;
  c.data.dim = 4;
  c.data.partition = PartitionMode::kReplicate;
  return c;
}

ExperimentConfig NoisyLogisticConfig() {
  ExperimentConfig c;
  c.algorithm = Algorithm::kAdpVrsgp;
  c.n = 4;
  c.total = 60;
  c.topology.kind = TopologySchedule::Kind::kExponentialPeriodic;
  c.noise.form = NoiseSchedule::Form::kPower;
  c.noise.k = 1.0;
  c.noise.s = 0.25;
  c.lr.eta = 0.5;
  c.lr.xi = 0.3;
  c.clip.g0 = 0.5;
  c.clip.psi = 0.99;
  c.fusion.theta = 0.4;
  c.privacy.epsilon = {1.0, 2.0, 3.0, 4.0};
  c.privacy.sampling_ratio = 0.5;
  c.model.l2 = 0.01;
  c.data.samples = 120;
  c.data.test_fraction = 0.25;
  return c;
}

std::vector<MetricsRecord> Collect(const ExperimentConfig& config, uint64_t seed,
                                   RunSummary* summary = nullptr) {
  std::vector<MetricsRecord> records;
  auto result = dpgossip::Run(config, seed, [&](const MetricsRecord& r) { records.push_back(r); });
  EXPECT_TRUE(result.ok()) << result.status();
  if (summary != nullptr && result.ok()) *summary = *result;
  return records;
}

TEST(EngineTest, DegenerateRunIsPlainDecentralizedSgd) {
  auto gap = DegenerateReductionGap(DegenerateConfig(200), 11);
  ASSERT_TRUE(gap.ok()) << gap.status();
  EXPECT_LE(*gap, 1e-10);
}

TEST(EngineTest, SameSeedReproducesMetricsBitForBit) {
  const ExperimentConfig config = NoisyLogisticConfig();
  std::vector<MetricsRecord> a = Collect(config, 5);
  std::vector<MetricsRecord> b = Collect(config, 5);
  std::vector<MetricsRecord> other = Collect(config, 6);
  ASSERT_THAT(a, SizeIs(60));
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(MetricsToJson(a[t]).dump(), MetricsToJson(b[t]).dump());
    differs |= MetricsToJson(a[t]).dump() != MetricsToJson(other[t]).dump();
  }
  EXPECT_TRUE(differs);
}

TEST(EngineTest, RecordedStepSizesFollowTheCoefficient) {
  const ExperimentConfig config = NoisyLogisticConfig();
  auto noise = BuildNoiseSchedule(config);
  auto lr = BuildLrSchedule(config);
  for (const MetricsRecord& r : Collect(config, 2)) {
    EXPECT_EQ(r.eta_t, lr->eta / *BetaAt(*noise, *lr, r.t)) << "t = " << r.t;
    EXPECT_EQ(r.alpha_injected, noise->Alpha(config.total - r.t));
    EXPECT_TRUE(std::isfinite(r.train_loss));
    EXPECT_TRUE(r.test_accuracy.has_value());
  }
}

TEST(EngineTest, ClipThresholdDecaysEveryIteration) {
  const ExperimentConfig config = NoisyLogisticConfig();
  std::vector<MetricsRecord> records = Collect(config, 1);
  for (size_t t = 1; t < records.size(); ++t) {
    EXPECT_DOUBLE_EQ(records[t].current_g, 0.99 * records[t - 1].current_g);
  }
}

TEST(EngineTest, NoiselessQuadraticConverges) {
  std::vector<MetricsRecord> records = Collect(QuadraticConfig(), 3);
  ASSERT_THAT(records, SizeIs(400));
  for (size_t t = 51; t < records.size(); ++t) {
    EXPECT_LE(records[t].mean_sq_grad_norm, records[t - 1].mean_sq_grad_norm);
  }
  EXPECT_LT(records.back().mean_sq_grad_norm, 1e-6);
}

TEST(EngineTest, LipschitzConstantIsLargestCurvatureEigenvalue) {
  RunSummary summary;
  Collect(QuadraticConfig(), 3, &summary);
  auto problem = MakeSynthetic({.kind = Model::Kind::kQuadratic, .samples = 64,
                                .dim = 4, .seed = 0});
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(problem->curvature);
  ASSERT_TRUE(summary.theory.enabled) << summary.theory.note;
  EXPECT_NEAR(summary.theory.params.L, eig.eigenvalues().maxCoeff(), 1e-8);
  EXPECT_EQ(summary.theory.params.d, 4);
  EXPECT_GE(summary.theory.params.f0, 0.0);
}

TEST(EngineTest, BoundHoldsOnInRegimeQuadratic) {
  RunSummary summary;
  Collect(QuadraticConfig(), 4, &summary);
  ASSERT_TRUE(summary.theory.bound.has_value()) << summary.theory.note;
  ASSERT_TRUE(summary.theory.network.propagation.has_value());
  EXPECT_GT(summary.theory.network.propagation->lambda, 0.0);
  EXPECT_LE(summary.time_avg_mean_sq_grad_norm, summary.theory.bound->total);
  EXPECT_EQ(summary.theory.bound->noise_term, 0.0);
}

TEST(EngineTest, DivergenceAbortsWithIteration) {
  ExperimentConfig config = QuadraticConfig();
  config.lr.eta = 1e6;
  config.clip.g0 = 1e300;
  config.data.partition = PartitionMode::kDirichlet;
  auto result = dpgossip::Run(config, 1, nullptr);
  EXPECT_EQ(result.status().code(), absl::StatusCode::kInternal);
  EXPECT_THAT(result.status().message(),
              AllOf(HasSubstr("non-finite"), HasSubstr("at iteration")));
}

TEST(EngineTest, CalibrationPerNode) {
  auto e = PrepareExperiment(NoisyLogisticConfig());
  ASSERT_TRUE(e.ok()) << e.status();
  ASSERT_THAT(e->budgets, SizeIs(4));
  for (int i = 1; i < 4; ++i) {
    EXPECT_LT(*e->budgets[i].sigma, *e->budgets[i - 1].sigma);
    EXPECT_NEAR(*e->budgets[i].sigma * e->budgets[i].epsilon,
                *e->budgets[0].sigma * e->budgets[0].epsilon, 1e-12);
  }
}

TEST(EngineTest, CalibrationErrorsNameTheNode) {
  ExperimentConfig config = NoisyLogisticConfig();
  config.privacy.epsilon = {1.0, 1.0, 1e3, 1.0};
  auto e = PrepareExperiment(config);
  EXPECT_EQ(e.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_THAT(e.status().message(), HasSubstr("privacy (node 2)"));
}

TEST(EngineTest, SummaryJsonCarriesAccountingAndErrata) {
  RunSummary summary;
  Collect(NoisyLogisticConfig(), 8, &summary);
  nlohmann::json json = SummaryToJson(summary);
  ASSERT_TRUE(json.contains("privacy"));
  ASSERT_EQ(json["privacy"].size(), 4u);
  EXPECT_THAT(json["privacy"][0].dump(), HasSubstr("constants-dependent"));
  EXPECT_TRUE(json.contains("errata"));
  EXPECT_THAT(ErratumFlags(), Contains(Key("optimal_p")));
  // The echo records the seed the run actually used.
  ExperimentConfig expected = NoisyLogisticConfig();
  expected.seed = 8;
  EXPECT_EQ(*ConfigFromJson(json["config"]), expected);
}

TEST(EngineTest, MetricsJsonUsesSnakeCaseKeys) {
  MetricsRecord r;
  r.t = 3;
  nlohmann::json json = MetricsToJson(r);
  for (const char* key : {"t", "mean_sq_grad_norm", "consensus_error", "train_loss",
                          "test_accuracy", "current_g", "alpha_injected", "eta_t",
                          "clip_residual_mean", "empirical_d_tau"}) {
    EXPECT_TRUE(json.contains(key)) << key;
  }
  EXPECT_TRUE(json["test_accuracy"].is_null());
}

TEST(EngineTest, EmptyNodesAreReported) {
  ExperimentConfig config = NoisyLogisticConfig();
  config.n = 8;
  config.topology.kind = TopologySchedule::Kind::kStaticRing;
  config.privacy.epsilon = {1.0};
  config.data.samples = 16;
  config.data.alpha_conc = 0.01;
  config.theory.enabled = false;
  RunSummary summary;
  Collect(config, 1, &summary);
  EXPECT_FALSE(summary.empty_nodes.empty());
  EXPECT_THAT(summary.warnings, Contains(HasSubstr("hold no data")));
}

TEST(EngineTest, QuadraticOptimumIsClosedForm) {
  auto e = PrepareExperiment(QuadraticConfig());
  ASSERT_TRUE(e.ok());
  auto f_star = EstimateOptimalLoss(*e, 0);
  ASSERT_TRUE(f_star.ok());
  const Eigen::VectorXd b = e->train.features.colwise().mean();
  const Eigen::VectorXd x_star = e->model.curvature().ldlt().solve(b);
  EXPECT_NEAR(*f_star, GlobalLossAndGrad(*e, x_star)->loss, 1e-12);
  EXPECT_LT(GlobalLossAndGrad(*e, x_star)->grad.norm(), 1e-12);
}

}  // namespace
}  // namespace dpgossip
