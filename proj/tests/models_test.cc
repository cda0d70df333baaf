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

#include "dpgossip/models.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace dpgossip {
namespace {

using ::testing::ElementsAre;
using ::testing::IsEmpty;

double MaxRelativeFdError(const Model& model, const Dataset& data,
                          const Eigen::VectorXd& x) {
  const std::vector<int> batch = AllIndices(data.size());
  const Eigen::VectorXd grad = model.LossAndGrad(x, data, batch)->grad;
  const double h = 1e-6;
  Eigen::VectorXd fd(x.size());
  for (int k = 0; k < x.size(); ++k) {
    Eigen::VectorXd plus = x, minus = x;
    plus[k] += h;
    minus[k] -= h;
    fd[k] = (*model.Loss(plus, data, batch) - *model.Loss(minus, data, batch)) / (2 * h);
  }
  return (grad - fd).norm() / std::max(1.0, fd.norm());
}

TEST(ModelTest, IdentityQuadratic) {
  auto model = Model::Quadratic(Eigen::MatrixXd::Identity(3, 3));
  ASSERT_TRUE(model.ok());
  Dataset data;
  data.features = Eigen::MatrixXd::Zero(1, 3);
  data.labels = {0};
  Eigen::VectorXd p(3);
  p << 1, -2, 0.5;
  auto lg = model->LossAndGrad(p, data, std::vector<int>{0});
  ASSERT_TRUE(lg.ok());
  EXPECT_DOUBLE_EQ(lg->loss, 0.5 * p.squaredNorm());
  EXPECT_EQ(lg->grad, p);
  EXPECT_THAT(model->LipschitzConstant(data), testing::Optional(1.0));
}

TEST(ModelTest, RejectsIndefiniteCurvature) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 0, 0, -1;
  EXPECT_FALSE(Model::Quadratic(a).ok());
  a << 1, 2, 0, 1;
  EXPECT_FALSE(Model::Quadratic(a).ok());
}

TEST(ModelTest, EmptyBatchIsAnError) {
  auto model = Model::Logistic(2, 0.0);
  auto problem = MakeSynthetic({.samples = 10});
  EXPECT_EQ(model->LossAndGrad(Eigen::VectorXd::Zero(3), problem->data, {}).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(ModelTest, DuplicatedSampleMatchesSingleSample) {
  auto model = Model::Mlp(3, 4, 3);
  auto problem = MakeSynthetic({.kind = Model::Kind::kMlp, .samples = 9, .dim = 3, .classes = 3});
  ASSERT_TRUE(problem.ok());
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(model->dim(), -0.5, 0.5);
  auto one = model->LossAndGrad(x, problem->data, std::vector<int>{4});
  auto many = model->LossAndGrad(x, problem->data, std::vector<int>{4, 4, 4, 4});
  EXPECT_NEAR(one->loss, many->loss, 1e-15);
  EXPECT_LT((one->grad - many->grad).norm(), 1e-15);
}

TEST(ModelTest, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss;
  for (Model::Kind kind : {Model::Kind::kQuadratic, Model::Kind::kLogistic, Model::Kind::kMlp}) {
    auto problem = MakeSynthetic({.kind = kind, .samples = 30, .dim = 4,
                                  .classes = kind == Model::Kind::kMlp ? 3 : 2, .seed = 5});
    ASSERT_TRUE(problem.ok());
    absl::StatusOr<Model> model =
        kind == Model::Kind::kQuadratic ? Model::Quadratic(problem->curvature)
        : kind == Model::Kind::kLogistic ? Model::Logistic(4, 0.05)
                                         : Model::Mlp(4, 5, 3);
    ASSERT_TRUE(model.ok());
    for (int point = 0; point < 100; ++point) {
      Eigen::VectorXd x(model->dim());
      for (int k = 0; k < x.size(); ++k) x[k] = gauss(rng);
      EXPECT_LT(MaxRelativeFdError(*model, problem->data, x), 1e-5);
    }
  }
}

TEST(ModelTest, LogisticLipschitzBoundsCurvature) {
  auto problem = MakeSynthetic({.samples = 50, .dim = 3, .seed = 2});
  auto model = Model::Logistic(3, 0.1);
  auto lip = model->LipschitzConstant(problem->data);
  ASSERT_TRUE(lip.has_value());
  // Secant slopes along random directions never exceed the bound.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  const std::vector<int> all = AllIndices(50);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(4), y(4);
    for (int k = 0; k < 4; ++k) {
      x[k] = gauss(rng);
      y[k] = gauss(rng);
    }
    const double slope = (model->LossAndGrad(x, problem->data, all)->grad -
                          model->LossAndGrad(y, problem->data, all)->grad).norm() /
                         (x - y).norm();
    EXPECT_LE(slope, *lip + 1e-12);
  }
  EXPECT_FALSE(Model::Mlp(3, 2, 2)->LipschitzConstant(problem->data).has_value());
}

TEST(SyntheticTest, DeterministicAndWellFormed) {
  SyntheticSpec spec{.kind = Model::Kind::kQuadratic, .samples = 20, .dim = 5, .seed = 7};
  auto a = MakeSynthetic(spec);
  auto b = MakeSynthetic(spec);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a->data.features, b->data.features);
  EXPECT_EQ(a->curvature, b->curvature);
  EXPECT_EQ(a->curvature, a->curvature.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a->curvature);
  EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(SyntheticTest, WellSeparatedBlobsAreCentroidSeparable) {
  auto problem = MakeSynthetic({.samples = 400, .dim = 3, .separation = 10.0, .seed = 13});
  ASSERT_TRUE(problem.ok());
  const Dataset& data = problem->data;
  Eigen::MatrixXd centroid = Eigen::MatrixXd::Zero(2, 3);
  Eigen::Vector2d count = Eigen::Vector2d::Zero();
  for (int i = 0; i < data.size(); ++i) {
    centroid.row(data.labels[i]) += data.features.row(i);
    count[data.labels[i]] += 1;
  }
  for (int c = 0; c < 2; ++c) centroid.row(c) /= count[c];
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    const double d0 = (data.features.row(i) - centroid.row(0)).squaredNorm();
    const double d1 = (data.features.row(i) - centroid.row(1)).squaredNorm();
    correct += (d0 < d1 ? 0 : 1) == data.labels[i];
  }
  EXPECT_EQ(correct, data.size());
}

TEST(SampleBatchTest, FullRatioTakesEverything) {
  std::vector<int> slice = {3, 8, 9, 12};
  std::mt19937_64 rng(1);
  EXPECT_EQ(SampleBatch(slice, 1.0, rng), slice);
}

TEST(SampleBatchTest, ExpectedSizeMatchesRatio) {
  std::vector<int> slice = AllIndices(100);
  std::mt19937_64 rng(99);
  double total = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) total += SampleBatch(slice, 0.1, rng).size();
  EXPECT_NEAR(total / draws, 10.0, 0.2);
}

TEST(SampleBatchTest, NeverEmptyAndReproducible) {
  std::vector<int> slice = AllIndices(3);
  std::mt19937_64 a(5), b(5);
  for (int i = 0; i < 200; ++i) {
    auto batch = SampleBatch(slice, 0.01, a);
    EXPECT_FALSE(batch.empty());
    EXPECT_EQ(batch, SampleBatch(slice, 0.01, b));
  }
}

std::vector<int> CyclicLabels(int samples, int classes) {
  std::vector<int> labels(samples);
  for (int i = 0; i < samples; ++i) labels[i] = i % classes;
  return labels;
}

TEST(PartitionTest, SingleNodeTakesAll) {
  auto p = DirichletPartition(CyclicLabels(10, 2), 2, {.alpha_conc = 0.5, .n = 1});
  ASSERT_TRUE(p.ok());
  EXPECT_EQ(p->node_indices[0], AllIndices(10));
  EXPECT_THAT(p->empty_nodes, IsEmpty());
}

TEST(PartitionTest, ExhaustiveDisjointAndDeterministic) {
  const std::vector<int> labels = CyclicLabels(500, 10);
  for (double conc : {0.05, 1.0, 50.0}) {
    PartitionSpec spec{.alpha_conc = conc, .n = 8, .seed = 4};
    auto p = DirichletPartition(labels, 10, spec);
    ASSERT_TRUE(p.ok());
    std::vector<int> seen;
    for (const auto& node : p->node_indices) seen.insert(seen.end(), node.begin(), node.end());
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(seen, AllIndices(500));
    EXPECT_EQ(p->node_indices, DirichletPartition(labels, 10, spec)->node_indices);
    for (int i = 0; i < 8; ++i) {
      const bool flagged = std::count(p->empty_nodes.begin(), p->empty_nodes.end(), i) > 0;
      EXPECT_EQ(flagged, p->node_indices[i].empty());
    }
  }
}

double MeanTotalVariation(const std::vector<int>& labels, int classes,
                          const Partition& p) {
  double sum = 0.0;
  int counted = 0;
  for (const auto& node : p.node_indices) {
    if (node.empty()) continue;
    std::vector<double> hist(classes, 0.0);
    for (int idx : node) hist[labels[idx]] += 1.0 / node.size();
    double tv = 0.0;
    for (int c = 0; c < classes; ++c) tv += std::abs(hist[c] - 1.0 / classes);
    sum += 0.5 * tv;
    ++counted;
  }
  return sum / counted;
}

TEST(PartitionTest, ConcentrationControlsHeterogeneity) {
  const std::vector<int> labels = CyclicLabels(1000, 10);
  double smooth = 0.0, skewed = 0.0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    smooth += MeanTotalVariation(labels, 10, *DirichletPartition(labels, 10, {100.0, 8, seed}));
    skewed += MeanTotalVariation(labels, 10, *DirichletPartition(labels, 10, {0.1, 8, seed}));
  }
  EXPECT_LT(smooth, skewed);
}

TEST(PartitionTest, RejectsBadSpec) {
  EXPECT_FALSE(DirichletPartition({0, 1}, 2, {.alpha_conc = 0.0, .n = 2}).ok());
  EXPECT_FALSE(DirichletPartition({0, 1}, 2, {.alpha_conc = 1.0, .n = 0}).ok());
}

TEST(CsvTest, LoadsHeaderFeaturesAndLabels) {
  const auto path = std::filesystem::temp_directory_path() / "dpgossip_models_test.csv";
  {
    std::ofstream out(path);
    out << "f1,f2,label\n0.5,-1,1\n2,3.25,0\n";
  }
  auto data = LoadCsvDataset(path.string());
  ASSERT_TRUE(data.ok()) << data.status();
  EXPECT_EQ(data->size(), 2);
  EXPECT_EQ(data->feature_dim(), 2);
  EXPECT_DOUBLE_EQ(data->features(1, 1), 3.25);
  EXPECT_THAT(data->labels, ElementsAre(1, 0));
  {
    std::ofstream out(path);
    out << "f1,label\n0.5,x\n";
  }
  EXPECT_FALSE(LoadCsvDataset(path.string()).ok());
  std::filesystem::remove(path);
  EXPECT_FALSE(LoadCsvDataset(path.string()).ok());
}

TEST(SplitTest, PartitionsSamples) {
  auto problem = MakeSynthetic({.samples = 50});
  TrainTestSplit split = SplitTrainTest(problem->data, 0.2, 3);
  EXPECT_EQ(split.train.size() + split.test.size(), 50);
  EXPECT_EQ(split.test.size(), 10);
}

TEST(HeterogeneityTest, ReplicatedDataHasNoDissimilarity) {
  auto problem = MakeSynthetic({.kind = Model::Kind::kQuadratic, .samples = 20, .dim = 2, .seed = 1});
  auto model = Model::Quadratic(problem->curvature);
  Partition same;
  same.node_indices = {AllIndices(20), AllIndices(20), AllIndices(20)};
  auto het = EstimateHeterogeneity(*model, problem->data, same,
                                   Eigen::VectorXd::Zero(2), 1.0, 4, 0);
  ASSERT_TRUE(het.ok());
  EXPECT_NEAR(het->a, 0.0, 1e-12);
  EXPECT_GT(het->m, 0.0);
}

}  // namespace
}  // namespace dpgossip
