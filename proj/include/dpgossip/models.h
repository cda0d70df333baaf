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

#ifndef DPGOSSIP_MODELS_H_
#define DPGOSSIP_MODELS_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"

namespace dpgossip {

struct Dataset {
  // One sample per row.
  Eigen::MatrixXd features;
  std::vector<int> labels;
  int num_classes = 1;

  int size() const { return static_cast<int>(labels.size()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
};

struct LossGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

// Local objective f_i(x; b). Losses and gradients are batch means.
class Model {
 public:
  enum class Kind { kQuadratic, kLogistic, kMlp };

  // f(x; b) = 1/2 x^T A x - b^T x where b is the sample's feature row.
  // A must be symmetric positive definite.
  static absl::StatusOr<Model> Quadratic(Eigen::MatrixXd curvature);
  // Binary logistic regression on labels {0, 1} with a bias term and L2
  // penalty (l2 / 2) ||w||^2 on the weights. dim = input_dim + 1.
  static absl::StatusOr<Model> Logistic(int input_dim, double l2);
  // tanh hidden layer followed by softmax cross-entropy.
  // Parameter layout: W1 (hidden x input, row-major), b1, W2 (classes x
  // hidden, row-major), b2.
  static absl::StatusOr<Model> Mlp(int input_dim, int hidden, int classes);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  int input_dim() const { return input_dim_; }
  int hidden() const { return hidden_; }
  int classes() const { return classes_; }
  double l2() const { return l2_; }
  const Eigen::MatrixXd& curvature() const { return curvature_; }

  absl::StatusOr<LossGrad> LossAndGrad(const Eigen::VectorXd& params,
                                       const Dataset& data,
                                       std::span<const int> batch) const;
  absl::StatusOr<double> Loss(const Eigen::VectorXd& params,
                              const Dataset& data,
                              std::span<const int> batch) const;
  // Fraction of correctly classified samples; unavailable for quadratic.
  absl::StatusOr<double> Accuracy(const Eigen::VectorXd& params,
                                  const Dataset& data,
                                  std::span<const int> indices) const;

  // Exact gradient Lipschitz constant when known: lambda_max(A) for the
  // quadratic, 1/4 lambda_max(X^T X / N) + l2 (an upper bound) for logistic.
  std::optional<double> LipschitzConstant(const Dataset& data) const;

 private:
  Model() = default;

  Kind kind_ = Kind::kQuadratic;
  int dim_ = 0;
  int input_dim_ = 0;
  int hidden_ = 0;
  int classes_ = 0;
  double l2_ = 0.0;
  Eigen::MatrixXd curvature_;
};

std::vector<int> AllIndices(int size);

struct SyntheticProblem {
  Dataset data;
  // Curvature A of the quadratic kind; empty otherwise.
  Eigen::MatrixXd curvature;
};

struct SyntheticSpec {
  Model::Kind kind = Model::Kind::kLogistic;
  int samples = 100;
  int dim = 2;
  // Distance between class means in units of the per-class standard
  // deviation.
  double separation = 4.0;
  // Number of blobs; the logistic kind always uses 2.
  int classes = 2;
  uint64_t seed = 0;
};

// Deterministic in `spec`. Logistic: two Gaussian blobs. MLP: `classes`
// blobs. Quadratic: A = M^T M / d + 0.1 I and per-sample linear terms drawn
// from class-dependent Gaussians.
absl::StatusOr<SyntheticProblem> MakeSynthetic(const SyntheticSpec& spec);

// Header row, float feature columns, integer label in the last column.
absl::StatusOr<Dataset> LoadCsvDataset(const std::string& path);

struct TrainTestSplit {
  Dataset train;
  Dataset test;
};
TrainTestSplit SplitTrainTest(const Dataset& data, double test_fraction,
                              uint64_t seed);

// Independent Bernoulli(ratio) inclusion of each index of `slice`. An empty
// draw is retried once, then replaced by one uniformly drawn index.
std::vector<int> SampleBatch(std::span<const int> slice, double ratio,
                             std::mt19937_64& rng);

struct PartitionSpec {
  double alpha_conc = 1.0;
  int n = 1;
  uint64_t seed = 0;
};

struct Partition {
  std::vector<std::vector<int>> node_indices;
  // Nodes that received no samples.
  std::vector<int> empty_nodes;
};

// For every class, a Dirichlet(alpha_conc 1_n) draw splits that class's
// samples across nodes.
absl::StatusOr<Partition> DirichletPartition(const std::vector<int>& labels,
                                             int num_classes,
                                             const PartitionSpec& spec);

struct Heterogeneity {
  // max over probed x and nodes of ||grad f_i(x) - grad f(x)||.
  double a = 0.0;
  // max over probed x of sqrt((1/n) sum_i max_b ||grad f_i(x; b) - grad f(x)||^2).
  double m = 0.0;
};

// Brute-force maxima over x0 +- radius along each coordinate plus `extra`
// seeded random points in the same box.
absl::StatusOr<Heterogeneity> EstimateHeterogeneity(
    const Model& model, const Dataset& data, const Partition& partition,
    const Eigen::VectorXd& x0, double radius, int extra, uint64_t seed);

}  // namespace dpgossip

#endif  // DPGOSSIP_MODELS_H_
