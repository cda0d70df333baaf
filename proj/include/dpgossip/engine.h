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


#ifndef DPGOSSIP_ENGINE_H_
#define DPGOSSIP_ENGINE_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "dpgossip/config.h"
#include "dpgossip/models.h"
#include "dpgossip/privacy.h"
#include "dpgossip/pushsum.h"
#include "dpgossip/theory.h"
#include "dpgossip/topology.h"
#include "json.hpp"

namespace dpgossip {

// One row of the per-iteration metrics stream. Quantities indexed by t refer
// to the debiased parameters z_i^t at which iteration t evaluates gradients.
struct MetricsRecord {
  int64_t t = 0;
  // (1/n) sum_i ||grad f_i(z_i^t)||^2 with f_i the node's full local loss.
  double mean_sq_grad_norm = 0.0;
  // (1/n) sum_i ||z_i^t - x_bar^t||^2.
  double consensus_error = 0.0;
  // Global objective at the network average.
  double train_loss = 0.0;
  std::optional<double> test_accuracy;
  double current_g = 0.0;
  // alpha^(T-t), the multiplier on sigma at this step.
  double alpha_injected = 0.0;
  double eta_t = 0.0;
  double clip_residual_mean = 0.0;
  double empirical_d_tau = 0.0;
};

nlohmann::json MetricsToJson(const MetricsRecord& record);

// Data, model and network assembled from a config; deterministic in it.
struct Experiment {
  ExperimentConfig config;
  Model model;
  Dataset train;
  std::optional<Dataset> test;
  Partition partition;
  TopologySchedule topology;
  NoiseSchedule noise;
  LrSchedule lr;
  // Calibrated unless privacy.sigma overrides calibration.
  std::vector<PrivacyBudget> budgets;
  Eigen::VectorXd x0;
};

absl::StatusOr<Experiment> PrepareExperiment(const ExperimentConfig& config);

// Global objective (1/n') sum_i f_i over the n' nodes holding data, and its
// gradient.
absl::StatusOr<LossGrad> GlobalLossAndGrad(const Experiment& experiment,
                                           const Eigen::VectorXd& params);

// f* for F0: closed form for the quadratic, otherwise the best loss seen by
// `iters` steps of full-batch gradient descent from x^0.
absl::StatusOr<double> EstimateOptimalLoss(const Experiment& experiment,
                                           int iters);

struct NetworkConstants {
  int window = 1;
  std::optional<int> kappa;
  int max_out_degree = 0;
  std::optional<PropagationParams> propagation;
  // Why propagation is unavailable, when it is.
  std::string note;
};

absl::StatusOr<NetworkConstants> MeasureNetwork(const Experiment& experiment);

struct TheoryReport {
  bool enabled = false;
  std::string note;
  TheoryParams params;
  double f_star = 0.0;
  NetworkConstants network;
  std::optional<MinIterationsReport> min_iterations;
  std::optional<BoundBreakdown> bound;
  double rho_total = 0.0;
  double upsilon_total = 0.0;
};

struct NodePrivacy {
  double sigma = 0.0;
  PrivacyBudget budget;
  std::optional<PrivacySpent> spent;
};

struct RunSummary {
  ExperimentConfig config;
  uint64_t seed = 0;
  int64_t iterations = 0;
  double time_avg_mean_sq_grad_norm = 0.0;
  double final_mean_sq_grad_norm = 0.0;
  double final_consensus_error = 0.0;
  double final_train_loss = 0.0;
  std::optional<double> final_test_accuracy;
  std::vector<NodePrivacy> privacy;
  std::vector<int> node_sizes;
  std::vector<int> empty_nodes;
  TheoryReport theory;
  std::vector<std::string> warnings;
  // Average parameters after the last mixing round.
  Eigen::VectorXd final_mean_param;
};

nlohmann::json SummaryToJson(const RunSummary& summary);
nlohmann::json PartitionToJson(const Experiment& experiment);

using MetricsSink = std::function<void(const MetricsRecord&)>;
// Sees every node's state after the mixing step of iteration t.
using StateObserver =
    std::function<void(int64_t t, const std::vector<NodeState>& states)>;

// Runs T rounds with master seed `seed` (overriding config.seed), streaming
// one record per iteration to `sink` (may be empty).
absl::StatusOr<RunSummary> Run(const ExperimentConfig& config, uint64_t seed,
                               const MetricsSink& sink);
absl::StatusOr<RunSummary> RunPrepared(const Experiment& experiment,
                                       uint64_t seed, const MetricsSink& sink,
                                       const StateObserver& observer = nullptr);

// Fixed notes on readings of the method that differ from its printed text.
std::vector<std::pair<std::string, std::string>> ErratumFlags();

}  // namespace dpgossip

#endif  // DPGOSSIP_ENGINE_H_
