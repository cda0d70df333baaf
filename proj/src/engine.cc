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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "dpgossip/fusion.h"
#include "dpgossip/pushsum.h"
#include "dpgossip/rng.h"
#include "dpgossip/status_macros.h"

namespace dpgossip {
namespace {

// JSON has no infinities; they are written as null.
nlohmann::json Number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json Optional(const std::optional<double>& v) {
  return v ? Number(*v) : nlohmann::json(nullptr);
}

absl::StatusOr<TopologySchedule> BuildTopology(const ExperimentConfig& c) {
  switch (c.topology.kind) {
    case TopologySchedule::Kind::kStaticRing:
      return TopologySchedule::StaticRing(c.n, c.topology.k);
    case TopologySchedule::Kind::kExponentialPeriodic:
      return TopologySchedule::ExponentialPeriodic(c.n);
    case TopologySchedule::Kind::kExplicitList:
      return LoadEdgeListSchedule(c.n, c.topology.path);
  }
  return absl::InternalError("unknown topology kind");
}

struct LoadedData {
  Dataset data;
  Eigen::MatrixXd curvature;
};

absl::StatusOr<LoadedData> LoadData(const ExperimentConfig& c) {
  LoadedData out;
  if (c.data.source == DataSource::kCsv) {
    ASSIGN_OR_RETURN(out.data, LoadCsvDataset(c.data.path));
    return out;
  }
  SyntheticSpec spec;
  spec.kind = c.model.kind;
  spec.samples = c.data.samples;
  spec.dim = c.data.dim;
  spec.separation = c.data.separation;
  spec.classes = c.data.classes;
  spec.seed = c.data.seed;
  ASSIGN_OR_RETURN(SyntheticProblem problem, MakeSynthetic(spec));
  out.data = std::move(problem.data);
  out.curvature = std::move(problem.curvature);
  return out;
}

absl::StatusOr<Model> BuildModel(const ExperimentConfig& c,
                                 const LoadedData& loaded) {
  switch (c.model.kind) {
    case Model::Kind::kQuadratic:
      return Model::Quadratic(loaded.curvature);
    case Model::Kind::kLogistic:
      if (loaded.data.num_classes > 2) {
        return absl::InvalidArgumentError(
            "model.kind: logistic needs labels in {0, 1}");
      }
      return Model::Logistic(loaded.data.feature_dim(), c.model.l2);
    case Model::Kind::kMlp:
      return Model::Mlp(loaded.data.feature_dim(), c.model.hidden,
                        std::max(loaded.data.num_classes, 2));
  }
  return absl::InternalError("unknown model kind");
}

Dataset Subset(const Dataset& data, const std::vector<int>& indices) {
  Dataset out;
  out.num_classes = data.num_classes;
  out.features.resize(static_cast<Eigen::Index>(indices.size()),
                      data.feature_dim());
  out.labels.resize(indices.size());
  for (size_t r = 0; r < indices.size(); ++r) {
    out.features.row(r) = data.features.row(indices[r]);
    out.labels[r] = data.labels[indices[r]];
  }
  return out;
}

std::vector<int> ActiveNodes(const Partition& partition) {
  std::vector<int> active;
  for (int i = 0; i < static_cast<int>(partition.node_indices.size()); ++i) {
    if (!partition.node_indices[i].empty()) active.push_back(i);
  }
  return active;
}

// Gradient Lipschitz constant of the local objectives, when computable.
std::optional<double> LocalLipschitz(const Experiment& e) {
  if (e.model.kind() == Model::Kind::kQuadratic) {
    return e.model.LipschitzConstant(e.train);
  }
  if (e.model.kind() != Model::Kind::kLogistic) return std::nullopt;
  std::optional<double> worst;
  for (int node : ActiveNodes(e.partition)) {
    std::optional<double> l = e.model.LipschitzConstant(
        Subset(e.train, e.partition.node_indices[node]));
    if (l) worst = std::max(worst.value_or(0.0), *l);
  }
  return worst;
}

int DefaultWindow(const TopologySchedule& schedule) {
  if (schedule.kind() == TopologySchedule::Kind::kStaticRing) return 1;
  return static_cast<int>(std::max<int64_t>(1, schedule.period()));
}

constexpr int64_t kMaxNetworkHorizon = 100000;

}  // namespace

nlohmann::json MetricsToJson(const MetricsRecord& r) {
  nlohmann::json j = nlohmann::json::object();
  j["t"] = r.t;
  j["mean_sq_grad_norm"] = Number(r.mean_sq_grad_norm);
  j["consensus_error"] = Number(r.consensus_error);
  j["train_loss"] = Number(r.train_loss);
  j["test_accuracy"] = Optional(r.test_accuracy);
  j["current_g"] = Number(r.current_g);
  j["alpha_injected"] = Number(r.alpha_injected);
  j["eta_t"] = Number(r.eta_t);
  j["clip_residual_mean"] = Number(r.clip_residual_mean);
  j["empirical_d_tau"] = Number(r.empirical_d_tau);
  return j;
}

absl::StatusOr<Experiment> PrepareExperiment(const ExperimentConfig& config) {
  RETURN_IF_ERROR(ValidateConfig(config));
  ASSIGN_OR_RETURN(LoadedData loaded, LoadData(config));
  ASSIGN_OR_RETURN(Model model, BuildModel(config, loaded));

  Dataset train;
  std::optional<Dataset> test;
  if (config.data.test_fraction > 0.0 && loaded.data.size() >= 2) {
    TrainTestSplit split =
        SplitTrainTest(loaded.data, config.data.test_fraction, config.data.seed);
    train = std::move(split.train);
    if (split.test.size() > 0) test = std::move(split.test);
  } else {
    train = std::move(loaded.data);
  }

  Partition partition;
  if (config.data.partition == PartitionMode::kReplicate) {
    partition.node_indices.assign(config.n, AllIndices(train.size()));
  } else {
    PartitionSpec spec{config.data.alpha_conc, config.n, config.data.seed};
    ASSIGN_OR_RETURN(partition,
                     DirichletPartition(train.labels, train.num_classes, spec));
  }
  if (ActiveNodes(partition).empty()) {
    return absl::InvalidArgumentError("data: no node received samples");
  }

  ASSIGN_OR_RETURN(TopologySchedule topology, BuildTopology(config));
  if (topology.n() != config.n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "topology has ", topology.n(), " nodes but experiment.n = ", config.n));
  }
  ASSIGN_OR_RETURN(NoiseSchedule noise, BuildNoiseSchedule(config));
  ASSIGN_OR_RETURN(LrSchedule lr, BuildLrSchedule(config));

  std::vector<PrivacyBudget> budgets = BuildBudgets(config);
  if (!config.privacy.sigma) {
    for (int i = 0; i < config.n; ++i) {
      absl::StatusOr<double> sigma =
          CalibrateSigma(budgets[i], config.clip.g0, noise);
      if (!sigma.ok()) {
        return absl::Status(
            sigma.status().code(),
            absl::StrCat("privacy (node ", i, "): ", sigma.status().message()));
      }
    }
  }

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model.dim());
  if (config.model.init_scale > 0.0) {
    std::mt19937_64 rng =
        DeriveStream(config.data.seed, 0, 0, StreamPurpose::kInit);
    std::normal_distribution<double> gauss(0.0, config.model.init_scale);
    for (Eigen::Index k = 0; k < x0.size(); ++k) x0[k] = gauss(rng);
  }

  return Experiment{config,
                    std::move(model),
                    std::move(train),
                    std::move(test),
                    std::move(partition),
                    std::move(topology),
                    std::move(noise),
                    lr,
                    std::move(budgets),
                    std::move(x0)};
}

absl::StatusOr<LossGrad> GlobalLossAndGrad(const Experiment& e,
                                           const Eigen::VectorXd& params) {
  const std::vector<int> active = ActiveNodes(e.partition);
  LossGrad out;
  out.grad = Eigen::VectorXd::Zero(e.model.dim());
  for (int node : active) {
    ASSIGN_OR_RETURN(LossGrad lg,
                     e.model.LossAndGrad(params, e.train,
                                         e.partition.node_indices[node]));
    out.loss += lg.loss;
    out.grad += lg.grad;
  }
  const double inv = 1.0 / static_cast<double>(active.size());
  out.loss *= inv;
  out.grad *= inv;
  return out;
}

absl::StatusOr<double> EstimateOptimalLoss(const Experiment& e, int iters) {
  if (e.model.kind() == Model::Kind::kQuadratic) {
    // f(x) = 1/2 x^T A x - b_bar^T x with b_bar the mean of node means.
    Eigen::VectorXd b_bar = Eigen::VectorXd::Zero(e.model.dim());
    const std::vector<int> active = ActiveNodes(e.partition);
    for (int node : active) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(e.model.dim());
      for (int idx : e.partition.node_indices[node]) {
        mean += e.train.features.row(idx).transpose();
      }
      b_bar += mean / static_cast<double>(e.partition.node_indices[node].size());
    }
    b_bar /= static_cast<double>(active.size());
    const Eigen::VectorXd x_star = e.model.curvature().llt().solve(b_bar);
    return -0.5 * b_bar.dot(x_star);
  }
  // Gradient descent with Armijo backtracking; keeps the best loss seen.
  Eigen::VectorXd x = e.x0;
  ASSIGN_OR_RETURN(LossGrad current, GlobalLossAndGrad(e, x));
  double best = current.loss;
  double step = 1.0;
  for (int it = 0; it < iters; ++it) {
    const double g2 = current.grad.squaredNorm();
    if (g2 < 1e-24) break;
    bool accepted = false;
    for (int shrink = 0; shrink < 60; ++shrink) {
      Eigen::VectorXd trial = x - step * current.grad;
      ASSIGN_OR_RETURN(LossGrad next, GlobalLossAndGrad(e, trial));
      if (next.loss <= current.loss - 0.5 * step * g2) {
        x = std::move(trial);
        current = std::move(next);
        accepted = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    best = std::min(best, current.loss);
  }
  return best;
}

absl::StatusOr<NetworkConstants> MeasureNetwork(const Experiment& e) {
  NetworkConstants out;
  out.window = e.config.topology.window.value_or(DefaultWindow(e.topology));
  const int64_t horizon = std::clamp<int64_t>(
      FullCycleHorizon(e.topology, out.window), out.window,
      std::max<int64_t>(out.window, kMaxNetworkHorizon));
  ASSIGN_OR_RETURN(out.max_out_degree, MaxOutDegree(e.topology, horizon));

  std::optional<int> measured = 0;
  for (int64_t begin = 0; begin + out.window <= horizon; begin += out.window) {
    ASSIGN_OR_RETURN(DirectedEdgeSet joined,
                     UnionOver(e.topology, begin, begin + out.window));
    std::optional<int> diameter = Diameter(joined);
    if (!diameter) {
      measured.reset();
      break;
    }
    measured = std::max(*measured, *diameter);
  }
  if (!measured) {
    out.note = absl::StrCat("unions over windows of ", out.window,
                            " rounds are not strongly connected");
    return out;
  }
  // A single node has diameter 0; the propagation constants need kappa >= 1.
  const int measured_kappa = std::max(*measured, 1);
  if (e.config.topology.kappa && *e.config.topology.kappa < measured_kappa) {
    out.note = absl::StrCat("topology.kappa = ", *e.config.topology.kappa,
                            " is below the measured diameter ", measured_kappa);
    return out;
  }
  out.kappa = e.config.topology.kappa.value_or(measured_kappa);
  absl::StatusOr<PropagationParams> params = ComputePropagationParams(
      e.config.n, out.max_out_degree, *out.kappa, out.window, e.model.dim());
  if (!params.ok()) {
    out.note = std::string(params.status().message());
    return out;
  }
  out.propagation = *params;
  return out;
}

std::vector<std::pair<std::string, std::string>> ErratumFlags() {
  return {
      {"optimal_p",
       "p* = 1/2 - 2s, the only relation consistent with s = 1/4 - p/2 and "
       "p* = 0.1, 0, -0.1 at s = 0.2, 0.25, 0.3; the stated p = -1/2 - 2s is "
       "not"},
      {"fusion_interval",
       "the exhaustive scan of 2 theta^(2 tau - 1)/(1 + theta) < 0.01 gives "
       "tau = 3, 5, 8 for theta = 0.3, 0.5, 0.7, while the reported "
       "intervals are 12, 6, 4"},
      {"pushsum_update",
       "the weight is mixed as w_i <- sum_j P_ij w_j, the half-step parameter "
       "x^(t+1/2) is sent, and x_i <- sum_j P_ij x_j^(t+1/2)"},
      {"alpha_domain",
       "alpha is defined on t = 0..T because beta^0 and the first noise "
       "multiplier both use alpha^T"},
  };
}

absl::StatusOr<RunSummary> Run(const ExperimentConfig& config, uint64_t seed,
                               const MetricsSink& sink) {
  ASSIGN_OR_RETURN(Experiment experiment, PrepareExperiment(config));
  return RunPrepared(experiment, seed, sink);
}

absl::StatusOr<RunSummary> RunPrepared(const Experiment& e, uint64_t seed,
                                       const MetricsSink& sink,
                                       const StateObserver& observer) {
  const ExperimentConfig& c = e.config;
  const int n = c.n;
  const int64_t total = c.total;
  const bool adaptive = c.algorithm == Algorithm::kAdpVrsgp;
  const double theta = adaptive ? c.fusion.theta : 0.0;

  RunSummary summary;
  summary.config = c;
  summary.config.seed = seed;
  summary.seed = seed;
  summary.iterations = total;
  for (const auto& nodes : e.partition.node_indices) {
    summary.node_sizes.push_back(static_cast<int>(nodes.size()));
  }
  summary.empty_nodes = e.partition.empty_nodes;
  if (!summary.empty_nodes.empty()) {
    summary.warnings.push_back(absl::StrCat(
        summary.empty_nodes.size(),
        " node(s) hold no data and contribute zero gradients"));
  }

  std::vector<double> sigma(n);
  for (int i = 0; i < n; ++i) sigma[i] = e.budgets[i].sigma.value_or(0.0);

  std::vector<NodeState> states;
  for (int i = 0; i < n; ++i) states.push_back(NodeState::Initial(i, e.x0));
  std::vector<FusedGradientState> fused_state(n);
  std::vector<FusedGradientState> shadow_state(n);
  std::vector<IntervalDeviationTracker> trackers(n);

  const std::vector<int> all_test =
      e.test ? AllIndices(e.test->size()) : std::vector<int>();
  const bool has_accuracy =
      e.test.has_value() && e.model.kind() != Model::Kind::kQuadratic;

  // Full local gradients at the current debiased parameters.
  auto mean_sq_grad_norm =
      [&](const std::vector<NodeState>& s) -> absl::StatusOr<double> {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& nodes = e.partition.node_indices[i];
      if (nodes.empty()) continue;
      ASSIGN_OR_RETURN(LossGrad lg, e.model.LossAndGrad(s[i].z, e.train, nodes));
      sum += lg.grad.squaredNorm();
    }
    return sum / n;
  };

  double threshold = c.clip.g0;
  double grad_norm_sum = 0.0;
  double rho_total = 0.0;
  double upsilon_total = 0.0;

  for (int64_t t = 0; t < total; ++t) {
    MetricsRecord record;
    record.t = t;
    ASSIGN_OR_RETURN(record.mean_sq_grad_norm, mean_sq_grad_norm(states));
    record.consensus_error = ConsensusError(states);
    const Eigen::VectorXd mean = MeanParam(states);
    ASSIGN_OR_RETURN(LossGrad global, GlobalLossAndGrad(e, mean));
    record.train_loss = global.loss;
    if (has_accuracy) {
      ASSIGN_OR_RETURN(record.test_accuracy,
                       e.model.Accuracy(mean, *e.test, all_test));
    }
    if (!std::isfinite(record.mean_sq_grad_norm) ||
        !std::isfinite(record.consensus_error) ||
        !std::isfinite(record.train_loss)) {
      return absl::InternalError(
          absl::StrCat("non-finite metrics at iteration ", t));
    }
    record.current_g = threshold;
    record.alpha_injected = e.noise.Alpha(total - t);
    ASSIGN_OR_RETURN(record.eta_t, LrAt(e.noise, e.lr, t));

    // Intervals restart on the tau grid and wherever the injected multiplier
    // changes, so the deviation window never spans two noise levels.
    const bool starts_interval =
        t % c.noise.tau == 0 || e.noise.Alpha(total - t + 1) != record.alpha_injected;
    double residual_sum = 0.0;
    double deviation_sum = 0.0;
    double staleness_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto& nodes = e.partition.node_indices[i];
      if (nodes.empty()) continue;
      std::mt19937_64 batch_rng = DeriveStream(seed, i, t, StreamPurpose::kBatch);
      const std::vector<int> batch =
          SampleBatch(nodes, c.privacy.sampling_ratio, batch_rng);
      ASSIGN_OR_RETURN(LossGrad lg, e.model.LossAndGrad(states[i].z, e.train, batch));
      ClipResult clipped = Clip(lg.grad, threshold);
      residual_sum += clipped.residual_sq;
      std::mt19937_64 noise_rng = DeriveStream(seed, i, t, StreamPurpose::kNoise);
      Eigen::VectorXd step_dir =
          Perturb(clipped.clipped, record.alpha_injected, sigma[i], noise_rng);
      deviation_sum += trackers[i].Observe(clipped.clipped, starts_interval);
      if (adaptive) {
        step_dir = Fuse(step_dir, fused_state[i], record.alpha_injected, theta, t);
        // The same recursion applied to noiseless gradients isolates the
        // staleness error of fusion.
        const Eigen::VectorXd shadow = Fuse(
            clipped.clipped, shadow_state[i], record.alpha_injected, theta, t);
        staleness_sum += (shadow - clipped.clipped).squaredNorm();
      } else {
        fused_state[i].prev = step_dir;
        fused_state[i].last_alpha = record.alpha_injected;
      }
      LocalHalfStep(states[i], step_dir, record.eta_t);
    }
    record.clip_residual_mean = residual_sum / n;
    record.empirical_d_tau = deviation_sum / n;
    upsilon_total += record.clip_residual_mean;
    rho_total += staleness_sum / n;

    ASSIGN_OR_RETURN(DirectedEdgeSet edges, e.topology.At(t));
    ASSIGN_OR_RETURN(MixingMatrix mixing, BuildMixingMatrix(edges));
    ASSIGN_OR_RETURN(RoundOutcome outcome, MixRound(states, mixing));
    states = std::move(outcome.states);
    for (const NodeState& s : states) {
      if (!s.z.allFinite() || !std::isfinite(s.w)) {
        return absl::InternalError(absl::StrCat(
            "non-finite parameters at iteration ", t, " (node ", s.node_id,
            ")"));
      }
    }
    if (observer) observer(t, states);
    if (adaptive) threshold = DecayThreshold(c.clip, threshold);

    grad_norm_sum += record.mean_sq_grad_norm;
    if (sink) sink(record);
  }

  summary.time_avg_mean_sq_grad_norm = grad_norm_sum / static_cast<double>(total);
  ASSIGN_OR_RETURN(summary.final_mean_sq_grad_norm, mean_sq_grad_norm(states));
  summary.final_consensus_error = ConsensusError(states);
  summary.final_mean_param = MeanParam(states);
  ASSIGN_OR_RETURN(LossGrad final_loss,
                   GlobalLossAndGrad(e, summary.final_mean_param));
  summary.final_train_loss = final_loss.loss;
  if (has_accuracy) {
    ASSIGN_OR_RETURN(summary.final_test_accuracy,
                     e.model.Accuracy(summary.final_mean_param, *e.test, all_test));
  }

  for (int i = 0; i < n; ++i) {
    NodePrivacy node;
    node.sigma = sigma[i];
    node.budget = e.budgets[i];
    if (sigma[i] > 0.0) {
      absl::StatusOr<PrivacySpent> spent =
          AccountPrivacy(e.budgets[i], e.noise, c.clip.g0);
      if (spent.ok()) node.spent = *spent;
    }
    summary.privacy.push_back(node);
  }

  TheoryReport& theory = summary.theory;
  theory.rho_total = rho_total;
  theory.upsilon_total = upsilon_total;
  ASSIGN_OR_RETURN(theory.network, MeasureNetwork(e));
  std::optional<double> lipschitz = LocalLipschitz(e);
  if (!c.theory.enabled) {
    theory.note = "disabled by theory.enabled";
  } else if (!lipschitz) {
    theory.note = "no gradient Lipschitz constant for this model";
  } else if (!theory.network.propagation) {
    theory.note = absl::StrCat("propagation constants unavailable: ",
                               theory.network.note);
    summary.warnings.push_back(theory.note);
  } else {
    theory.enabled = true;
    TheoryParams& p = theory.params;
    p.L = *lipschitz;
    ASSIGN_OR_RETURN(Heterogeneity het,
                     EstimateHeterogeneity(e.model, e.train, e.partition, e.x0,
                                           c.theory.radius, c.theory.probes,
                                           c.data.seed));
    p.a = het.a;
    p.m = het.m;
    p.c = theory.network.propagation->c_bound;
    p.q = theory.network.propagation->q;
    p.lambda = theory.network.propagation->lambda;
    ASSIGN_OR_RETURN(theory.f_star, EstimateOptimalLoss(e, c.theory.fstar_iters));
    ASSIGN_OR_RETURN(LossGrad at_x0, GlobalLossAndGrad(e, e.x0));
    p.f0 = std::max(0.0, at_x0.loss - theory.f_star);
    p.x0_norm = e.x0.norm();
    p.d = e.model.dim();

    // Learning-rate exponent matching eta = K sqrt(n) / T^p.
    const double p_lr =
        c.lr.p ? *c.lr.p
        : total >= 2
            ? std::log(c.noise.k * std::sqrt(static_cast<double>(n)) / e.lr.eta) /
                  std::log(static_cast<double>(total))
            : 0.0;
    absl::StatusOr<MinIterationsReport> floor =
        MinIterations(p, n, p_lr, c.noise.k);
    if (floor.ok()) theory.min_iterations = *floor;

    // M written through the calibrated sigmas, which also covers overrides.
    double ratio_sum = 0.0;
    for (int64_t t = 0; t < total; ++t) {
      ASSIGN_OR_RETURN(const double beta, BetaAt(e.noise, e.lr, t));
      const double alpha = e.noise.Alpha(total - t);
      ratio_sum += alpha * alpha / (beta * beta);
    }
    double sigma_sq_sum = 0.0;
    for (double s : sigma) sigma_sq_sum += s * s;
    const double m_noise = e.lr.eta * e.lr.eta / (double(n) * n) *
                           sigma_sq_sum * ratio_sum;
    ASSIGN_OR_RETURN(theory.bound,
                     ConvergenceBound(p, n, total, theta, c.fusion.tau,
                                      m_noise, rho_total, upsilon_total));
  }
  return summary;
}

nlohmann::json SummaryToJson(const RunSummary& s) {
  nlohmann::json j = nlohmann::json::object();
  j["config"] = ConfigToJson(s.config);
  j["seed"] = s.seed;
  j["iterations"] = s.iterations;
  j["time_avg_mean_sq_grad_norm"] = Number(s.time_avg_mean_sq_grad_norm);
  j["final_mean_sq_grad_norm"] = Number(s.final_mean_sq_grad_norm);
  j["final_consensus_error"] = Number(s.final_consensus_error);
  j["final_train_loss"] = Number(s.final_train_loss);
  j["final_test_accuracy"] = Optional(s.final_test_accuracy);

  nlohmann::json nodes = nlohmann::json::array();
  for (size_t i = 0; i < s.privacy.size(); ++i) {
    const NodePrivacy& p = s.privacy[i];
    nlohmann::json node = {{"node", i},
                           {"sigma", Number(p.sigma)},
                           {"epsilon", Number(p.budget.epsilon)},
                           {"delta", Number(p.budget.delta)},
                           {"sampling_ratio", Number(p.budget.sampling_ratio)},
                           {"c1", Number(p.budget.c1)},
                           {"c2", Number(p.budget.c2)}};
    if (p.spent) {
      node["spent"] = {{"label", "bound, constants-dependent"},
                       {"delta_at_epsilon", Number(p.spent->delta_at_epsilon)},
                       {"delta_order", p.spent->delta_order},
                       {"epsilon_at_delta", Number(p.spent->epsilon_at_delta)},
                       {"epsilon_order", p.spent->epsilon_order}};
    } else {
      node["spent"] = nullptr;
    }
    nodes.push_back(std::move(node));
  }
  j["privacy"] = std::move(nodes);
  j["node_sizes"] = s.node_sizes;
  j["empty_nodes"] = s.empty_nodes;

  const TheoryReport& t = s.theory;
  nlohmann::json theory = {{"enabled", t.enabled},
                           {"note", t.note},
                           {"rho_total", Number(t.rho_total)},
                           {"upsilon_total", Number(t.upsilon_total)}};
  nlohmann::json network = {{"window", t.network.window},
                            {"max_out_degree", t.network.max_out_degree},
                            {"kappa", t.network.kappa
                                          ? nlohmann::json(*t.network.kappa)
                                          : nlohmann::json(nullptr)},
                            {"note", t.network.note}};
  if (t.network.propagation) {
    network["lambda"] = Number(t.network.propagation->lambda);
    network["q"] = Number(t.network.propagation->q);
    network["c_bound"] = Number(t.network.propagation->c_bound);
  }
  theory["network"] = std::move(network);
  if (t.enabled) {
    theory["params"] = {{"L", Number(t.params.L)},   {"a", Number(t.params.a)},
                        {"m", Number(t.params.m)},   {"C", Number(t.params.c)},
                        {"q", Number(t.params.q)},   {"lambda", Number(t.params.lambda)},
                        {"F0", Number(t.params.f0)}, {"f_star", Number(t.f_star)},
                        {"x0_norm", Number(t.params.x0_norm)},
                        {"d", t.params.d}};
  }
  if (t.min_iterations) {
    nlohmann::json terms = nlohmann::json::array();
    for (double v : t.min_iterations->terms) terms.push_back(Number(v));
    theory["min_iterations"] = {
        {"terms", std::move(terms)},
        {"dominant", t.min_iterations->dominant},
        {"overflow", t.min_iterations->overflow},
        {"floor", t.min_iterations->overflow
                      ? nlohmann::json(nullptr)
                      : nlohmann::json(t.min_iterations->floor)},
        {"satisfied", !t.min_iterations->overflow &&
                          s.iterations >= t.min_iterations->floor}};
  }
  if (t.bound) {
    const BoundBreakdown& b = *t.bound;
    theory["bound"] = {{"A1", Number(b.a1)},
                       {"A2", Number(b.a2)},
                       {"A3", Number(b.a3)},
                       {"M", Number(b.m_noise)},
                       {"h", Number(b.h)},
                       {"fixed_term", Number(b.fixed_term)},
                       {"noise_term", Number(b.noise_term)},
                       {"bias_term", Number(b.bias_term)},
                       {"total", Number(b.total)},
                       {"measured_lhs", Number(s.time_avg_mean_sq_grad_norm)},
                       {"holds", s.time_avg_mean_sq_grad_norm <= b.total}};
  }
  j["theory"] = std::move(theory);

  nlohmann::json errata = nlohmann::json::array();
  for (const auto& [id, note] : ErratumFlags()) {
    errata.push_back({{"id", id}, {"note", note}});
  }
  j["errata"] = std::move(errata);
  j["warnings"] = s.warnings;
  return j;
}

nlohmann::json PartitionToJson(const Experiment& e) {
  nlohmann::json nodes = nlohmann::json::array();
  for (size_t i = 0; i < e.partition.node_indices.size(); ++i) {
    std::vector<int> counts(std::max(e.train.num_classes, 1), 0);
    for (int idx : e.partition.node_indices[i]) ++counts[e.train.labels[idx]];
    nodes.push_back({{"node", i},
                     {"size", e.partition.node_indices[i].size()},
                     {"label_counts", counts},
                     {"indices", e.partition.node_indices[i]}});
  }
  return {{"mode", e.config.data.partition == PartitionMode::kReplicate
                       ? "replicate"
                       : "dirichlet"},
          {"alpha_conc", e.config.data.alpha_conc},
          {"seed", e.config.data.seed},
          {"train_size", e.train.size()},
          {"test_size", e.test ? e.test->size() : 0},
          {"empty_nodes", e.partition.empty_nodes},
          {"nodes", std::move(nodes)}};
}

}  // namespace dpgossip
