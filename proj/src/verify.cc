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

#include "dpgossip/verify.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "dpgossip/engine.h"
#include "dpgossip/fusion.h"
#include "dpgossip/privacy.h"
#include "dpgossip/pushsum.h"
#include "dpgossip/rng.h"
#include "dpgossip/status_macros.h"
#include "dpgossip/topology.h"

namespace dpgossip {
namespace {

CheckResult AtMost(std::string name, double measured, double limit) {
  return {std::move(name), measured, limit, "<=", measured <= limit};
}

CheckResult Equal(std::string name, double measured, double expected) {
  return {std::move(name), measured, expected, "==", measured == expected};
}

CheckResult Within(std::string name, double measured, double expected,
                   double rel) {
  const double err = std::abs(measured - expected) / std::abs(expected);
  return {std::move(name), measured, expected,
          absl::StrFormat("within %g rel", rel), err <= rel};
}

Eigen::VectorXd Gaussian(int dim, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, scale);
  Eigen::VectorXd v(dim);
  for (int k = 0; k < dim; ++k) v[k] = gauss(rng);
  return v;
}

std::vector<CheckResult> NoiseFactorSuite() {
  std::vector<CheckResult> out;
  uint64_t seed = 11;
  for (double theta : {0.3, 0.5, 0.7}) {
    for (int64_t tau : {2, 4, 6, 12}) {
      out.push_back(Within(absl::StrFormat("h(%.1f, %d) Monte-Carlo", theta, tau),
                           MonteCarloNoiseFactor(theta, tau, 1000000, seed++),
                           NoiseFactor(theta, tau), 0.02));
    }
  }
  for (int64_t tau : {1, 3, 9}) {
    out.push_back(Equal(absl::StrFormat("h(0, %d)", tau), NoiseFactor(0.0, tau), 1.0));
  }
  for (double theta : {0.1, 0.5, 0.9}) {
    out.push_back(Equal(absl::StrFormat("h(%.1f, 1)", theta),
                        NoiseFactor(theta, 1), 1.0));
  }
  for (double theta : {0.3, 0.5, 0.7}) {
    const StalenessRatios ratios =
        MonteCarloStalenessRatio(theta, 6, 0.5, 20000, seed++);
    out.push_back(AtMost(
        absl::StrFormat("staleness ratio theta=%.1f tau=6, last step", theta),
        ratios.last_step, 1.05));
    out.push_back(AtMost(
        absl::StrFormat("staleness ratio theta=%.1f tau=6, every step vs its "
                        "chain length", theta),
        ratios.worst_prefix, 1.05));
  }
  const int64_t scanned[] = {SelectTau(0.3), SelectTau(0.5), SelectTau(0.7)};
  out.push_back(Equal("select_tau(0.3)", scanned[0], 3));
  out.push_back(Equal("select_tau(0.5)", scanned[1], 5));
  out.push_back(Equal("select_tau(0.7)", scanned[2], 8));
  return out;
}

absl::StatusOr<std::vector<CheckResult>> ConsensusSuite() {
  std::vector<CheckResult> out;
  ASSIGN_OR_RETURN(PushSumCheck mass, ExponentialMassCheck(8, 1000, 5));
  out.push_back(AtMost("exp-periodic n=8 mass error (1000 rounds)",
                       mass.max_mass_error, 1e-10));
  out.push_back(AtMost("exp-periodic n=8 value drift (1000 rounds)",
                       mass.max_value_drift, 1e-10));
  ASSIGN_OR_RETURN(PushSumCheck ring, RingConsensusCheck(8, 1, 500, 6));
  out.push_back(AtMost("ring n=8 k=1 max ||z_i - x_bar|| after 500 rounds",
                       ring.final_max_deviation, 1e-8));
  ASSIGN_OR_RETURN(PushSumCheck ring16, RingConsensusCheck(16, 3, 500, 7));
  out.push_back(AtMost("ring n=16 k=3 max ||z_i - x_bar|| after 500 rounds",
                       ring16.final_max_deviation, 1e-12));

  // A graph that is column- but not row-stochastic: node 0 also broadcasts.
  std::vector<Edge> edges;
  const int n = 6;
  for (int i = 0; i < n; ++i) edges.push_back({(i + 1) % n, i});
  for (int i = 2; i < n; ++i) edges.push_back({i, 0});
  ASSIGN_OR_RETURN(DirectedEdgeSet set, DirectedEdgeSet::Create(n, edges));
  ASSIGN_OR_RETURN(MixingMatrix mixing, BuildMixingMatrix(set));
  std::mt19937_64 rng = DeriveStream(8, 0, 0, StreamPurpose::kOracle);
  std::vector<NodeState> states;
  for (int i = 0; i < n; ++i) {
    states.push_back(NodeState::Initial(i, Gaussian(3, 1.0, rng)));
  }
  const Eigen::VectorXd target = MeanParam(states);
  for (int r = 0; r < 500; ++r) {
    ASSIGN_OR_RETURN(RoundOutcome outcome, MixRound(states, mixing));
    states = std::move(outcome.states);
  }
  double worst = 0.0;
  for (const NodeState& s : states) worst = std::max(worst, (s.z - target).norm());
  out.push_back(AtMost("push-sum debias on a non-doubly-stochastic graph",
                       worst, 1e-10));
  out.push_back(Equal("that graph is doubly stochastic",
                      mixing.IsDoublyStochastic() ? 1.0 : 0.0, 0.0));
  return out;
}

absl::StatusOr<std::vector<CheckResult>> GradientsSuite() {
  std::vector<CheckResult> out;
  const std::pair<Model::Kind, const char*> kinds[] = {
      {Model::Kind::kQuadratic, "quadratic"},
      {Model::Kind::kLogistic, "logistic"},
      {Model::Kind::kMlp, "mlp"}};
  for (const auto& [kind, name] : kinds) {
    ASSIGN_OR_RETURN(double err, MaxGradientError(kind, 100, 21));
    out.push_back(AtMost(absl::StrCat("max FD relative error, ", name), err, 1e-5));
  }
  return out;
}

absl::StatusOr<std::vector<CheckResult>> SchedulesSuite() {
  std::vector<CheckResult> out;
  DominanceSweep sweep = BetaDominanceSweep(200, 31);
  out.push_back(Equal("sum 1/beta <= sum 1/alpha^2 violations (200 schedules)",
                      sweep.violations, 0));

  // With alpha = 1 calibration collapses to c2 ratio G sqrt(T ln(1/delta))/eps.
  std::mt19937_64 rng = DeriveStream(32, 0, 0, StreamPurpose::kOracle);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int64_t total = 1 + static_cast<int64_t>(unit(rng) * 3000);
    ASSIGN_OR_RETURN(NoiseSchedule flat,
                     NoiseSchedule::Stepwise(1.0, 1.0, 1, 0.0, total));
    PrivacyBudget b;
    b.epsilon = 0.1 + 4.0 * unit(rng);
    b.delta = std::pow(10.0, -1.0 - 6.0 * unit(rng));
    b.sampling_ratio = 0.001 + 0.999 * unit(rng);
    b.c1 = 2.0 * b.epsilon / (b.sampling_ratio * b.sampling_ratio * total);
    b.c2 = 0.5 + unit(rng);
    const double clip = 0.01 + unit(rng);
    ASSIGN_OR_RETURN(double sigma, CalibrateSigma(b, clip, flat));
    const double closed = b.c2 * b.sampling_ratio * clip *
                          std::sqrt(total * std::log(1.0 / b.delta)) / b.epsilon;
    worst = std::max(worst, std::abs(sigma - closed) / closed);
  }
  out.push_back(AtMost("sigma reduction at alpha = 1, max rel error", worst, 1e-12));

  ASSIGN_OR_RETURN(NoiseSchedule flat,
                   NoiseSchedule::Stepwise(1.0, 1.0, 1, 0.0, 1000));
  PrivacyBudget b;
  b.epsilon = 2.0;
  b.delta = 1e-5;
  b.sampling_ratio = 0.01;
  b.c1 = 100.0;
  ASSIGN_OR_RETURN(double sigma, CalibrateSigma(b, 0.1, flat));
  out.push_back(
      {"sigma example (G=0.1, ratio=0.01, T=1000, eps=2)", sigma, 0.05364,
       "within 1e-5 abs", std::abs(sigma - 0.05364) <= 1e-5});
  return out;
}

absl::StatusOr<std::vector<CheckResult>> ConnectivitySuite() {
  std::vector<CheckResult> out;
  ASSIGN_OR_RETURN(int mismatches, ConnectivityMismatches(300, 41));
  out.push_back(Equal("diameter mismatches vs Floyd-Warshall (300 schedules)",
                      mismatches, 0));
  ASSIGN_OR_RETURN(TopologySchedule exp8, TopologySchedule::ExponentialPeriodic(8));
  ASSIGN_OR_RETURN(ConnectivityReport k1, VerifyJointConnectivity(exp8, 3, 1, 24));
  ASSIGN_OR_RETURN(ConnectivityReport k2, VerifyJointConnectivity(exp8, 3, 2, 24));
  out.push_back(Equal("exp-periodic n=8 J=3 union diameter",
                      k2.max_diameter.value_or(-1), 2));
  out.push_back(Equal("exp-periodic n=8 J=3 kappa=1 satisfied", k1.satisfied, 0));
  out.push_back(Equal("exp-periodic n=8 J=3 kappa=2 satisfied", k2.satisfied, 1));
  ASSIGN_OR_RETURN(TopologySchedule ring, TopologySchedule::StaticRing(8, 1));
  ASSIGN_OR_RETURN(DirectedEdgeSet ring_edges, ring.At(0));
  out.push_back(Equal("ring n=8 k=1 diameter", Diameter(ring_edges).value_or(-1), 7));
  return out;
}

// All-pairs shortest hop counts; -1 when unreachable.
int FloydWarshallDiameter(int n, const std::vector<std::vector<bool>>& adj) {
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        dist[i][j] = 0;
      } else if (adj[i][j]) {
        dist[i][j] = 1;
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
  int diameter = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (dist[i][j] >= inf) return -1;
      diameter = std::max(diameter, dist[i][j]);
    }
  }
  return diameter;
}

}  // namespace

std::string FormatCheck(const CheckResult& c) {
  return absl::StrFormat("[%s] %s: measured %.10g, expected %s %.10g",
                         c.pass ? "PASS" : "FAIL", c.name, c.measured,
                         c.relation, c.expected);
}

const std::vector<std::string>& VerifySuiteNames() {
  static const std::vector<std::string> names = {
      "noise-factor", "consensus", "gradients", "schedules", "connectivity"};
  return names;
}

absl::StatusOr<std::vector<CheckResult>> RunVerifySuite(const std::string& suite) {
  if (suite == "all") {
    std::vector<CheckResult> all;
    for (const std::string& name : VerifySuiteNames()) {
      ASSIGN_OR_RETURN(std::vector<CheckResult> part, RunVerifySuite(name));
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  if (suite == "noise-factor") return NoiseFactorSuite();
  if (suite == "consensus") return ConsensusSuite();
  if (suite == "gradients") return GradientsSuite();
  if (suite == "schedules") return SchedulesSuite();
  if (suite == "connectivity") return ConnectivitySuite();
  return absl::InvalidArgumentError(absl::StrCat("unknown suite '", suite, "'"));
}

double MonteCarloNoiseFactor(double theta, int64_t tau, int64_t trials,
                             uint64_t seed) {
  // Each vector component is an independent chain.
  constexpr int64_t kWidth = 1000;
  const int64_t batches = (trials + kWidth - 1) / kWidth;
  std::mt19937_64 rng = DeriveStream(seed, 0, 0, StreamPurpose::kOracle);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double sum_sq = 0.0;
  Eigen::VectorXd noise(kWidth);
  for (int64_t b = 0; b < batches; ++b) {
    FusedGradientState state;
    Eigen::VectorXd fused;
    for (int64_t k = 0; k < tau; ++k) {
      for (int64_t c = 0; c < kWidth; ++c) noise[c] = gauss(rng);
      fused = Fuse(noise, state, 1.0, theta, k);
    }
    sum_sq += fused.squaredNorm();
  }
  return sum_sq / static_cast<double>(batches * kWidth);
}

StalenessRatios MonteCarloStalenessRatio(double theta, int64_t tau,
                                         double d_tau, int64_t trials,
                                         uint64_t seed) {
  constexpr int kDim = 5;
  std::mt19937_64 rng = DeriveStream(seed, 0, 0, StreamPurpose::kOracle);
  std::vector<double> mean_sq(tau, 0.0);
  const double radius = std::sqrt(d_tau) / 2.0;
  for (int64_t trial = 0; trial < trials; ++trial) {
    const Eigen::VectorXd center = Gaussian(kDim, 1.0, rng);
    FusedGradientState state;
    for (int64_t k = 0; k < tau; ++k) {
      Eigen::VectorXd offset = Gaussian(kDim, 1.0, rng);
      const Eigen::VectorXd clipped = center + radius * offset.normalized();
      const Eigen::VectorXd fused = Fuse(clipped, state, 1.0, theta, k);
      mean_sq[k] += (fused - clipped).squaredNorm();
    }
  }
  StalenessRatios out;
  const double full = StalenessBound(theta, tau, d_tau);
  for (int64_t k = 0; k < tau; ++k) {
    const double measured = mean_sq[k] / static_cast<double>(trials);
    out.worst_prefix =
        std::max(out.worst_prefix, measured / StalenessBound(theta, k + 1, d_tau));
    out.worst_any_step = std::max(out.worst_any_step, measured / full);
  }
  out.last_step = mean_sq[tau - 1] / static_cast<double>(trials) / full;
  return out;
}

absl::StatusOr<double> MaxGradientError(Model::Kind kind, int points,
                                        uint64_t seed) {
  SyntheticSpec spec;
  spec.kind = kind;
  spec.samples = 40;
  spec.dim = kind == Model::Kind::kQuadratic ? 5 : (kind == Model::Kind::kMlp ? 3 : 4);
  spec.classes = 3;
  spec.separation = 2.0;
  spec.seed = seed;
  ASSIGN_OR_RETURN(SyntheticProblem problem, MakeSynthetic(spec));
  absl::StatusOr<Model> built =
      kind == Model::Kind::kQuadratic ? Model::Quadratic(problem.curvature)
      : kind == Model::Kind::kLogistic ? Model::Logistic(spec.dim, 0.1)
                                       : Model::Mlp(spec.dim, 5, 3);
  ASSIGN_OR_RETURN(Model model, std::move(built));

  std::mt19937_64 rng = DeriveStream(seed, 1, 0, StreamPurpose::kOracle);
  std::uniform_int_distribution<int> pick(0, problem.data.size() - 1);
  constexpr double kStep = 1e-6;
  double worst = 0.0;
  for (int point = 0; point < points; ++point) {
    const Eigen::VectorXd x = Gaussian(model.dim(), 1.0, rng);
    std::vector<int> batch(8);
    for (int& idx : batch) idx = pick(rng);
    ASSIGN_OR_RETURN(LossGrad analytic, model.LossAndGrad(x, problem.data, batch));
    Eigen::VectorXd numeric(model.dim());
    for (int k = 0; k < model.dim(); ++k) {
      Eigen::VectorXd up = x;
      Eigen::VectorXd down = x;
      up[k] += kStep;
      down[k] -= kStep;
      ASSIGN_OR_RETURN(double f_up, model.Loss(up, problem.data, batch));
      ASSIGN_OR_RETURN(double f_down, model.Loss(down, problem.data, batch));
      numeric[k] = (f_up - f_down) / (2.0 * kStep);
    }
    const double scale = std::max(numeric.norm(), 1e-8);
    worst = std::max(worst, (analytic.grad - numeric).norm() / scale);
  }
  return worst;
}

DominanceSweep BetaDominanceSweep(int configs, uint64_t seed) {
  std::mt19937_64 rng = DeriveStream(seed, 0, 0, StreamPurpose::kOracle);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DominanceSweep sweep;
  sweep.min_relative_slack = std::numeric_limits<double>::infinity();
  while (sweep.configs < configs) {
    const double k = std::pow(10.0, -1.0 + 2.0 * unit(rng));
    const double s = unit(rng);
    const int64_t total = 2 + static_cast<int64_t>(unit(rng) * 499);
    const double xi = 0.02 + 0.96 * unit(rng);
    absl::StatusOr<NoiseSchedule> schedule = NoiseSchedule::Power(k, s, total, 1);
    if (!schedule.ok()) continue;
    ++sweep.configs;
    const auto [lhs, rhs] = BetaSumDominance(*schedule, LrSchedule{1.0, xi});
    if (!(lhs <= rhs)) ++sweep.violations;
    sweep.min_relative_slack = std::min(sweep.min_relative_slack, (rhs - lhs) / rhs);
  }
  return sweep;
}

namespace {

absl::StatusOr<PushSumCheck> MassCheck(const TopologySchedule& schedule,
                                       int64_t rounds, uint64_t seed) {
  const int n = schedule.n();
  std::mt19937_64 rng = DeriveStream(seed, 0, 0, StreamPurpose::kOracle);
  std::vector<NodeState> states;
  for (int i = 0; i < n; ++i) {
    states.push_back(NodeState::Initial(i, Gaussian(4, 1.0, rng)));
  }
  Eigen::VectorXd initial_sum = Eigen::VectorXd::Zero(4);
  for (const NodeState& s : states) initial_sum += s.x;
  const double scale = std::max(1.0, initial_sum.lpNorm<Eigen::Infinity>());
  PushSumCheck check;
  for (int64_t t = 0; t < rounds; ++t) {
    ASSIGN_OR_RETURN(DirectedEdgeSet edges, schedule.At(t));
    ASSIGN_OR_RETURN(MixingMatrix mixing, BuildMixingMatrix(edges));
    ASSIGN_OR_RETURN(RoundOutcome outcome, MixRound(states, mixing));
    states = std::move(outcome.states);
    double w_sum = 0.0;
    Eigen::VectorXd x_sum = Eigen::VectorXd::Zero(4);
    for (const NodeState& s : states) {
      w_sum += s.w;
      x_sum += s.x;
    }
    check.max_mass_error = std::max(check.max_mass_error, std::abs(w_sum - n) / n);
    check.max_value_drift = std::max(
        check.max_value_drift,
        (x_sum - initial_sum).lpNorm<Eigen::Infinity>() / scale);
  }
  const Eigen::VectorXd mean = MeanParam(states);
  for (const NodeState& s : states) {
    check.final_max_deviation =
        std::max(check.final_max_deviation, (s.z - mean).norm());
  }
  return check;
}

}  // namespace

absl::StatusOr<PushSumCheck> ExponentialMassCheck(int n, int64_t rounds,
                                                  uint64_t seed) {
  ASSIGN_OR_RETURN(TopologySchedule schedule, TopologySchedule::ExponentialPeriodic(n));
  return MassCheck(schedule, rounds, seed);
}

absl::StatusOr<PushSumCheck> RingConsensusCheck(int n, int k, int64_t rounds,
                                                uint64_t seed) {
  ASSIGN_OR_RETURN(TopologySchedule schedule, TopologySchedule::StaticRing(n, k));
  return MassCheck(schedule, rounds, seed);
}

ExperimentConfig DegenerateConfig(int64_t total) {
  ExperimentConfig c;
  c.algorithm = Algorithm::kAdpVrsgp;
  c.n = 6;
  c.total = total;
  c.seed = 7;
  c.topology.kind = TopologySchedule::Kind::kStaticRing;
  c.topology.k = 2;
  c.noise.form = NoiseSchedule::Form::kStepwise;
  c.noise.a1 = 2.0;
  c.noise.a2 = 1.0;
  c.noise.s = 0.0;
  c.noise.tau = 1;
  c.lr.eta = 0.5;
  c.clip.g0 = 1e12;
  c.clip.psi = 1.0;
  c.fusion.theta = 0.0;
  c.fusion.tau = 1;
  c.privacy.sigma = 0.0;
  c.privacy.sampling_ratio = 0.5;
  c.model.kind = Model::Kind::kLogistic;
  c.model.l2 = 0.01;
  c.data.samples = 120;
  c.data.dim = 3;
  c.data.separation = 3.0;
  c.data.seed = 3;
  c.theory.enabled = false;
  return c;
}

absl::StatusOr<double> DegenerateReductionGap(const ExperimentConfig& config,
                                              uint64_t seed) {
  ASSIGN_OR_RETURN(Experiment e, PrepareExperiment(config));
  const int n = config.n;
  const int k = config.topology.k;
  const double step = *config.lr.eta / (config.noise.a1 * config.noise.a1);

  // Reference: plain decentralized SGD with the same batches.
  std::vector<Eigen::VectorXd> ref(n, e.x0);
  double gap = 0.0;
  absl::Status failure;
  auto observer = [&](int64_t t, const std::vector<NodeState>& states) {
    std::vector<Eigen::VectorXd> moved(n);
    for (int j = 0; j < n; ++j) {
      moved[j] = ref[j];
      const auto& nodes = e.partition.node_indices[j];
      if (nodes.empty()) continue;
      std::mt19937_64 rng = DeriveStream(seed, j, t, StreamPurpose::kBatch);
      const std::vector<int> batch =
          SampleBatch(nodes, config.privacy.sampling_ratio, rng);
      absl::StatusOr<LossGrad> lg = e.model.LossAndGrad(ref[j], e.train, batch);
      if (!lg.ok()) {
        failure = lg.status();
        return;
      }
      moved[j] -= step * lg->grad;
    }
    for (int i = 0; i < n; ++i) {
      ref[i] = Eigen::VectorXd::Zero(e.model.dim());
      for (int j = 0; j < n; ++j) {
        const int hop = ((i - j) % n + n) % n;
        if (hop <= k) ref[i] += moved[j] / static_cast<double>(k + 1);
      }
      gap = std::max(gap, (states[i].z - ref[i]).lpNorm<Eigen::Infinity>());
    }
  };
  ASSIGN_OR_RETURN(RunSummary summary, RunPrepared(e, seed, nullptr, observer));
  (void)summary;
  RETURN_IF_ERROR(failure);
  return gap;
}

absl::StatusOr<int> ConnectivityMismatches(int cases, uint64_t seed) {
  std::mt19937_64 rng = DeriveStream(seed, 0, 0, StreamPurpose::kOracle);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int mismatches = 0;
  for (int c = 0; c < cases; ++c) {
    const int n = 2 + static_cast<int>(unit(rng) * 6);
    const int rounds = 1 + static_cast<int>(unit(rng) * 4);
    const int window = 1 + static_cast<int>(unit(rng) * rounds);
    const double density = 0.1 + 0.4 * unit(rng);
    // adj[r][i][j]: j sends to i in round r.
    std::vector<std::vector<std::vector<bool>>> adj(
        rounds, std::vector<std::vector<bool>>(n, std::vector<bool>(n, false)));
    std::vector<DirectedEdgeSet> sets;
    for (int r = 0; r < rounds; ++r) {
      std::vector<Edge> edges;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i != j && unit(rng) < density) {
            adj[r][i][j] = true;
            edges.push_back({i, j});
          }
        }
      }
      ASSIGN_OR_RETURN(DirectedEdgeSet set, DirectedEdgeSet::Create(n, edges));
      sets.push_back(std::move(set));
    }
    ASSIGN_OR_RETURN(TopologySchedule schedule,
                     TopologySchedule::ExplicitList(n, sets));
    const int64_t horizon = std::lcm<int64_t>(rounds, window);
    int oracle_worst = 0;
    for (int64_t begin = 0; begin + window <= horizon; begin += window) {
      // Oracle graph: receiver -> sender reversed into sender -> receiver
      // reachability (diameter is symmetric in that reversal).
      std::vector<std::vector<bool>> joined(n, std::vector<bool>(n, false));
      for (int64_t t = begin; t < begin + window; ++t) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            if (adj[t % rounds][i][j]) joined[j][i] = true;
          }
        }
      }
      const int oracle = FloydWarshallDiameter(n, joined);
      ASSIGN_OR_RETURN(DirectedEdgeSet unioned,
                       UnionOver(schedule, begin, begin + window));
      const int measured = Diameter(unioned).value_or(-1);
      if (oracle != measured) ++mismatches;
      if (oracle < 0 || oracle_worst < 0) {
        oracle_worst = -1;
      } else {
        oracle_worst = std::max(oracle_worst, oracle);
      }
    }
    const int kappa = 1 + static_cast<int>(unit(rng) * n);
    ASSIGN_OR_RETURN(ConnectivityReport report,
                     VerifyJointConnectivity(schedule, window, kappa, horizon));
    const bool expected = oracle_worst >= 0 && oracle_worst <= kappa;
    if (report.satisfied != expected) ++mismatches;
  }
  return mismatches;
}

}  // namespace dpgossip
