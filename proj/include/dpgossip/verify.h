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


#ifndef DPGOSSIP_VERIFY_H_
#define DPGOSSIP_VERIFY_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgossip/config.h"
#include "dpgossip/models.h"

namespace dpgossip {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  // How measured is compared against expected, e.g. "<= 1e-10".
  std::string relation;
  bool pass = false;
};

std::string FormatCheck(const CheckResult& check);

// Suites: noise-factor, consensus, gradients, schedules, connectivity, all.
const std::vector<std::string>& VerifySuiteNames();
absl::StatusOr<std::vector<CheckResult>> RunVerifySuite(const std::string& suite);

// Variance of the fused value after a full interval of tau steps fed with
// unit Gaussian noise, estimated from `trials` independent chains.
double MonteCarloNoiseFactor(double theta, int64_t tau, int64_t trials,
                             uint64_t seed);

// Ratios of E||fused - clipped||^2 to the staleness bound over intervals
// whose clipped gradients pairwise differ by at most sqrt(d_tau).
struct StalenessRatios {
  // At the last step of the interval, against h(theta, tau) d_tau.
  double last_step = 0.0;
  // Max over steps k of the ratio against h(theta, k + 1) d_tau, the bound
  // for the chain length reached so far.
  double worst_prefix = 0.0;
  // Max over steps of the ratio against h(theta, tau) d_tau. Early steps
  // can exceed 1 when theta^2 > h(theta, tau).
  double worst_any_step = 0.0;
};
StalenessRatios MonteCarloStalenessRatio(double theta, int64_t tau,
                                         double d_tau, int64_t trials,
                                         uint64_t seed);

// Largest relative error between analytic and central-difference gradients
// (step 1e-6) over `points` random parameter vectors.
absl::StatusOr<double> MaxGradientError(Model::Kind kind, int points,
                                        uint64_t seed);

struct DominanceSweep {
  int configs = 0;
  int violations = 0;
  // min over configs of (rhs - lhs) / rhs.
  double min_relative_slack = 0.0;
};
DominanceSweep BetaDominanceSweep(int configs, uint64_t seed);

struct PushSumCheck {
  // max over rounds of |sum_i w_i - n| / n.
  double max_mass_error = 0.0;
  // max over rounds of ||sum_i x_i - sum_i x_i^0||_inf / max(1, ||sum x^0||).
  double max_value_drift = 0.0;
  // max_i ||z_i - x_bar|| after the last round.
  double final_max_deviation = 0.0;
};
absl::StatusOr<PushSumCheck> ExponentialMassCheck(int n, int64_t rounds,
                                                  uint64_t seed);
absl::StatusOr<PushSumCheck> RingConsensusCheck(int n, int k, int64_t rounds,
                                                uint64_t seed);

// Config for the reduction to plain decentralized SGD: sigma = 0, theta = 0,
// psi = 1, clip 1e12, constant alpha = 2 (so beta = 4) on a ring whose
// uniform weights are doubly stochastic.
ExperimentConfig DegenerateConfig(int64_t total);

// max over iterations and nodes of ||z_i - x_i^ref||_inf between the engine
// and an independent decentralized SGD x_i <- sum_j P_ij (x_j - eta/4 g_j).
absl::StatusOr<double> DegenerateReductionGap(const ExperimentConfig& config,
                                              uint64_t seed);

// Number of random explicit schedules whose window-union diameter disagrees
// with a Floyd-Warshall oracle.
absl::StatusOr<int> ConnectivityMismatches(int cases, uint64_t seed);

}  // namespace dpgossip

#endif  // DPGOSSIP_VERIFY_H_
