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


#ifndef DPGOSSIP_THEORY_H_
#define DPGOSSIP_THEORY_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgossip/privacy.h"

namespace dpgossip {

// Problem and network constants entering the convergence analysis.
struct TheoryParams {
  // Gradient Lipschitz constant.
  double L = 0.0;
  // Heterogeneity constants: ||grad f_i - grad f|| <= a and the per-sample
  // spread m.
  double a = 0.0;
  double m = 0.0;
  // Propagation constants of the mixing sequence.
  double c = 0.0;
  double q = 0.0;
  double lambda = 0.0;
  // f(x^0) - f*.
  double f0 = 0.0;
  double x0_norm = 0.0;
  int d = 1;
};

// Returned when a floor does not fit in int64.
inline constexpr int64_t kIterationOverflow = INT64_MAX;

struct MinIterationsReport {
  // 4nL^2, (162nC^2L^2/(1-q^2))^e, (nL^2)^e, n^e, (2K/(nL))^e,
  // (9/sqrt(n))^(4/(3-2p)) with e = 2/(1+2p).
  std::array<double, 6> terms{};
  int dominant = 0;
  // ceil(max term), or kIterationOverflow.
  int64_t floor = 0;
  bool overflow = false;
};

absl::StatusOr<MinIterationsReport> MinIterations(const TheoryParams& theory,
                                                  int n, double p, double k);

// (1/n) sum_i G^2 c2^2 ratio_i^2 ln(1/delta_i) / epsilon_i^2.
absl::StatusOr<double> BudgetNoiseMean(const std::vector<PrivacyBudget>& budgets,
                                       double clip);

// eta^2/n^2 * sum_i G^2 c2^2 ratio_i^2 ln(1/delta_i)/epsilon_i^2
//   * sum_t (alpha^(T-t))^2 / (beta^t)^2 * sum_t 1/(alpha^t)^2.
absl::StatusOr<double> ComputeNoiseSumM(
    const std::vector<PrivacyBudget>& budgets, double clip,
    const NoiseSchedule& schedule, const LrSchedule& lr);

struct BoundBreakdown {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double m_noise = 0.0;
  double h = 0.0;
  double fixed_term = 0.0;
  double noise_term = 0.0;
  double bias_term = 0.0;
  double total = 0.0;
};

// Right-hand side of the non-convex convergence bound with the three error
// sources separated. `m_noise` comes from ComputeNoiseSumM.
absl::StatusOr<BoundBreakdown> ConvergenceBound(const TheoryParams& theory,
                                                int n, int64_t total,
                                                double theta, int64_t tau,
                                                double m_noise,
                                                double rho_total,
                                                double upsilon_total);

// Constants bounding sum_t (alpha^t)^2 for the general stepwise form
// a1^2 / (floor(t/a3) + a2)^(2s): H1 T^(1-2s) (s < 1/2), H2 log T (s = 1/2,
// T >= 2), H3 (s > 1/2).
absl::StatusOr<double> ScheduleSumConstant(double a1, double a2, double a3,
                                           double s);

struct RegimeInputs {
  double p = 0.0;
  int n = 1;
  int64_t total = 1;
  double s = 0.25;
  double a1 = 1.0;
  double a2 = 1.0;
  double a3 = 1.0;
  // (1/n) sum_i G^2 c2^2 ratio_i^2 ln(1/delta_i)/epsilon_i^2.
  double budget_mean = 0.0;
  double h = 1.0;
  TheoryParams theory;
};

struct RegimeBound {
  std::string label;
  // T-dependent prefactor of the noise term.
  double prefactor = 0.0;
  double h_constant = 0.0;
  double nu = 0.0;
  double a2_constant = 0.0;
  double noise_term = 0.0;
  double fixed_term = 0.0;
  double total = 0.0;
};

// Refined bound when tau = 1 and no clipping occurs; the regime follows the
// sign of p.
absl::StatusOr<RegimeBound> RefinedRegimeBound(const RegimeInputs& inputs);

// Smallest T in [2, max_total] from which the regime bounds at p = -0.1, 0,
// 0.1 are strictly increasing in p, checked at every T up to max_total.
// Returns max_total + 1 when no such T exists.
absl::StatusOr<int64_t> RegimeCrossover(RegimeInputs inputs, int64_t max_total);

// p* = 1/2 - 2s, the exponent pairing with s = 1/4 - p/2.
double OptimalP(double s);

}  // namespace dpgossip

#endif  // DPGOSSIP_THEORY_H_
