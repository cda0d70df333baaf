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

#ifndef DPGOSSIP_PRIVACY_H_
#define DPGOSSIP_PRIVACY_H_

#include <cstdint>
#include <optional>
#include <utility>

#include "absl/status/statusor.h"

namespace dpgossip {

// Noise-intensity coefficient alpha^t over t in [0, T]. The injected noise at
// iteration t is alpha^(T-t) * sigma, so index T is part of the domain.
class NoiseSchedule {
 public:
  enum class Form { kPower, kStepwise };

  // alpha^t = sqrt(K) t^s, with alpha^0 := alpha^1 so the schedule never
  // vanishes.
  static absl::StatusOr<NoiseSchedule> Power(double k, double s, int64_t total,
                                             int64_t tau);
  // alpha^t = a1 * (floor(t / tau) + a2)^s; constant on each interval of
  // length tau. Negative s gives the decreasing variant.
  static absl::StatusOr<NoiseSchedule> Stepwise(double a1, double a2,
                                                int64_t tau, double s,
                                                int64_t total);

  Form form() const { return form_; }
  double k() const { return k_; }
  double s() const { return s_; }
  double a1() const { return a1_; }
  double a2() const { return a2_; }
  int64_t tau() const { return tau_; }
  int64_t total() const { return total_; }

  absl::StatusOr<double> AlphaAt(int64_t t) const;
  // Caller guarantees 0 <= t <= total().
  double Alpha(int64_t t) const;

  bool operator==(const NoiseSchedule&) const = default;

 private:
  NoiseSchedule() = default;

  Form form_ = Form::kStepwise;
  double k_ = 1.0;
  double s_ = 0.0;
  double a1_ = 1.0;
  double a2_ = 1.0;
  int64_t tau_ = 1;
  int64_t total_ = 1;
};

struct LrSchedule {
  double eta = 0.1;
  // Switch fraction of the piecewise learning-rate coefficient, in (0, 1).
  double xi = 0.5;

  // eta = k sqrt(n) / total^p.
  static absl::StatusOr<LrSchedule> Scaled(double k, int n, int64_t total,
                                           double p, double xi);
  bool operator==(const LrSchedule&) const = default;
};

// beta^t = alpha^t alpha^(T-t) for t <= xi T, alpha^t alpha^t afterwards.
absl::StatusOr<double> BetaAt(const NoiseSchedule& schedule,
                              const LrSchedule& lr, int64_t t);
// eta / beta^t.
absl::StatusOr<double> LrAt(const NoiseSchedule& schedule,
                            const LrSchedule& lr, int64_t t);

struct PrivacyBudget {
  double epsilon = 1.0;
  double delta = 1e-5;
  // |B_i| / |D_i|.
  double sampling_ratio = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  // Base noise scale, filled by CalibrateSigma.
  std::optional<double> sigma;

  bool operator==(const PrivacyBudget&) const = default;
};

// sum_{t=0}^{T-1} 1 / (alpha^t)^2.
double InverseAlphaSquaredSum(const NoiseSchedule& schedule);

// sigma = G c2 sampling_ratio sqrt(ln(1/delta)) / epsilon
//         * sqrt(sum_t 1/(alpha^t)^2),
// valid when epsilon < c1 sampling_ratio^2 T. Stores the result in
// budget.sigma.
absl::StatusOr<double> CalibrateSigma(PrivacyBudget& budget, double clip,
                                      const NoiseSchedule& schedule);

// Log-moment bound of the accountant at integer order lambda:
//   order (order + 1) q^2 / (2 z^2) * sum_t 1/(alpha^t)^2,
// where q is the sampling ratio and z = sigma / sensitivity is the noise
// multiplier.
absl::StatusOr<double> MomentsBound(double order, const PrivacyBudget& budget,
                                    const NoiseSchedule& schedule,
                                    double sensitivity = 1.0);

struct PrivacySpent {
  // min over orders of exp(alpha_M(order) - order * epsilon).
  double delta_at_epsilon = 1.0;
  int delta_order = 1;
  // min over orders of (alpha_M(order) + ln(1/delta)) / order.
  double epsilon_at_delta = 0.0;
  int epsilon_order = 1;
};

// Converts the moments bound to (epsilon, delta) over orders 1..max_order.
absl::StatusOr<PrivacySpent> AccountPrivacy(const PrivacyBudget& budget,
                                            const NoiseSchedule& schedule,
                                            double sensitivity,
                                            int max_order = 64);

// (sum_t 1/beta^t, sum_t 1/(alpha^t)^2); the first never exceeds the second.
std::pair<double, double> BetaSumDominance(const NoiseSchedule& schedule,
                                           const LrSchedule& lr);

}  // namespace dpgossip

#endif  // DPGOSSIP_PRIVACY_H_
