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

#include "dpgossip/fusion.h"

#include <algorithm>
#include <cmath>

namespace dpgossip {

ClipResult Clip(const Eigen::VectorXd& g, double threshold) {
  const double norm = g.norm();
  ClipResult result;
  if (norm <= threshold || norm == 0.0) {
    result.clipped = g;
    return result;
  }
  const double scale = threshold / norm;
  result.clipped = scale * g;
  result.residual_sq = (1.0 - scale) * (1.0 - scale) * norm * norm;
  return result;
}

Eigen::VectorXd Perturb(const Eigen::VectorXd& clipped, double multiplier,
                        double sigma, std::mt19937_64& rng) {
  if (sigma == 0.0) return clipped;
  std::normal_distribution<double> gauss(0.0, sigma);
  Eigen::VectorXd out = clipped;
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    out[k] += multiplier * gauss(rng);
  }
  return out;
}

bool FusesAt(const FusedGradientState& state, double alpha_now, int64_t t) {
  // alpha comes from integer floor division, so exact equality is meaningful.
  return t != 0 && state.prev.has_value() && state.last_alpha.has_value() &&
         *state.last_alpha == alpha_now;
}

Eigen::VectorXd Fuse(const Eigen::VectorXd& noisy, FusedGradientState& state,
                     double alpha_now, double theta, int64_t t) {
  Eigen::VectorXd out;
  if (FusesAt(state, alpha_now, t)) {
    out = (1.0 - theta) * noisy + theta * *state.prev;
  } else {
    out = noisy;
  }
  state.prev = out;
  state.last_alpha = alpha_now;
  return out;
}

double NoiseFactor(double theta, int64_t tau) {
  const double floor = (1.0 - theta) / (1.0 + theta);
  return floor + 2.0 * std::pow(theta, 2.0 * tau - 1.0) / (1.0 + theta);
}

double StalenessBound(double theta, int64_t tau, double d_tau) {
  return NoiseFactor(theta, tau) * d_tau;
}

int64_t SelectTau(double theta, double tol) {
  if (theta <= 0.0) return 1;
  int64_t tau = 1;
  while (2.0 * std::pow(theta, 2.0 * tau - 1.0) / (1.0 + theta) >= tol) ++tau;
  return tau;
}

std::optional<int64_t> ReportedTau(double theta) {
  if (theta == 0.3) return 12;
  if (theta == 0.5) return 6;
  if (theta == 0.7) return 4;
  return std::nullopt;
}

double IntervalDeviationTracker::Observe(const Eigen::VectorXd& clipped,
                                         bool starts_interval) {
  if (starts_interval) window_.clear();
  double worst = 0.0;
  for (const Eigen::VectorXd& earlier : window_) {
    worst = std::max(worst, (clipped - earlier).squaredNorm());
  }
  window_.push_back(clipped);
  return worst;
}

}  // namespace dpgossip
