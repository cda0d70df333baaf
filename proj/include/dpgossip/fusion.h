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

#ifndef DPGOSSIP_FUSION_H_
#define DPGOSSIP_FUSION_H_

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "Eigen/Dense"

namespace dpgossip {

struct ClipConfig {
  double g0 = 0.1;
  // Per-iteration decay of the threshold, in (0, 1].
  double psi = 1.0;
  bool operator==(const ClipConfig&) const = default;
};

struct ClipResult {
  Eigen::VectorXd clipped;
  // ||(1 - min{1, G/||g||}) g||^2.
  double residual_sq = 0.0;
};

// Scales g by min{1, G / ||g||}.
ClipResult Clip(const Eigen::VectorXd& g, double threshold);

inline double DecayThreshold(const ClipConfig& config, double current) {
  return config.psi * current;
}

// clipped + multiplier * u with u ~ N(0, sigma^2 I), drawn from `rng`.
Eigen::VectorXd Perturb(const Eigen::VectorXd& clipped, double multiplier,
                        double sigma, std::mt19937_64& rng);

struct FusionConfig {
  // Weight on the previous fused gradient, in [0, 1).
  double theta = 0.0;
  int64_t tau = 1;
  bool operator==(const FusionConfig&) const = default;
};

struct FusedGradientState {
  std::optional<Eigen::VectorXd> prev;
  // Noise multiplier used at the previous step.
  std::optional<double> last_alpha;
};

// Progressive fusion of the noisy gradient. Blends with the previous fused
// gradient when the injected multiplier did not change since the last step
// and t != 0; otherwise passes `noisy` through, which starts a new interval.
Eigen::VectorXd Fuse(const Eigen::VectorXd& noisy, FusedGradientState& state,
                     double alpha_now, double theta, int64_t t);

// True when Fuse would blend at this step.
bool FusesAt(const FusedGradientState& state, double alpha_now, int64_t t);

// h = (1 - theta)/(1 + theta) + 2 theta^(2 tau - 1) / (1 + theta), the
// variance multiplier of injected noise after a full fusion interval.
double NoiseFactor(double theta, int64_t tau);

// h(theta, tau) * d_tau.
double StalenessBound(double theta, int64_t tau, double d_tau);

// Smallest tau >= 1 with h - (1 - theta)/(1 + theta) < tol.
int64_t SelectTau(double theta, double tol = 0.01);

// Interval lengths reported alongside the scan for theta in {0.3, 0.5, 0.7}.
std::optional<int64_t> ReportedTau(double theta);

// Tracks clipped gradients within the current fusion interval and reports the
// largest squared distance from the newest one to any earlier one.
class IntervalDeviationTracker {
 public:
  double Observe(const Eigen::VectorXd& clipped, bool starts_interval);

 private:
  std::vector<Eigen::VectorXd> window_;
};

}  // namespace dpgossip

#endif  // DPGOSSIP_FUSION_H_
