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

#ifndef DPGOSSIP_PUSHSUM_H_
#define DPGOSSIP_PUSHSUM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "dpgossip/topology.h"

namespace dpgossip {

// Push-sum triple of one node. z = x / w after every mixing step.
struct NodeState {
  int node_id = 0;
  Eigen::VectorXd x;
  double w = 1.0;
  Eigen::VectorXd z;

  static NodeState Initial(int node_id, const Eigen::VectorXd& x0) {
    return NodeState{node_id, x0, 1.0, x0};
  }
};

struct RoundOutcome {
  std::vector<NodeState> states;
  // (1/n) sum_i ||z_i - x_bar||^2.
  double consensus_error = 0.0;
  // (1/n) sum_i x_i.
  Eigen::VectorXd mean_param;
};

// x <- x - step * fused. Leaves w and z for the mixing step.
inline void LocalHalfStep(NodeState& state, const Eigen::VectorXd& fused,
                          double step) {
  state.x -= step * fused;
}

// x_i <- sum_j P_ij x_j, w_i <- sum_j P_ij w_j, z_i <- x_i / w_i. Sums run in
// ascending node order so results never depend on evaluation order.
absl::StatusOr<RoundOutcome> MixRound(const std::vector<NodeState>& states,
                                      const MixingMatrix& mixing);

Eigen::VectorXd MeanParam(const std::vector<NodeState>& states);
double ConsensusError(const std::vector<NodeState>& states);

// Right-hand side of the node-to-average deviation bound
//   C q^t ||x_i^0|| + C sum_{s<=t} eta^s q^(t-s) ||g~^s||,
// with C taken at its upper bound. `step_sizes` and `fused_norms` cover
// s = 0..t.
absl::StatusOr<double> DeviationBound(const PropagationParams& params,
                                      double x0_norm,
                                      std::span<const double> step_sizes,
                                      std::span<const double> fused_norms,
                                      int64_t t);

}  // namespace dpgossip

#endif  // DPGOSSIP_PUSHSUM_H_
