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

#include "dpgossip/pushsum.h"

#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace dpgossip {

Eigen::VectorXd MeanParam(const std::vector<NodeState>& states) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(states.front().x.size());
  for (const NodeState& s : states) mean += s.x;
  return mean / static_cast<double>(states.size());
}

double ConsensusError(const std::vector<NodeState>& states) {
  const Eigen::VectorXd mean = MeanParam(states);
  double total = 0.0;
  for (const NodeState& s : states) total += (s.z - mean).squaredNorm();
  return total / static_cast<double>(states.size());
}

absl::StatusOr<RoundOutcome> MixRound(const std::vector<NodeState>& states,
                                      const MixingMatrix& mixing) {
  const int n = static_cast<int>(states.size());
  if (n == 0) return absl::InvalidArgumentError("no node states to mix");
  if (mixing.n() != n) {
    return absl::InvalidArgumentError(absl::StrCat(
        "mixing matrix is ", mixing.n(), "x", mixing.n(), " but there are ", n,
        " nodes"));
  }
  RoundOutcome outcome;
  outcome.states.resize(n);
  const Eigen::Index dim = states.front().x.size();
  for (int i = 0; i < n; ++i) {
    NodeState& next = outcome.states[i];
    next.node_id = states[i].node_id;
    next.x = Eigen::VectorXd::Zero(dim);
    next.w = 0.0;
    for (int j = 0; j < n; ++j) {
      const double weight = mixing(i, j);
      if (weight == 0.0) continue;
      next.x += weight * states[j].x;
      next.w += weight * states[j].w;
    }
    if (!(next.w > 0.0)) {
      return absl::InternalError(absl::StrCat(
          "push-sum weight of node ", i, " collapsed to ", next.w));
    }
    next.z = next.x / next.w;
  }
  outcome.mean_param = MeanParam(outcome.states);
  outcome.consensus_error = ConsensusError(outcome.states);
  return outcome;
}

absl::StatusOr<double> DeviationBound(const PropagationParams& params,
                                      double x0_norm,
                                      std::span<const double> step_sizes,
                                      std::span<const double> fused_norms,
                                      int64_t t) {
  if (!(params.q >= 0.0 && params.q < 1.0)) {
    return absl::FailedPreconditionError(
        absl::StrCat("deviation bound needs q in [0, 1), got ", params.q));
  }
  if (t < 0 || static_cast<int64_t>(step_sizes.size()) <= t ||
      static_cast<int64_t>(fused_norms.size()) <= t) {
    return absl::InvalidArgumentError(
        absl::StrCat("history must cover s = 0..", t));
  }
  const double c = params.c_bound;
  double bound = c * std::pow(params.q, static_cast<double>(t)) * x0_norm;
  for (int64_t s = 0; s <= t; ++s) {
    bound += c * step_sizes[s] * std::pow(params.q, static_cast<double>(t - s)) *
             fused_norms[s];
  }
  return bound;
}

}  // namespace dpgossip
