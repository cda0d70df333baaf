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

#ifndef DPGOSSIP_TOPOLOGY_H_
#define DPGOSSIP_TOPOLOGY_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"

namespace dpgossip {

// A directed link: `sender` transmits to `receiver` in the current round.
struct Edge {
  int receiver = 0;
  int sender = 0;
  auto operator<=>(const Edge&) const = default;
};

// Edge set of one communication round over nodes [0, n). Every node always
// carries its self-loop.
class DirectedEdgeSet {
 public:
  // Self-loops are added for every node; duplicates collapse.
  static absl::StatusOr<DirectedEdgeSet> Create(int n,
                                                const std::vector<Edge>& edges);

  int n() const { return n_; }
  // Sorted by (receiver, sender).
  std::vector<Edge> edges() const;
  bool Contains(int receiver, int sender) const;
  // Receivers of `sender`, ascending, including `sender` itself.
  const std::vector<int>& OutNeighbors(int sender) const { return out_[sender]; }
  int OutDegree(int sender) const {
    return static_cast<int>(out_[sender].size());
  }
  int MaxOutDegree() const;

  bool operator==(const DirectedEdgeSet&) const = default;

 private:
  DirectedEdgeSet(int n, std::vector<std::vector<int>> out)
      : n_(n), out_(std::move(out)) {}

  int n_;
  std::vector<std::vector<int>> out_;
};

// Column-stochastic weights; entry (i, j) is the share of node j's mass sent
// to node i.
class MixingMatrix {
 public:
  explicit MixingMatrix(Eigen::MatrixXd weights) : w_(std::move(weights)) {}

  int n() const { return static_cast<int>(w_.rows()); }
  double operator()(int i, int j) const { return w_(i, j); }
  const Eigen::MatrixXd& weights() const { return w_; }
  bool IsColumnStochastic(double tol = 1e-12) const;
  bool IsDoublyStochastic(double tol = 1e-12) const;

 private:
  Eigen::MatrixXd w_;
};

// Uniform 1/outdeg(j) over each sender's out-neighbours.
absl::StatusOr<MixingMatrix> BuildMixingMatrix(const DirectedEdgeSet& edges);

class TopologySchedule {
 public:
  enum class Kind { kStaticRing, kExponentialPeriodic, kExplicitList };

  // Node i sends to i+1, ..., i+k (mod n); equivalently receives from
  // i-1, ..., i-k.
  static absl::StatusOr<TopologySchedule> StaticRing(int n, int k);
  // Out-set of node i at round t is {i + j * 2^(t mod log2 n) mod n :
  // j = 0..n/2-1}. Requires n to be a power of two, n >= 2.
  static absl::StatusOr<TopologySchedule> ExponentialPeriodic(int n);
  // Cycles through `rounds`, one entry per iteration.
  static absl::StatusOr<TopologySchedule> ExplicitList(
      int n, std::vector<DirectedEdgeSet> rounds);

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  int ring_k() const { return ring_k_; }
  // Number of rounds after which the schedule repeats.
  int64_t period() const;

  absl::StatusOr<DirectedEdgeSet> At(int64_t t) const;

 private:
  TopologySchedule(Kind kind, int n) : kind_(kind), n_(n) {}

  Kind kind_;
  int n_;
  int ring_k_ = 0;
  int log2_n_ = 0;
  std::vector<DirectedEdgeSet> rounds_;
};

// Plain-text edge list: one line per iteration, whitespace separated "i<j"
// tokens meaning j sends to i. Self-loops are implicit; blank lines are rounds
// with only self-loops; lines starting with '#' are skipped.
absl::StatusOr<std::vector<DirectedEdgeSet>> ParseEdgeList(
    int n, absl::string_view text);
absl::StatusOr<TopologySchedule> LoadEdgeListSchedule(int n,
                                                      const std::string& path);

struct ConnectivityReport {
  int window = 1;
  int kappa = 1;
  bool satisfied = false;
  // First window index l whose union over [lJ, (l+1)J) is not strongly
  // connected within diameter kappa.
  std::optional<int64_t> witness;
  // Largest diameter seen over the checked windows; nullopt if some window
  // was not strongly connected.
  std::optional<int> max_diameter;
  int64_t windows_checked = 0;
};

// Union of the edge sets of rounds [begin, end).
absl::StatusOr<DirectedEdgeSet> UnionOver(const TopologySchedule& schedule,
                                          int64_t begin, int64_t end);

// Directed diameter by BFS from every node; nullopt when not strongly
// connected.
std::optional<int> Diameter(const DirectedEdgeSet& edges);

absl::StatusOr<ConnectivityReport> VerifyJointConnectivity(
    const TopologySchedule& schedule, int window, int kappa, int64_t horizon);

// Horizon covering every distinct window union: lcm(period, window).
int64_t FullCycleHorizon(const TopologySchedule& schedule, int window);

// Largest out-degree (self-loop included) over rounds [0, horizon).
absl::StatusOr<int> MaxOutDegree(const TopologySchedule& schedule,
                                 int64_t horizon);

struct PropagationParams {
  double lambda = 0.0;
  double q = 0.0;
  // Value of the strict upper bound on C; calculators using it are upper-bound
  // evaluators.
  double c_bound = 0.0;
  int max_out_degree = 0;
};

// lambda = 1 - n U^(-kappa J), q = lambda^(1/(kappa J + 1)),
// C < 2 sqrt(d) U^(kappa J) / lambda^((kappa J + 2)/(kappa J + 1)).
absl::StatusOr<PropagationParams> ComputePropagationParams(int n,
                                                           int max_out_degree,
                                                           int kappa,
                                                           int window, int dim);

}  // namespace dpgossip

#endif  // DPGOSSIP_TOPOLOGY_H_
