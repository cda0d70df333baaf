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

#include "dpgossip/topology.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "dpgossip/status_macros.h"

namespace dpgossip {

absl::StatusOr<DirectedEdgeSet> DirectedEdgeSet::Create(
    int n, const std::vector<Edge>& edges) {
  if (n < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("edge set needs at least one node, got n=", n));
  }
  std::vector<std::vector<int>> out(n);
  for (int i = 0; i < n; ++i) out[i].push_back(i);
  for (const Edge& e : edges) {
    if (e.receiver < 0 || e.receiver >= n || e.sender < 0 || e.sender >= n) {
      return absl::OutOfRangeError(absl::StrCat("edge (", e.receiver, ", ",
                                                e.sender, ") outside [0, ", n,
                                                ")"));
    }
    out[e.sender].push_back(e.receiver);
  }
  for (auto& list : out) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return DirectedEdgeSet(n, std::move(out));
}

std::vector<Edge> DirectedEdgeSet::edges() const {
  std::vector<Edge> result;
  for (int j = 0; j < n_; ++j) {
    for (int i : out_[j]) result.push_back({i, j});
  }
  std::sort(result.begin(), result.end());
  return result;
}

bool DirectedEdgeSet::Contains(int receiver, int sender) const {
  if (sender < 0 || sender >= n_) return false;
  return std::binary_search(out_[sender].begin(), out_[sender].end(),
                            receiver);
}

int DirectedEdgeSet::MaxOutDegree() const {
  int best = 0;
  for (int j = 0; j < n_; ++j) best = std::max(best, OutDegree(j));
  return best;
}

bool MixingMatrix::IsColumnStochastic(double tol) const {
  if ((w_.array() < 0.0).any()) return false;
  for (int j = 0; j < w_.cols(); ++j) {
    if (std::abs(w_.col(j).sum() - 1.0) > tol) return false;
  }
  return true;
}

bool MixingMatrix::IsDoublyStochastic(double tol) const {
  if (!IsColumnStochastic(tol)) return false;
  for (int i = 0; i < w_.rows(); ++i) {
    if (std::abs(w_.row(i).sum() - 1.0) > tol) return false;
  }
  return true;
}

absl::StatusOr<MixingMatrix> BuildMixingMatrix(const DirectedEdgeSet& edges) {
  const int n = edges.n();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const auto& receivers = edges.OutNeighbors(j);
    if (receivers.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("node ", j, " has zero out-degree"));
    }
    const double share = 1.0 / static_cast<double>(receivers.size());
    for (int i : receivers) w(i, j) = share;
  }
  return MixingMatrix(std::move(w));
}

absl::StatusOr<TopologySchedule> TopologySchedule::StaticRing(int n, int k) {
  if (n < 1) return absl::InvalidArgumentError("static ring needs n >= 1");
  if (k < 0 || (n > 1 && k >= n)) {
    return absl::InvalidArgumentError(
        absl::StrCat("static ring needs 0 <= k < n, got k=", k, ", n=", n));
  }
  TopologySchedule schedule(Kind::kStaticRing, n);
  schedule.ring_k_ = k;
  return schedule;
}

absl::StatusOr<TopologySchedule> TopologySchedule::ExponentialPeriodic(int n) {
  if (n < 2 || (n & (n - 1)) != 0) {
    return absl::InvalidArgumentError(absl::StrCat(
        "exponential-periodic topology needs n to be a power of two >= 2, got ",
        n));
  }
  TopologySchedule schedule(Kind::kExponentialPeriodic, n);
  while ((1 << schedule.log2_n_) < n) ++schedule.log2_n_;
  return schedule;
}

absl::StatusOr<TopologySchedule> TopologySchedule::ExplicitList(
    int n, std::vector<DirectedEdgeSet> rounds) {
  if (rounds.empty()) {
    return absl::InvalidArgumentError("explicit-list topology has no rounds");
  }
  for (size_t r = 0; r < rounds.size(); ++r) {
    if (rounds[r].n() != n) {
      return absl::InvalidArgumentError(absl::StrCat(
          "explicit-list round ", r, " has n=", rounds[r].n(), ", expected ", n));
    }
  }
  TopologySchedule schedule(Kind::kExplicitList, n);
  schedule.rounds_ = std::move(rounds);
  return schedule;
}

int64_t TopologySchedule::period() const {
  switch (kind_) {
    case Kind::kStaticRing:
      return 1;
    case Kind::kExponentialPeriodic:
      return log2_n_;
    case Kind::kExplicitList:
      return static_cast<int64_t>(rounds_.size());
  }
  return 1;
}

absl::StatusOr<DirectedEdgeSet> TopologySchedule::At(int64_t t) const {
  if (t < 0) {
    return absl::OutOfRangeError(absl::StrCat("negative iteration ", t));
  }
  std::vector<Edge> edges;
  switch (kind_) {
    case Kind::kStaticRing:
      for (int i = 0; i < n_; ++i) {
        for (int step = 1; step <= ring_k_; ++step) {
          edges.push_back({(i + step) % n_, i});
        }
      }
      break;
    case Kind::kExponentialPeriodic: {
      const int stride = 1 << static_cast<int>(t % log2_n_);
      for (int i = 0; i < n_; ++i) {
        for (int j = 0; j < n_ / 2; ++j) {
          edges.push_back({static_cast<int>((i + int64_t{j} * stride) % n_), i});
        }
      }
      break;
    }
    case Kind::kExplicitList:
      return rounds_[static_cast<size_t>(t % period())];
  }
  return DirectedEdgeSet::Create(n_, edges);
}

absl::StatusOr<std::vector<DirectedEdgeSet>> ParseEdgeList(
    int n, absl::string_view text) {
  std::vector<DirectedEdgeSet> rounds;
  int line_no = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() == '#') continue;
    std::vector<Edge> edges;
    for (absl::string_view token :
         absl::StrSplit(line, absl::ByAnyChar(" \t"), absl::SkipEmpty())) {
      std::vector<absl::string_view> parts = absl::StrSplit(token, '<');
      int receiver = 0;
      int sender = 0;
      if (parts.size() != 2 || !absl::SimpleAtoi(parts[0], &receiver) ||
          !absl::SimpleAtoi(parts[1], &sender)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "edge list line ", line_no, ": malformed token '", token,
            "', expected i<j"));
      }
      edges.push_back({receiver, sender});
    }
    auto round = DirectedEdgeSet::Create(n, edges);
    if (!round.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "edge list line ", line_no, ": ", round.status().message()));
    }
    rounds.push_back(*std::move(round));
  }
  // A trailing newline yields one empty final line; drop it.
  if (!text.empty() && text.back() == '\n' && !rounds.empty()) rounds.pop_back();
  if (rounds.empty()) return absl::InvalidArgumentError("edge list is empty");
  return rounds;
}

absl::StatusOr<TopologySchedule> LoadEdgeListSchedule(int n,
                                                      const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  ASSIGN_OR_RETURN(auto rounds, ParseEdgeList(n, buffer.str()));
  return TopologySchedule::ExplicitList(n, std::move(rounds));
}

absl::StatusOr<DirectedEdgeSet> UnionOver(const TopologySchedule& schedule,
                                          int64_t begin, int64_t end) {
  std::vector<Edge> all;
  for (int64_t t = begin; t < end; ++t) {
    ASSIGN_OR_RETURN(DirectedEdgeSet round, schedule.At(t));
    for (const Edge& e : round.edges()) all.push_back(e);
  }
  return DirectedEdgeSet::Create(schedule.n(), all);
}

std::optional<int> Diameter(const DirectedEdgeSet& edges) {
  const int n = edges.n();
  int diameter = 0;
  std::vector<int> dist(n);
  for (int source = 0; source < n; ++source) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[source] = 0;
    std::queue<int> frontier;
    frontier.push(source);
    int reached = 1;
    while (!frontier.empty()) {
      const int u = frontier.front();
      frontier.pop();
      for (int v : edges.OutNeighbors(u)) {
        if (dist[v] >= 0) continue;
        dist[v] = dist[u] + 1;
        diameter = std::max(diameter, dist[v]);
        ++reached;
        frontier.push(v);
      }
    }
    if (reached != n) return std::nullopt;
  }
  return diameter;
}

absl::StatusOr<ConnectivityReport> VerifyJointConnectivity(
    const TopologySchedule& schedule, int window, int kappa, int64_t horizon) {
  if (window < 1 || kappa < 1 || horizon < window) {
    return absl::InvalidArgumentError(absl::StrCat(
        "connectivity check needs J >= 1, kappa >= 1, horizon >= J; got J=",
        window, ", kappa=", kappa, ", horizon=", horizon));
  }
  ConnectivityReport report;
  report.window = window;
  report.kappa = kappa;
  report.satisfied = true;
  int worst = 0;
  bool all_connected = true;
  for (int64_t l = 0; (l + 1) * window <= horizon; ++l) {
    ASSIGN_OR_RETURN(DirectedEdgeSet merged,
                     UnionOver(schedule, l * window, (l + 1) * window));
    ++report.windows_checked;
    const std::optional<int> diameter = Diameter(merged);
    if (!diameter.has_value()) {
      all_connected = false;
    } else {
      worst = std::max(worst, *diameter);
    }
    if ((!diameter.has_value() || *diameter > kappa) && report.satisfied) {
      report.satisfied = false;
      report.witness = l;
    }
  }
  if (all_connected) report.max_diameter = worst;
  return report;
}

int64_t FullCycleHorizon(const TopologySchedule& schedule, int window) {
  return std::lcm(schedule.period(), static_cast<int64_t>(window));
}

absl::StatusOr<int> MaxOutDegree(const TopologySchedule& schedule,
                                 int64_t horizon) {
  int best = 0;
  for (int64_t t = 0; t < horizon; ++t) {
    ASSIGN_OR_RETURN(DirectedEdgeSet round, schedule.At(t));
    best = std::max(best, round.MaxOutDegree());
  }
  return best;
}

absl::StatusOr<PropagationParams> ComputePropagationParams(int n,
                                                           int max_out_degree,
                                                           int kappa,
                                                           int window,
                                                           int dim) {
  if (n < 1 || max_out_degree < 1 || kappa < 1 || window < 1 || dim < 1) {
    return absl::InvalidArgumentError(
        "propagation parameters need n, U, kappa, J, d >= 1");
  }
  const double hops = static_cast<double>(kappa) * window;
  const double reach = std::pow(static_cast<double>(max_out_degree), hops);
  const double lambda = 1.0 - n / reach;
  if (!(lambda > 0.0)) {
    return absl::FailedPreconditionError(absl::StrCat(
        "out of regime: lambda = 1 - n U^(-kappa J) = ", lambda,
        " <= 0 (requires n < U^(kappa J): n=", n, ", U^(kappa J)=", reach,
        ")"));
  }
  PropagationParams params;
  params.lambda = lambda;
  params.q = std::pow(lambda, 1.0 / (hops + 1.0));
  params.c_bound = 2.0 * std::sqrt(static_cast<double>(dim)) * reach /
                   std::pow(lambda, (hops + 2.0) / (hops + 1.0));
  params.max_out_degree = max_out_degree;
  return params;
}

}  // namespace dpgossip
