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

#include "dpgossip/models.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "dpgossip/rng.h"
#include "dpgossip/status_macros.h"

namespace dpgossip {
namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;
using RowMajorMutMap =
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>;

// log(1 + exp(v)) without overflow.
double Softplus(double v) {
  return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

double Sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

absl::Status CheckBatch(const Model& model, const Eigen::VectorXd& params,
                        const Dataset& data, std::span<const int> batch) {
  if (batch.empty()) return absl::InvalidArgumentError("empty batch");
  if (params.size() != model.dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "parameter vector has size ", params.size(), ", model expects ",
        model.dim()));
  }
  if (data.feature_dim() != model.input_dim()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "dataset has ", data.feature_dim(), " features, model expects ",
        model.input_dim()));
  }
  for (int idx : batch) {
    if (idx < 0 || idx >= data.size()) {
      return absl::OutOfRangeError(absl::StrCat("sample index ", idx));
    }
  }
  return absl::OkStatus();
}

double MaxEigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric,
                                                        Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

absl::StatusOr<Model> Model::Quadratic(Eigen::MatrixXd curvature) {
  if (curvature.rows() < 1 || curvature.rows() != curvature.cols()) {
    return absl::InvalidArgumentError("quadratic curvature must be square");
  }
  if (!curvature.isApprox(curvature.transpose(), 1e-12)) {
    return absl::InvalidArgumentError("quadratic curvature must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(curvature,
                                                        Eigen::EigenvaluesOnly);
  if (!(solver.eigenvalues().minCoeff() > 0.0)) {
    return absl::InvalidArgumentError(
        "quadratic curvature must be positive definite");
  }
  Model model;
  model.kind_ = Kind::kQuadratic;
  model.dim_ = static_cast<int>(curvature.rows());
  model.input_dim_ = model.dim_;
  model.curvature_ = std::move(curvature);
  return model;
}

absl::StatusOr<Model> Model::Logistic(int input_dim, double l2) {
  if (input_dim < 1 || !(l2 >= 0.0)) {
    return absl::InvalidArgumentError(
        "logistic model needs input_dim >= 1 and l2 >= 0");
  }
  Model model;
  model.kind_ = Kind::kLogistic;
  model.input_dim_ = input_dim;
  model.dim_ = input_dim + 1;
  model.l2_ = l2;
  model.classes_ = 2;
  return model;
}

absl::StatusOr<Model> Model::Mlp(int input_dim, int hidden, int classes) {
  if (input_dim < 1 || hidden < 1 || classes < 2) {
    return absl::InvalidArgumentError(
        "mlp needs input_dim >= 1, hidden >= 1, classes >= 2");
  }
  Model model;
  model.kind_ = Kind::kMlp;
  model.input_dim_ = input_dim;
  model.hidden_ = hidden;
  model.classes_ = classes;
  model.dim_ = hidden * input_dim + hidden + classes * hidden + classes;
  return model;
}

absl::StatusOr<LossGrad> Model::LossAndGrad(const Eigen::VectorXd& params,
                                            const Dataset& data,
                                            std::span<const int> batch) const {
  RETURN_IF_ERROR(CheckBatch(*this, params, data, batch));
  const double inv = 1.0 / static_cast<double>(batch.size());
  LossGrad out;
  out.grad = Eigen::VectorXd::Zero(dim_);
  switch (kind_) {
    case Kind::kQuadratic: {
      Eigen::VectorXd mean_b = Eigen::VectorXd::Zero(dim_);
      for (int idx : batch) mean_b += data.features.row(idx).transpose();
      mean_b *= inv;
      const Eigen::VectorXd ax = curvature_ * params;
      out.loss = 0.5 * params.dot(ax) - mean_b.dot(params);
      out.grad = ax - mean_b;
      break;
    }
    case Kind::kLogistic: {
      const auto w = params.head(input_dim_);
      const double bias = params[input_dim_];
      for (int idx : batch) {
        const double y = data.labels[idx] == 1 ? 1.0 : -1.0;
        const double margin = y * (data.features.row(idx).dot(w) + bias);
        out.loss += Softplus(-margin);
        const double coeff = -y * Sigmoid(-margin);
        out.grad.head(input_dim_) += coeff * data.features.row(idx).transpose();
        out.grad[input_dim_] += coeff;
      }
      out.loss *= inv;
      out.grad *= inv;
      out.loss += 0.5 * l2_ * w.squaredNorm();
      out.grad.head(input_dim_) += l2_ * w;
      break;
    }
    case Kind::kMlp: {
      const int d = input_dim_;
      const int h = hidden_;
      const int c = classes_;
      const double* p = params.data();
      RowMajorMap w1(p, h, d);
      Eigen::Map<const Eigen::VectorXd> b1(p + h * d, h);
      RowMajorMap w2(p + h * d + h, c, h);
      Eigen::Map<const Eigen::VectorXd> b2(p + h * d + h + c * h, c);
      double* g = out.grad.data();
      RowMajorMutMap gw1(g, h, d);
      Eigen::Map<Eigen::VectorXd> gb1(g + h * d, h);
      RowMajorMutMap gw2(g + h * d + h, c, h);
      Eigen::Map<Eigen::VectorXd> gb2(g + h * d + h + c * h, c);
      for (int idx : batch) {
        const Eigen::VectorXd x = data.features.row(idx).transpose();
        const Eigen::VectorXd act = (w1 * x + b1).array().tanh().matrix();
        const Eigen::VectorXd logits = w2 * act + b2;
        const double top = logits.maxCoeff();
        const Eigen::VectorXd shifted = (logits.array() - top).exp().matrix();
        const double norm = shifted.sum();
        const int label = data.labels[idx];
        out.loss += std::log(norm) + top - logits[label];
        Eigen::VectorXd delta_out = shifted / norm;
        delta_out[label] -= 1.0;
        gw2 += delta_out * act.transpose();
        gb2 += delta_out;
        const Eigen::VectorXd delta_hidden =
            ((w2.transpose() * delta_out).array() *
             (1.0 - act.array().square()))
                .matrix();
        gw1 += delta_hidden * x.transpose();
        gb1 += delta_hidden;
      }
      out.loss *= inv;
      out.grad *= inv;
      break;
    }
  }
  return out;
}

absl::StatusOr<double> Model::Loss(const Eigen::VectorXd& params,
                                   const Dataset& data,
                                   std::span<const int> batch) const {
  ASSIGN_OR_RETURN(LossGrad lg, LossAndGrad(params, data, batch));
  return lg.loss;
}

absl::StatusOr<double> Model::Accuracy(const Eigen::VectorXd& params,
                                       const Dataset& data,
                                       std::span<const int> indices) const {
  if (kind_ == Kind::kQuadratic) {
    return absl::FailedPreconditionError("quadratic model has no accuracy");
  }
  RETURN_IF_ERROR(CheckBatch(*this, params, data, indices));
  int correct = 0;
  for (int idx : indices) {
    const Eigen::VectorXd x = data.features.row(idx).transpose();
    int predicted = 0;
    if (kind_ == Kind::kLogistic) {
      predicted = x.dot(params.head(input_dim_)) + params[input_dim_] > 0.0;
    } else {
      const double* p = params.data();
      RowMajorMap w1(p, hidden_, input_dim_);
      Eigen::Map<const Eigen::VectorXd> b1(p + hidden_ * input_dim_, hidden_);
      RowMajorMap w2(p + hidden_ * input_dim_ + hidden_, classes_, hidden_);
      Eigen::Map<const Eigen::VectorXd> b2(
          p + hidden_ * input_dim_ + hidden_ + classes_ * hidden_, classes_);
      const Eigen::VectorXd logits =
          w2 * (w1 * x + b1).array().tanh().matrix() + b2;
      logits.maxCoeff(&predicted);
    }
    correct += predicted == data.labels[idx];
  }
  return static_cast<double>(correct) / static_cast<double>(indices.size());
}

std::optional<double> Model::LipschitzConstant(const Dataset& data) const {
  switch (kind_) {
    case Kind::kQuadratic:
      return MaxEigenvalue(curvature_);
    case Kind::kLogistic: {
      if (data.size() == 0) return std::nullopt;
      Eigen::MatrixXd design(data.size(), input_dim_ + 1);
      design.leftCols(input_dim_) = data.features;
      design.col(input_dim_).setOnes();
      const Eigen::MatrixXd gram =
          design.transpose() * design / static_cast<double>(data.size());
      return 0.25 * MaxEigenvalue(gram) + l2_;
    }
    case Kind::kMlp:
      return std::nullopt;
  }
  return std::nullopt;
}

std::vector<int> AllIndices(int size) {
  std::vector<int> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

absl::StatusOr<SyntheticProblem> MakeSynthetic(const SyntheticSpec& spec) {
  if (spec.samples < 1 || spec.dim < 1) {
    return absl::InvalidArgumentError("synthetic data needs samples, dim >= 1");
  }
  const int classes = spec.kind == Model::Kind::kLogistic ? 2 : spec.classes;
  if (classes < 1) return absl::InvalidArgumentError("classes must be >= 1");
  std::mt19937_64 rng = DeriveStream(spec.seed, 0, 0, StreamPurpose::kData);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SyntheticProblem problem;
  Dataset& data = problem.data;
  data.num_classes = classes;
  data.features.resize(spec.samples, spec.dim);
  data.labels.resize(spec.samples);

  // Class means: +-(separation/2) u for two classes, otherwise points on a
  // sphere of radius separation/2 along random directions.
  Eigen::MatrixXd means(classes, spec.dim);
  for (int c = 0; c < classes; ++c) {
    Eigen::VectorXd u(spec.dim);
    for (int k = 0; k < spec.dim; ++k) u[k] = gauss(rng);
    u.normalize();
    if (classes == 2 && c == 1) u = -means.row(0).transpose().normalized();
    means.row(c) = 0.5 * spec.separation * u.transpose();
  }
  for (int i = 0; i < spec.samples; ++i) {
    const int label = i % classes;
    data.labels[i] = label;
    for (int k = 0; k < spec.dim; ++k) {
      data.features(i, k) = means(label, k) + gauss(rng);
    }
  }
  if (spec.kind == Model::Kind::kQuadratic) {
    Eigen::MatrixXd m(spec.dim, spec.dim);
    for (int r = 0; r < spec.dim; ++r) {
      for (int k = 0; k < spec.dim; ++k) m(r, k) = gauss(rng);
    }
    problem.curvature = m.transpose() * m / static_cast<double>(spec.dim) +
                        0.1 * Eigen::MatrixXd::Identity(spec.dim, spec.dim);
    // Symmetrize exactly.
    problem.curvature =
        0.5 * (problem.curvature + problem.curvature.transpose()).eval();
  }
  return problem;
}

absl::StatusOr<Dataset> LoadCsvDataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": missing header"));
  }
  const size_t columns =
      std::vector<absl::string_view>(absl::StrSplit(line, ',')).size();
  if (columns < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": need at least one feature and a label column"));
  }
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty()) continue;
    std::vector<absl::string_view> cells = absl::StrSplit(view, ',');
    if (cells.size() != columns) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ":", line_no, ": expected ", columns, " columns, got ",
          cells.size()));
    }
    std::vector<double> row(columns - 1);
    for (size_t k = 0; k + 1 < columns; ++k) {
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(cells[k]), &row[k])) {
        return absl::InvalidArgumentError(absl::StrCat(
            path, ":", line_no, ": bad feature '", cells[k], "'"));
      }
    }
    int label = 0;
    if (!absl::SimpleAtoi(absl::StripAsciiWhitespace(cells.back()), &label) ||
        label < 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          path, ":", line_no, ": bad label '", cells.back(), "'"));
    }
    rows.push_back(std::move(row));
    labels.push_back(label);
  }
  if (rows.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(path, ": no samples"));
  }
  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(columns - 1));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t k = 0; k + 1 < columns; ++k) data.features(r, k) = rows[r][k];
  }
  data.labels = std::move(labels);
  data.num_classes = *std::max_element(data.labels.begin(), data.labels.end()) + 1;
  return data;
}

TrainTestSplit SplitTrainTest(const Dataset& data, double test_fraction,
                              uint64_t seed) {
  std::vector<int> order = AllIndices(data.size());
  std::mt19937_64 rng = DeriveStream(seed, 1, 0, StreamPurpose::kData);
  std::shuffle(order.begin(), order.end(), rng);
  const int test_size = std::clamp(
      static_cast<int>(std::lround(test_fraction * data.size())), 0,
      data.size() - 1);
  auto take = [&](int begin, int end) {
    Dataset part;
    part.num_classes = data.num_classes;
    part.features.resize(end - begin, data.feature_dim());
    part.labels.resize(end - begin);
    for (int r = begin; r < end; ++r) {
      part.features.row(r - begin) = data.features.row(order[r]);
      part.labels[r - begin] = data.labels[order[r]];
    }
    return part;
  };
  TrainTestSplit split;
  split.test = take(0, test_size);
  split.train = take(test_size, data.size());
  return split;
}

std::vector<int> SampleBatch(std::span<const int> slice, double ratio,
                             std::mt19937_64& rng) {
  if (ratio >= 1.0) return {slice.begin(), slice.end()};
  std::vector<int> batch;
  if (slice.empty()) return batch;
  std::bernoulli_distribution include(ratio);
  for (int attempt = 0; attempt < 2 && batch.empty(); ++attempt) {
    for (int idx : slice) {
      if (include(rng)) batch.push_back(idx);
    }
  }
  if (batch.empty()) {
    std::uniform_int_distribution<size_t> pick(0, slice.size() - 1);
    batch.push_back(slice[pick(rng)]);
  }
  return batch;
}

absl::StatusOr<Partition> DirichletPartition(const std::vector<int>& labels,
                                             int num_classes,
                                             const PartitionSpec& spec) {
  if (!(spec.alpha_conc > 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Dirichlet concentration must be > 0, got ", spec.alpha_conc));
  }
  if (spec.n < 1) return absl::InvalidArgumentError("partition needs n >= 1");
  std::vector<std::vector<int>> by_class(std::max(num_classes, 1));
  for (int i = 0; i < static_cast<int>(labels.size()); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      return absl::OutOfRangeError(
          absl::StrCat("label ", labels[i], " outside [0, ", num_classes, ")"));
    }
    by_class[labels[i]].push_back(i);
  }
  Partition partition;
  partition.node_indices.resize(spec.n);
  for (int c = 0; c < static_cast<int>(by_class.size()); ++c) {
    std::vector<int>& members = by_class[c];
    if (members.empty()) continue;
    std::mt19937_64 rng =
        DeriveStream(spec.seed, static_cast<uint64_t>(c), 0,
                     StreamPurpose::kPartition);
    std::gamma_distribution<double> gamma(spec.alpha_conc, 1.0);
    std::vector<double> share(spec.n);
    double total = 0.0;
    for (double& v : share) {
      v = gamma(rng);
      total += v;
    }
    if (!(total > 0.0)) {
      // Every gamma draw underflowed; all mass goes to one node.
      std::uniform_int_distribution<int> pick(0, spec.n - 1);
      std::fill(share.begin(), share.end(), 0.0);
      share[pick(rng)] = 1.0;
      total = 1.0;
    }
    std::shuffle(members.begin(), members.end(), rng);
    const double count = static_cast<double>(members.size());
    double cumulative = 0.0;
    size_t begin = 0;
    for (int node = 0; node < spec.n; ++node) {
      cumulative += share[node] / total;
      size_t end = node == spec.n - 1
                       ? members.size()
                       : static_cast<size_t>(std::lround(cumulative * count));
      end = std::clamp(end, begin, members.size());
      for (size_t k = begin; k < end; ++k) {
        partition.node_indices[node].push_back(members[k]);
      }
      begin = end;
    }
  }
  for (int node = 0; node < spec.n; ++node) {
    auto& list = partition.node_indices[node];
    std::sort(list.begin(), list.end());
    if (list.empty()) partition.empty_nodes.push_back(node);
  }
  return partition;
}

absl::StatusOr<Heterogeneity> EstimateHeterogeneity(
    const Model& model, const Dataset& data, const Partition& partition,
    const Eigen::VectorXd& x0, double radius, int extra, uint64_t seed) {
  std::vector<Eigen::VectorXd> probes = {x0};
  for (int k = 0; k < x0.size(); ++k) {
    for (double sign : {-1.0, 1.0}) {
      Eigen::VectorXd p = x0;
      p[k] += sign * radius;
      probes.push_back(std::move(p));
    }
  }
  std::mt19937_64 rng = DeriveStream(seed, 0, 0, StreamPurpose::kOracle);
  std::uniform_real_distribution<double> box(-radius, radius);
  for (int e = 0; e < extra; ++e) {
    Eigen::VectorXd p = x0;
    for (int k = 0; k < p.size(); ++k) p[k] += box(rng);
    probes.push_back(std::move(p));
  }

  std::vector<int> active;
  for (int node = 0; node < static_cast<int>(partition.node_indices.size());
       ++node) {
    if (!partition.node_indices[node].empty()) active.push_back(node);
  }
  if (active.empty()) return absl::InvalidArgumentError("partition is empty");

  Heterogeneity result;
  for (const Eigen::VectorXd& x : probes) {
    std::vector<Eigen::VectorXd> local(active.size());
    Eigen::VectorXd global = Eigen::VectorXd::Zero(model.dim());
    for (size_t a = 0; a < active.size(); ++a) {
      ASSIGN_OR_RETURN(LossGrad lg,
                       model.LossAndGrad(x, data,
                                         partition.node_indices[active[a]]));
      local[a] = lg.grad;
      global += lg.grad;
    }
    global /= static_cast<double>(active.size());
    double m_sq = 0.0;
    for (size_t a = 0; a < active.size(); ++a) {
      result.a = std::max(result.a, (local[a] - global).norm());
      double worst = 0.0;
      for (int idx : partition.node_indices[active[a]]) {
        const int one[] = {idx};
        ASSIGN_OR_RETURN(LossGrad sample, model.LossAndGrad(x, data, one));
        worst = std::max(worst, (sample.grad - global).squaredNorm());
      }
      m_sq += worst;
    }
    result.m = std::max(result.m,
                        std::sqrt(m_sq / static_cast<double>(active.size())));
  }
  return result;
}

}  // namespace dpgossip
