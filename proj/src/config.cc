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

#include "dpgossip/config.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "boost/property_tree/ini_parser.hpp"
#include "boost/property_tree/ptree.hpp"
#include "dpgossip/status_macros.h"

namespace dpgossip {
namespace {

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Path(const std::string& section, const std::string& key) {
  return absl::StrCat(section, ".", key);
}

// Typed access to one parsed file that remembers which keys were read, so
// leftovers can be reported as unknown.
class SectionReader {
 public:
  explicit SectionReader(const ConfigSections& sections)
      : sections_(sections) {}

  std::optional<std::string> Raw(const std::string& section,
                                 const std::string& key) {
    consumed_.insert(Path(section, key));
    auto s = sections_.find(section);
    if (s == sections_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return std::string(absl::StripAsciiWhitespace(k->second));
  }

  absl::StatusOr<std::optional<double>> Double(const std::string& section,
                                               const std::string& key) {
    std::optional<std::string> raw = Raw(section, key);
    if (!raw) return std::optional<double>();
    double v = 0.0;
    if (!absl::SimpleAtod(*raw, &v) || std::isnan(v)) {
      return absl::InvalidArgumentError(absl::StrCat(
          Path(section, key), ": expected a number, got '", *raw, "'"));
    }
    return std::optional<double>(v);
  }

  absl::StatusOr<std::optional<int64_t>> Int(const std::string& section,
                                             const std::string& key) {
    std::optional<std::string> raw = Raw(section, key);
    if (!raw) return std::optional<int64_t>();
    int64_t v = 0;
    if (!absl::SimpleAtoi(*raw, &v)) {
      return absl::InvalidArgumentError(absl::StrCat(
          Path(section, key), ": expected an integer, got '", *raw, "'"));
    }
    return std::optional<int64_t>(v);
  }

  absl::StatusOr<std::optional<uint64_t>> Uint(const std::string& section,
                                               const std::string& key) {
    std::optional<std::string> raw = Raw(section, key);
    if (!raw) return std::optional<uint64_t>();
    uint64_t v = 0;
    if (!absl::SimpleAtoi(*raw, &v)) {
      return absl::InvalidArgumentError(absl::StrCat(
          Path(section, key), ": expected a non-negative integer, got '",
          *raw, "'"));
    }
    return std::optional<uint64_t>(v);
  }

  absl::StatusOr<std::optional<bool>> Bool(const std::string& section,
                                           const std::string& key) {
    std::optional<std::string> raw = Raw(section, key);
    if (!raw) return std::optional<bool>();
    bool v = false;
    if (!absl::SimpleAtob(*raw, &v)) {
      return absl::InvalidArgumentError(absl::StrCat(
          Path(section, key), ": expected true or false, got '", *raw, "'"));
    }
    return std::optional<bool>(v);
  }

  absl::StatusOr<std::optional<std::vector<double>>> DoubleList(
      const std::string& section, const std::string& key) {
    std::optional<std::string> raw = Raw(section, key);
    if (!raw) return std::optional<std::vector<double>>();
    std::vector<double> out;
    for (absl::string_view piece : absl::StrSplit(*raw, ',')) {
      double v = 0.0;
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(piece), &v) ||
          std::isnan(v)) {
        return absl::InvalidArgumentError(absl::StrCat(
            Path(section, key), ": expected numbers, got '", *raw, "'"));
      }
      out.push_back(v);
    }
    return std::optional<std::vector<double>>(std::move(out));
  }

  absl::Status CheckNoUnknownKeys() const {
    for (const auto& [section, keys] : sections_) {
      for (const auto& [key, value] : keys) {
        if (!consumed_.count(Path(section, key))) {
          return absl::InvalidArgumentError(
              absl::StrCat(Path(section, key), ": unknown key"));
        }
      }
    }
    return absl::OkStatus();
  }

 private:
  const ConfigSections& sections_;
  std::set<std::string> consumed_;
};

template <typename T>
void Assign(T& field, const std::optional<T>& value) {
  if (value) field = *value;
}

absl::Status FieldError(const std::string& path, const std::string& what) {
  return absl::InvalidArgumentError(absl::StrCat(path, ": ", what));
}

const char* AlgorithmName(Algorithm a) {
  return a == Algorithm::kSdlr ? "sdlr" : "adp-vrsgp";
}

const char* TopologyName(TopologySchedule::Kind k) {
  switch (k) {
    case TopologySchedule::Kind::kStaticRing:
      return "static-ring";
    case TopologySchedule::Kind::kExponentialPeriodic:
      return "exponential-periodic";
    case TopologySchedule::Kind::kExplicitList:
      return "explicit-list";
  }
  return "";
}

const char* ModelName(Model::Kind k) {
  switch (k) {
    case Model::Kind::kQuadratic:
      return "quadratic";
    case Model::Kind::kLogistic:
      return "logistic";
    case Model::Kind::kMlp:
      return "mlp";
  }
  return "";
}

ConfigSections ConfigToSections(const ExperimentConfig& c) {
  ConfigSections s;
  auto& ex = s["experiment"];
  ex["algorithm"] = AlgorithmName(c.algorithm);
  ex["n"] = absl::StrCat(c.n);
  ex["T"] = absl::StrCat(c.total);
  ex["seed"] = absl::StrCat(c.seed);

  auto& topo = s["topology"];
  topo["kind"] = TopologyName(c.topology.kind);
  topo["k"] = absl::StrCat(c.topology.k);
  if (!c.topology.path.empty()) topo["path"] = c.topology.path;
  if (c.topology.window) topo["window"] = absl::StrCat(*c.topology.window);
  if (c.topology.kappa) topo["kappa"] = absl::StrCat(*c.topology.kappa);

  auto& noise = s["noise"];
  noise["form"] =
      c.noise.form == NoiseSchedule::Form::kPower ? "power" : "stepwise";
  noise["K"] = FormatDouble(c.noise.k);
  noise["s"] = FormatDouble(c.noise.s);
  noise["a1"] = FormatDouble(c.noise.a1);
  noise["a2"] = FormatDouble(c.noise.a2);
  noise["tau"] = absl::StrCat(c.noise.tau);

  auto& lr = s["lr"];
  if (c.lr.eta) lr["eta"] = FormatDouble(*c.lr.eta);
  if (c.lr.p) lr["p"] = FormatDouble(*c.lr.p);
  lr["xi"] = FormatDouble(c.lr.xi);

  s["clip"]["g0"] = FormatDouble(c.clip.g0);
  s["clip"]["psi"] = FormatDouble(c.clip.psi);
  s["fusion"]["theta"] = FormatDouble(c.fusion.theta);
  s["fusion"]["tau"] = absl::StrCat(c.fusion.tau);

  auto& priv = s["privacy"];
  auto join = [](const std::vector<double>& v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(FormatDouble(x));
    return absl::StrJoin(parts, ",");
  };
  priv["epsilon"] = join(c.privacy.epsilon);
  priv["delta"] = join(c.privacy.delta);
  priv["sampling_ratio"] = FormatDouble(c.privacy.sampling_ratio);
  priv["c1"] = FormatDouble(c.privacy.c1);
  priv["c2"] = FormatDouble(c.privacy.c2);
  if (c.privacy.sigma) priv["sigma"] = FormatDouble(*c.privacy.sigma);

  auto& model = s["model"];
  model["kind"] = ModelName(c.model.kind);
  model["l2"] = FormatDouble(c.model.l2);
  model["hidden"] = absl::StrCat(c.model.hidden);
  model["init_scale"] = FormatDouble(c.model.init_scale);

  auto& data = s["data"];
  data["source"] = c.data.source == DataSource::kCsv ? "csv" : "synthetic";
  if (!c.data.path.empty()) data["path"] = c.data.path;
  data["samples"] = absl::StrCat(c.data.samples);
  data["dim"] = absl::StrCat(c.data.dim);
  data["classes"] = absl::StrCat(c.data.classes);
  data["separation"] = FormatDouble(c.data.separation);
  data["seed"] = absl::StrCat(c.data.seed);
  data["test_fraction"] = FormatDouble(c.data.test_fraction);
  data["partition"] =
      c.data.partition == PartitionMode::kReplicate ? "replicate" : "dirichlet";
  data["alpha_conc"] = FormatDouble(c.data.alpha_conc);

  auto& theory = s["theory"];
  theory["enabled"] = c.theory.enabled ? "true" : "false";
  theory["radius"] = FormatDouble(c.theory.radius);
  theory["probes"] = absl::StrCat(c.theory.probes);
  theory["fstar_iters"] = absl::StrCat(c.theory.fstar_iters);
  return s;
}

bool IsPowerOfTwo(int n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

absl::StatusOr<ExperimentConfig> ParseConfigSections(
    const ConfigSections& sections) {
  SectionReader r(sections);
  ExperimentConfig c;

  if (auto algo = r.Raw("experiment", "algorithm")) {
    if (*algo == "sdlr") {
      c.algorithm = Algorithm::kSdlr;
    } else if (*algo == "adp-vrsgp") {
      c.algorithm = Algorithm::kAdpVrsgp;
    } else {
      return FieldError("experiment.algorithm",
                        absl::StrCat("expected sdlr or adp-vrsgp, got '",
                                     *algo, "'"));
    }
  }
  ASSIGN_OR_RETURN(auto n, r.Int("experiment", "n"));
  if (!n) return FieldError("experiment.n", "required");
  c.n = static_cast<int>(*n);
  ASSIGN_OR_RETURN(auto total, r.Int("experiment", "T"));
  if (!total) return FieldError("experiment.T", "required");
  c.total = *total;
  ASSIGN_OR_RETURN(auto seed, r.Uint("experiment", "seed"));
  Assign(c.seed, seed);

  if (auto kind = r.Raw("topology", "kind")) {
    if (*kind == "static-ring") {
      c.topology.kind = TopologySchedule::Kind::kStaticRing;
    } else if (*kind == "exponential-periodic") {
      c.topology.kind = TopologySchedule::Kind::kExponentialPeriodic;
    } else if (*kind == "explicit-list") {
      c.topology.kind = TopologySchedule::Kind::kExplicitList;
    } else {
      return FieldError("topology.kind",
                        absl::StrCat("unknown topology '", *kind, "'"));
    }
  }
  ASSIGN_OR_RETURN(auto ring_k, r.Int("topology", "k"));
  if (ring_k) c.topology.k = static_cast<int>(*ring_k);
  if (auto path = r.Raw("topology", "path")) c.topology.path = *path;
  ASSIGN_OR_RETURN(auto window, r.Int("topology", "window"));
  if (window) c.topology.window = static_cast<int>(*window);
  ASSIGN_OR_RETURN(auto kappa, r.Int("topology", "kappa"));
  if (kappa) c.topology.kappa = static_cast<int>(*kappa);

  if (auto form = r.Raw("noise", "form")) {
    if (*form == "power") {
      c.noise.form = NoiseSchedule::Form::kPower;
    } else if (*form == "stepwise") {
      c.noise.form = NoiseSchedule::Form::kStepwise;
    } else {
      return FieldError("noise.form",
                        absl::StrCat("expected power or stepwise, got '",
                                     *form, "'"));
    }
  }
  ASSIGN_OR_RETURN(auto noise_k, r.Double("noise", "K"));
  Assign(c.noise.k, noise_k);
  ASSIGN_OR_RETURN(auto noise_s, r.Double("noise", "s"));
  Assign(c.noise.s, noise_s);
  ASSIGN_OR_RETURN(auto a1, r.Double("noise", "a1"));
  Assign(c.noise.a1, a1);
  ASSIGN_OR_RETURN(auto a2, r.Double("noise", "a2"));
  Assign(c.noise.a2, a2);
  ASSIGN_OR_RETURN(auto noise_tau, r.Int("noise", "tau"));
  Assign(c.noise.tau, noise_tau);

  ASSIGN_OR_RETURN(c.lr.eta, r.Double("lr", "eta"));
  ASSIGN_OR_RETURN(c.lr.p, r.Double("lr", "p"));
  ASSIGN_OR_RETURN(auto xi, r.Double("lr", "xi"));
  Assign(c.lr.xi, xi);

  ASSIGN_OR_RETURN(auto g0, r.Double("clip", "g0"));
  Assign(c.clip.g0, g0);
  ASSIGN_OR_RETURN(auto psi, r.Double("clip", "psi"));
  Assign(c.clip.psi, psi);

  ASSIGN_OR_RETURN(auto theta, r.Double("fusion", "theta"));
  Assign(c.fusion.theta, theta);
  ASSIGN_OR_RETURN(auto fusion_tau, r.Int("fusion", "tau"));
  // An omitted fusion interval follows the noise interval.
  c.fusion.tau = fusion_tau ? *fusion_tau : c.noise.tau;

  ASSIGN_OR_RETURN(auto eps, r.DoubleList("privacy", "epsilon"));
  Assign(c.privacy.epsilon, eps);
  ASSIGN_OR_RETURN(auto delta, r.DoubleList("privacy", "delta"));
  Assign(c.privacy.delta, delta);
  ASSIGN_OR_RETURN(auto ratio, r.Double("privacy", "sampling_ratio"));
  Assign(c.privacy.sampling_ratio, ratio);
  ASSIGN_OR_RETURN(auto c1, r.Double("privacy", "c1"));
  Assign(c.privacy.c1, c1);
  ASSIGN_OR_RETURN(auto c2, r.Double("privacy", "c2"));
  Assign(c.privacy.c2, c2);
  ASSIGN_OR_RETURN(c.privacy.sigma, r.Double("privacy", "sigma"));

  if (auto kind = r.Raw("model", "kind")) {
    if (*kind == "quadratic") {
      c.model.kind = Model::Kind::kQuadratic;
    } else if (*kind == "logistic") {
      c.model.kind = Model::Kind::kLogistic;
    } else if (*kind == "mlp") {
      c.model.kind = Model::Kind::kMlp;
    } else {
      return FieldError("model.kind",
                        absl::StrCat("unknown model '", *kind, "'"));
    }
  }
  ASSIGN_OR_RETURN(auto l2, r.Double("model", "l2"));
  Assign(c.model.l2, l2);
  ASSIGN_OR_RETURN(auto hidden, r.Int("model", "hidden"));
  if (hidden) c.model.hidden = static_cast<int>(*hidden);
  ASSIGN_OR_RETURN(auto init_scale, r.Double("model", "init_scale"));
  Assign(c.model.init_scale, init_scale);

  if (auto source = r.Raw("data", "source")) {
    if (*source == "synthetic") {
      c.data.source = DataSource::kSynthetic;
    } else if (*source == "csv") {
      c.data.source = DataSource::kCsv;
    } else {
      return FieldError("data.source",
                        absl::StrCat("expected synthetic or csv, got '",
                                     *source, "'"));
    }
  }
  if (auto path = r.Raw("data", "path")) c.data.path = *path;
  ASSIGN_OR_RETURN(auto samples, r.Int("data", "samples"));
  if (samples) c.data.samples = static_cast<int>(*samples);
  ASSIGN_OR_RETURN(auto dim, r.Int("data", "dim"));
  if (dim) c.data.dim = static_cast<int>(*dim);
  ASSIGN_OR_RETURN(auto classes, r.Int("data", "classes"));
  if (classes) c.data.classes = static_cast<int>(*classes);
  ASSIGN_OR_RETURN(auto separation, r.Double("data", "separation"));
  Assign(c.data.separation, separation);
  ASSIGN_OR_RETURN(auto data_seed, r.Uint("data", "seed"));
  Assign(c.data.seed, data_seed);
  ASSIGN_OR_RETURN(auto test_fraction, r.Double("data", "test_fraction"));
  Assign(c.data.test_fraction, test_fraction);
  if (auto mode = r.Raw("data", "partition")) {
    if (*mode == "dirichlet") {
      c.data.partition = PartitionMode::kDirichlet;
    } else if (*mode == "replicate") {
      c.data.partition = PartitionMode::kReplicate;
    } else {
      return FieldError("data.partition",
                        absl::StrCat("expected dirichlet or replicate, got '",
                                     *mode, "'"));
    }
  }
  ASSIGN_OR_RETURN(auto alpha_conc, r.Double("data", "alpha_conc"));
  Assign(c.data.alpha_conc, alpha_conc);

  ASSIGN_OR_RETURN(auto enabled, r.Bool("theory", "enabled"));
  Assign(c.theory.enabled, enabled);
  ASSIGN_OR_RETURN(auto radius, r.Double("theory", "radius"));
  Assign(c.theory.radius, radius);
  ASSIGN_OR_RETURN(auto probes, r.Int("theory", "probes"));
  if (probes) c.theory.probes = static_cast<int>(*probes);
  ASSIGN_OR_RETURN(auto fstar_iters, r.Int("theory", "fstar_iters"));
  if (fstar_iters) c.theory.fstar_iters = static_cast<int>(*fstar_iters);

  RETURN_IF_ERROR(r.CheckNoUnknownKeys());
  RETURN_IF_ERROR(ValidateConfig(c));
  return c;
}

absl::Status ValidateConfig(const ExperimentConfig& c) {
  if (c.n < 1) return FieldError("experiment.n", "must be >= 1");
  if (c.total < 1) return FieldError("experiment.T", "must be >= 1");

  switch (c.topology.kind) {
    case TopologySchedule::Kind::kStaticRing:
      if (c.topology.k < 0 || c.topology.k >= c.n) {
        return FieldError("topology.k",
                          absl::StrCat("must lie in [0, experiment.n) = [0, ",
                                       c.n, ")"));
      }
      break;
    case TopologySchedule::Kind::kExponentialPeriodic:
      if (!IsPowerOfTwo(c.n)) {
        return FieldError(
            "experiment.n",
            absl::StrCat("exponential-periodic topology needs a power of two "
                         ">= 2, got ",
                         c.n));
      }
      break;
    case TopologySchedule::Kind::kExplicitList:
      if (c.topology.path.empty()) {
        return FieldError("topology.path", "required for explicit-list");
      }
      break;
  }
  if (c.topology.window && *c.topology.window < 1) {
    return FieldError("topology.window", "must be >= 1");
  }
  if (c.topology.kappa && *c.topology.kappa < 1) {
    return FieldError("topology.kappa", "must be >= 1");
  }

  if (c.noise.tau < 1) return FieldError("noise.tau", "must be >= 1");
  if (c.noise.form == NoiseSchedule::Form::kPower) {
    if (!(c.noise.k > 0.0) || !std::isfinite(c.noise.k)) {
      return FieldError("noise.K", "must be positive and finite");
    }
  } else {
    if (!(c.noise.a1 > 0.0) || !std::isfinite(c.noise.a1)) {
      return FieldError("noise.a1", "must be positive and finite");
    }
    if (!(c.noise.a2 > 0.0) || !std::isfinite(c.noise.a2)) {
      return FieldError("noise.a2", "must be positive and finite");
    }
  }
  if (!std::isfinite(c.noise.s)) return FieldError("noise.s", "must be finite");

  if (c.lr.eta.has_value() == c.lr.p.has_value()) {
    return FieldError("lr.eta", "set exactly one of lr.eta and lr.p");
  }
  if (c.lr.eta && !(*c.lr.eta > 0.0 && std::isfinite(*c.lr.eta))) {
    return FieldError("lr.eta", "must be positive and finite");
  }
  if (c.lr.p && !std::isfinite(*c.lr.p)) {
    return FieldError("lr.p", "must be finite");
  }
  if (c.lr.p && !(c.noise.k > 0.0)) {
    return FieldError("noise.K", "lr.p needs a positive noise.K");
  }
  if (!(c.lr.xi > 0.0 && c.lr.xi < 1.0)) {
    return FieldError("lr.xi", "must lie in (0, 1)");
  }

  if (!(c.clip.g0 > 0.0)) return FieldError("clip.g0", "must be > 0");
  if (!(c.clip.psi > 0.0 && c.clip.psi <= 1.0)) {
    return FieldError("clip.psi", "must lie in (0, 1]");
  }
  if (!(c.fusion.theta >= 0.0 && c.fusion.theta < 1.0)) {
    return FieldError("fusion.theta", "must lie in [0, 1)");
  }
  if (c.fusion.tau != c.noise.tau) {
    return absl::InvalidArgumentError(absl::StrCat(
        "fusion.tau (", c.fusion.tau, ") must equal noise.tau (", c.noise.tau,
        ")"));
  }

  const PrivacyConfig& p = c.privacy;
  const size_t nodes = static_cast<size_t>(c.n);
  if (p.epsilon.size() != 1 && p.epsilon.size() != nodes) {
    return FieldError("privacy.epsilon",
                      absl::StrCat("expected 1 or ", c.n, " values, got ",
                                   p.epsilon.size()));
  }
  for (double e : p.epsilon) {
    if (!(e > 0.0) || !std::isfinite(e)) {
      return FieldError("privacy.epsilon", "every value must be > 0");
    }
  }
  if (p.delta.size() != 1 && p.delta.size() != nodes) {
    return FieldError("privacy.delta",
                      absl::StrCat("expected 1 or ", c.n, " values, got ",
                                   p.delta.size()));
  }
  for (double d : p.delta) {
    if (!(d > 0.0 && d < 1.0)) {
      return FieldError("privacy.delta", "every value must lie in (0, 1)");
    }
  }
  if (!(p.sampling_ratio > 0.0 && p.sampling_ratio <= 1.0)) {
    return FieldError("privacy.sampling_ratio", "must lie in (0, 1]");
  }
  if (!(p.c1 > 0.0)) return FieldError("privacy.c1", "must be > 0");
  if (!(p.c2 > 0.0)) return FieldError("privacy.c2", "must be > 0");
  if (p.sigma && !(*p.sigma >= 0.0 && std::isfinite(*p.sigma))) {
    return FieldError("privacy.sigma", "must be finite and >= 0");
  }

  if (!(c.model.l2 >= 0.0)) return FieldError("model.l2", "must be >= 0");
  if (c.model.hidden < 1) return FieldError("model.hidden", "must be >= 1");
  if (!(c.model.init_scale >= 0.0)) {
    return FieldError("model.init_scale", "must be >= 0");
  }
  if (c.model.kind == Model::Kind::kQuadratic &&
      c.data.source != DataSource::kSynthetic) {
    return FieldError("model.kind", "quadratic needs data.source = synthetic");
  }

  const DataConfig& d = c.data;
  if (d.source == DataSource::kCsv && d.path.empty()) {
    return FieldError("data.path", "required for csv data");
  }
  if (d.samples < 1) return FieldError("data.samples", "must be >= 1");
  if (d.dim < 1) return FieldError("data.dim", "must be >= 1");
  if (d.classes < 2) return FieldError("data.classes", "must be >= 2");
  if (!(d.separation >= 0.0)) {
    return FieldError("data.separation", "must be >= 0");
  }
  if (!(d.test_fraction >= 0.0 && d.test_fraction < 1.0)) {
    return FieldError("data.test_fraction", "must lie in [0, 1)");
  }
  if (!(d.alpha_conc > 0.0)) return FieldError("data.alpha_conc", "must be > 0");

  if (!(c.theory.radius > 0.0)) return FieldError("theory.radius", "must be > 0");
  if (c.theory.probes < 0) return FieldError("theory.probes", "must be >= 0");
  if (c.theory.fstar_iters < 0) {
    return FieldError("theory.fstar_iters", "must be >= 0");
  }
  return absl::OkStatus();
}

absl::StatusOr<ExperimentConfig> ParseConfigText(const std::string& ini_text) {
  boost::property_tree::ptree tree;
  std::istringstream in(ini_text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config line ", e.line(), ": ", e.message()));
  }
  ConfigSections sections;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat(section, ": key outside of a section"));
    }
    auto& keys = sections[section];
    for (const auto& [key, value] : body) keys[key] = value.data();
  }
  return ParseConfigSections(sections);
}

absl::StatusOr<ExperimentConfig> LoadConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  ASSIGN_OR_RETURN(ExperimentConfig config, ParseConfigText(buffer.str()));
  // Relative file references resolve against the config's directory.
  const std::filesystem::path base =
      std::filesystem::absolute(path).parent_path();
  for (std::string* ref : {&config.topology.path, &config.data.path}) {
    if (!ref->empty() && std::filesystem::path(*ref).is_relative()) {
      *ref = (base / *ref).lexically_normal().string();
    }
  }
  return config;
}

nlohmann::json ConfigToJson(const ExperimentConfig& config) {
  const ConfigSections sections = ConfigToSections(config);
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [section, keys] : sections) {
    nlohmann::json& obj = out[section];
    obj = nlohmann::json::object();
    for (const auto& [key, raw] : keys) {
      // Numbers stay numbers where JSON can hold them exactly; lists,
      // infinities and names stay strings.
      int64_t i = 0;
      double v = 0.0;
      if (raw.find(',') == std::string::npos && absl::SimpleAtoi(raw, &i) &&
          raw.find_first_of(".eE") == std::string::npos) {
        obj[key] = i;
      } else if (raw.find(',') == std::string::npos &&
                 absl::SimpleAtod(raw, &v) && std::isfinite(v) &&
                 raw.find_first_not_of("0123456789.eE+-") == std::string::npos) {
        obj[key] = v;
      } else if (raw == "true" || raw == "false") {
        obj[key] = raw == "true";
      } else {
        obj[key] = raw;
      }
    }
  }
  return out;
}

absl::StatusOr<ExperimentConfig> ConfigFromJson(const nlohmann::json& json) {
  if (!json.is_object()) {
    return absl::InvalidArgumentError("config echo must be a JSON object");
  }
  ConfigSections sections;
  for (const auto& [section, keys] : json.items()) {
    if (!keys.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat(section, ": expected an object"));
    }
    for (const auto& [key, value] : keys.items()) {
      std::string raw;
      if (value.is_string()) {
        raw = value.get<std::string>();
      } else if (value.is_boolean()) {
        raw = value.get<bool>() ? "true" : "false";
      } else if (value.is_number_unsigned()) {
        raw = absl::StrCat(value.get<uint64_t>());
      } else if (value.is_number_integer()) {
        raw = absl::StrCat(value.get<int64_t>());
      } else if (value.is_number_float()) {
        raw = FormatDouble(value.get<double>());
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat(Path(section, key), ": unsupported JSON value"));
      }
      sections[section][key] = raw;
    }
  }
  return ParseConfigSections(sections);
}

std::string ConfigToIni(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [section, keys] : ConfigToSections(config)) {
    absl::StrAppend(&out, "[", section, "]\n");
    for (const auto& [key, raw] : keys) absl::StrAppend(&out, key, " = ", raw, "\n");
    absl::StrAppend(&out, "\n");
  }
  return out;
}

absl::StatusOr<NoiseSchedule> BuildNoiseSchedule(const ExperimentConfig& c) {
  absl::StatusOr<NoiseSchedule> schedule =
      c.noise.form == NoiseSchedule::Form::kPower
          ? NoiseSchedule::Power(c.noise.k, c.noise.s, c.total, c.noise.tau)
          : NoiseSchedule::Stepwise(c.noise.a1, c.noise.a2, c.noise.tau,
                                    c.noise.s, c.total);
  if (!schedule.ok()) {
    return absl::Status(schedule.status().code(),
                        absl::StrCat("noise: ", schedule.status().message()));
  }
  return schedule;
}

absl::StatusOr<LrSchedule> BuildLrSchedule(const ExperimentConfig& c) {
  if (c.lr.eta) return LrSchedule{*c.lr.eta, c.lr.xi};
  absl::StatusOr<LrSchedule> lr =
      LrSchedule::Scaled(c.noise.k, c.n, c.total, *c.lr.p, c.lr.xi);
  if (!lr.ok()) {
    return absl::Status(lr.status().code(),
                        absl::StrCat("lr: ", lr.status().message()));
  }
  return lr;
}

std::vector<PrivacyBudget> BuildBudgets(const ExperimentConfig& c) {
  std::vector<PrivacyBudget> budgets(c.n);
  for (int i = 0; i < c.n; ++i) {
    PrivacyBudget& b = budgets[i];
    b.epsilon = c.privacy.epsilon.size() == 1 ? c.privacy.epsilon[0]
                                              : c.privacy.epsilon[i];
    b.delta =
        c.privacy.delta.size() == 1 ? c.privacy.delta[0] : c.privacy.delta[i];
    b.sampling_ratio = c.privacy.sampling_ratio;
    b.c1 = c.privacy.c1;
    b.c2 = c.privacy.c2;
    b.sigma = c.privacy.sigma;
  }
  return budgets;
}

}  // namespace dpgossip
