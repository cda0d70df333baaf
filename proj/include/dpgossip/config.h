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


#ifndef DPGOSSIP_CONFIG_H_
#define DPGOSSIP_CONFIG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "dpgossip/fusion.h"
#include "dpgossip/models.h"
#include "dpgossip/privacy.h"
#include "dpgossip/topology.h"
#include "json.hpp"

namespace dpgossip {

enum class Algorithm { kSdlr, kAdpVrsgp };

struct TopologyConfig {
  TopologySchedule::Kind kind = TopologySchedule::Kind::kStaticRing;
  // Out-neighbours per node of the static ring.
  int k = 1;
  // Edge-list file of the explicit-list kind.
  std::string path;
  // Connectivity window J and diameter bound kappa. When unset the engine
  // uses the schedule period (1 for the ring) and the measured diameter.
  std::optional<int> window;
  std::optional<int> kappa;
  bool operator==(const TopologyConfig&) const = default;
};

struct NoiseConfig {
  NoiseSchedule::Form form = NoiseSchedule::Form::kStepwise;
  double k = 1.0;
  double s = 0.0;
  double a1 = 1.0;
  double a2 = 1.0;
  int64_t tau = 1;
  bool operator==(const NoiseConfig&) const = default;
};

struct LrConfig {
  // Exactly one of eta and p is set. With p, eta = K sqrt(n) / T^p using
  // noise.K.
  std::optional<double> eta;
  std::optional<double> p;
  double xi = 0.5;
  bool operator==(const LrConfig&) const = default;
};

struct PrivacyConfig {
  // One value for every node, or a single value shared by all nodes.
  std::vector<double> epsilon = {1.0};
  std::vector<double> delta = {1e-5};
  double sampling_ratio = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  // Skips calibration and uses this base noise scale on every node.
  std::optional<double> sigma;
  bool operator==(const PrivacyConfig&) const = default;
};

struct ModelConfig {
  Model::Kind kind = Model::Kind::kLogistic;
  double l2 = 0.0;
  int hidden = 8;
  // Entries of x^0 are N(0, init_scale^2), shared by all nodes.
  double init_scale = 0.0;
  bool operator==(const ModelConfig&) const = default;
};

enum class DataSource { kSynthetic, kCsv };
enum class PartitionMode { kDirichlet, kReplicate };

struct DataConfig {
  DataSource source = DataSource::kSynthetic;
  std::string path;
  int samples = 400;
  int dim = 2;
  int classes = 2;
  double separation = 4.0;
  // Seeds data generation, the train/test split and the partition.
  uint64_t seed = 0;
  double test_fraction = 0.0;
  // kReplicate gives every node the whole training set.
  PartitionMode partition = PartitionMode::kDirichlet;
  double alpha_conc = 1.0;
  bool operator==(const DataConfig&) const = default;
};

struct TheoryConfig {
  bool enabled = true;
  // Half-width of the box around x^0 probed for the heterogeneity constants.
  double radius = 1.0;
  int probes = 8;
  // Gradient-descent iterations used to approximate f* for models without a
  // closed-form minimum.
  int fstar_iters = 2000;
  bool operator==(const TheoryConfig&) const = default;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kAdpVrsgp;
  int n = 1;
  int64_t total = 1;
  uint64_t seed = 0;
  TopologyConfig topology;
  NoiseConfig noise;
  LrConfig lr;
  ClipConfig clip;
  FusionConfig fusion;
  PrivacyConfig privacy;
  ModelConfig model;
  DataConfig data;
  TheoryConfig theory;
  bool operator==(const ExperimentConfig&) const = default;
};

// section -> key -> raw value.
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

// Builds and validates a config. Errors name the offending "section.key".
absl::StatusOr<ExperimentConfig> ParseConfigSections(
    const ConfigSections& sections);
absl::StatusOr<ExperimentConfig> ParseConfigText(const std::string& ini_text);
absl::StatusOr<ExperimentConfig> LoadConfigFile(const std::string& path);

// Validation of an already-built config (also run by the parsers).
absl::Status ValidateConfig(const ExperimentConfig& config);

// Lossless echo: every double is written with 17 significant digits.
nlohmann::json ConfigToJson(const ExperimentConfig& config);
absl::StatusOr<ExperimentConfig> ConfigFromJson(const nlohmann::json& json);
std::string ConfigToIni(const ExperimentConfig& config);

absl::StatusOr<NoiseSchedule> BuildNoiseSchedule(const ExperimentConfig& config);
absl::StatusOr<LrSchedule> BuildLrSchedule(const ExperimentConfig& config);
// One budget per node, uncalibrated unless privacy.sigma is set.
std::vector<PrivacyBudget> BuildBudgets(const ExperimentConfig& config);

}  // namespace dpgossip

#endif  // DPGOSSIP_CONFIG_H_
