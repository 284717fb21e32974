// Copyright 2026 The patchpose Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef PATCHPOSE_CONFIG_HPP_
#define PATCHPOSE_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "attack.hpp"
#include "evaluation.hpp"

namespace patchpose::experiment {

inline constexpr int kSchemaVersion = 1;

enum class Family { kYaw, kRoll, kLoom, kGrid };

std::string_view family_name(Family f);
/// Throws ConfigError for unknown names.
Family parse_family(std::string_view name);

/// One training support: yaw in [-yaw_max, yaw_max], roll in
/// [-roll_max, roll_max], depth in [z_lo, z_hi].
struct Support {
  double yaw_max = 0.0;
  double roll_max = 0.0;
  double z_lo = 7.0;
  double z_hi = 7.0;

  /// Filesystem-safe canonical name, e.g. "y20_r0_z7-7".
  std::string id() const;
  /// Column header in the style of the result tables for `family`.
  std::string label(Family family) const;
  static Support from_id(std::string_view id);

  bool operator==(const Support&) const = default;
};

struct DatasetSection {
  int num_classes = 12;
  int image_size = 64;
  int train_per_class = 100;
  int val_per_class = 25;
  int attack_per_class = 40;
  int eval_per_class = 40;
  bool operator==(const DatasetSection&) const = default;
};

struct ModelSection {
  int epochs = 20;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 32;
  double min_val_accuracy = 0.9;
  bool operator==(const ModelSection&) const = default;
};

struct PatchSection {
  int texture_size = 64;
  double side = 3.0;
  double reference_depth = 7.0;
  bool randomize_location = true;
  bool operator==(const PatchSection&) const = default;
};

struct AttackSection {
  int n_batches = 100;
  int batch_size = 32;
  double step_size = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool operator==(const AttackSection&) const = default;
};

struct TargetsSection {
  int tier_size = 3;
  int rank_batches = 25;
  int rank_batch_size = 32;
  int rank_images = 128;
  double min_rank_accuracy = 0.5;
  /// Tiers included in experiments, any of "high", "mid", "low".
  std::vector<std::string> run_tiers{"high", "mid", "low"};
  /// Explicit tiers; when all empty the tiers come from ranking.
  std::vector<int> high;
  std::vector<int> mid;
  std::vector<int> low;
  bool operator==(const TargetsSection&) const = default;
};

struct SweepSection {
  std::vector<Support> supports;
  double alpha = -90.0;
  double beta = 90.0;
  int n_intervals = 60;
  bool operator==(const SweepSection&) const = default;
};

struct GridSection {
  std::vector<double> yaw_supports{0.0, 20.0, 40.0, 60.0};
  std::vector<double> roll_supports{0.0, 45.0, 90.0, 180.0};
  double yaw_lo = -180.0;
  double yaw_hi = 180.0;
  double roll_lo = -360.0;
  double roll_hi = 360.0;
  int n_intervals = 20;
  bool operator==(const GridSection&) const = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string preset = "desk";
  std::uint64_t seed = 2021;
  std::string out_dir = "runs/desk";
  double fov_deg = 60.0;
  DatasetSection dataset;
  ModelSection model;
  PatchSection patch;
  AttackSection attack;
  TargetsSection targets;
  int images_per_point = 128;
  SweepSection yaw;
  SweepSection roll;
  SweepSection loom;
  GridSection grid;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// "desk" (100x32 batches, 128 images per point) or "full" (200x32, 320).
ExperimentConfig preset(std::string_view name);

nlohmann::ordered_json to_json(const ExperimentConfig& config);
/// Missing fields keep the preset named by "preset" (default "desk");
/// unknown fields, wrong types and invalid values throw ConfigError.
ExperimentConfig from_json(const nlohmann::json& j);
/// Parse errors report line and column.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ExperimentConfig& config);

/// Sets one field from a JSON pointer ("/attack/n_batches") and a JSON
/// value; re-validates.
void set_field(ExperimentConfig& config, std::string_view pointer, std::string_view value);

/// Supports of a family in table-column order.
std::vector<Support> family_supports(const ExperimentConfig& config, Family family);

attack::AttackConfig attack_config(const ExperimentConfig& config, std::uint64_t seed);
attack::TransformDistribution distribution(const ExperimentConfig& config, const Support& s);
geometry::CameraIntrinsics intrinsics(const ExperimentConfig& config);
eval::SweepSpec sweep_spec(const ExperimentConfig& config, Family family, std::uint64_t seed);
eval::GridSpec grid_spec(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace patchpose::experiment

#endif  // PATCHPOSE_CONFIG_HPP_
