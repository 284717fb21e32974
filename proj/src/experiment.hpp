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


#ifndef PATCHPOSE_EXPERIMENT_HPP_
#define PATCHPOSE_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attack.hpp"
#include "config.hpp"
#include "dataset.hpp"
#include "evaluation.hpp"
#include "targets.hpp"
#include "tiny_convnet.hpp"

namespace patchpose::experiment {

using Progress = std::function<void(const std::string&)>;

// Hierarchical seeds: master -> stage -> job.
std::uint64_t dataset_seed(const ExperimentConfig& c);
std::uint64_t model_seed(const ExperimentConfig& c);
std::uint64_t rank_seed(const ExperimentConfig& c);
std::uint64_t eval_seed(const ExperimentConfig& c);
/// Depends only on the support and target, so equal supports in different
/// families give the same patch.
std::uint64_t patch_seed(const ExperimentConfig& c, const Support& s, int target);

data::Dataset make_split(const ExperimentConfig& c, data::Split split);

struct TrainedModel {
  model::TinyConvNet net;
  model::TrainReport report;
};
TrainedModel train_model(const ExperimentConfig& c, const Progress& progress = {});
nlohmann::ordered_json metrics_json(const ExperimentConfig& c, const TrainedModel& m);

/// Attack and evaluation scenes plus the clean-prediction cache.
class Workbench {
 public:
  Workbench(const ExperimentConfig& c, const model::TinyConvNet& net);
  const ExperimentConfig& config() const { return config_; }
  const model::TinyConvNet& net() const { return net_; }
  const data::Dataset& attack_scenes() const { return attack_; }
  const eval::EvalPool& pool() const { return pool_; }
  const geometry::CameraIntrinsics& intrinsics() const { return k_; }

 private:
  ExperimentConfig config_;
  const model::TinyConvNet& net_;
  geometry::CameraIntrinsics k_;
  data::Dataset attack_;
  data::Dataset eval_;
  eval::EvalPool pool_;
};

data::TargetTiers rank_targets(const Workbench& wb);
nlohmann::ordered_json tiers_json(const data::TargetTiers& t);
data::TargetTiers tiers_from_json(const nlohmann::json& j);
void save_tiers(const std::filesystem::path& path, const data::TargetTiers& t);
data::TargetTiers load_tiers(const std::filesystem::path& path);
/// Tier name of a class ("high", "mid", "low"), or "none".
std::string tier_of(const data::TargetTiers& t, int target);

/// Explicit tiers from the config, else <out>/tiers.json, else ranking
/// (saved to <out>/tiers.json).
data::TargetTiers resolve_tiers(const Workbench& wb, const std::filesystem::path& out_root,
                                const Progress& progress = {});

/// Patch optimized at a training support; its texture is 8-bit quantized so
/// that it equals what save_patch / load_patch round-trips.
attack::Patch train_patch(const Workbench& wb, int target, const Support& support);

struct Job {
  Support support;
  int target = 0;
  std::string tier;
};

struct Plan {
  Family family = Family::kYaw;
  std::vector<Support> supports;
  std::vector<int> targets;
  std::vector<Job> jobs;
  std::size_t points_per_job = 0;
  std::size_t images_per_point = 0;
  std::size_t optimizations = 0;
  /// Scene samples rendered during patch optimization.
  std::size_t attack_samples = 0;
  /// Classifier evaluations of patched scenes.
  std::size_t evaluations = 0;

  nlohmann::ordered_json to_json() const;
};

Plan make_plan(const ExperimentConfig& c, Family family, const data::TargetTiers& tiers);

struct RunSummary {
  Plan plan;
  std::size_t optimizations = 0;
  std::size_t evaluations = 0;
  std::vector<std::filesystem::path> files;
};

/// Runs every job of the plan under <out_root>/<family>/ and then the report.
RunSummary run_family(const Workbench& wb, const Plan& plan, const std::filesystem::path& out_root,
                      const Progress& progress = {});

std::filesystem::path family_dir(const std::filesystem::path& out_root, Family f);
std::filesystem::path patch_path(const std::filesystem::path& out_root, Family f,
                                 const Support& s, int target);
std::filesystem::path result_path(const std::filesystem::path& out_root, Family f,
                                  const Support& s, int target);

}  // namespace patchpose::experiment

#endif  // PATCHPOSE_EXPERIMENT_HPP_
