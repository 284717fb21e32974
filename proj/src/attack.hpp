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

#ifndef PATCHPOSE_ATTACK_HPP_
#define PATCHPOSE_ATTACK_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dataset.hpp"
#include "geometry.hpp"
#include "render.hpp"
#include "rng.hpp"
#include "tiny_convnet.hpp"

namespace patchpose::attack {

/// Train-time support: independent uniform yaw, roll and depth ranges.
struct TransformDistribution {
  double yaw_max_deg = 0.0;   // yaw ~ U[-yaw_max, +yaw_max]
  double roll_max_deg = 0.0;  // roll ~ U[-roll_max, +roll_max]
  double z_lo = 7.0;
  double z_hi = 7.0;
  bool randomize_location = true;
  double side = 2.0;

  /// Throws std::invalid_argument when a range is malformed.
  void validate() const;
  bool operator==(const TransformDistribution&) const = default;
};

struct AttackConfig {
  int n_batches = 200;
  int batch_size = 32;
  double step_size = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int texture_size = 64;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const AttackConfig&) const = default;
};

struct Patch {
  render::PatchTexture texture;
  int target = 0;
  TransformDistribution support;
  AttackConfig config;
  std::uint64_t model_seed = 0;
  /// Mean objective (target log-probability) of every optimization batch.
  std::vector<double> objective_history;
};

/// First/second moment state of the ascent step, one slot per texel value.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

/// Moves the patch center to a uniformly drawn lateral offset at which the
/// projected quad lies fully inside the image (rejection sampling, at most
/// 100 draws); falls back to the centered placement.
geometry::PatchPlacement randomize_location(geometry::PatchPlacement placement,
                                            const geometry::CameraIntrinsics& k, Rng& rng);

/// Draws yaw, roll and depth (in that order) and then, when requested, the
/// location.
geometry::PatchPlacement sample_transform(const TransformDistribution& dist,
                                          const geometry::CameraIntrinsics& k, Rng& rng);

/// Objective log p(target | A(q, scene)) and its gradient with respect to
/// the texels. `rendered` is false when the placement is degenerate, in
/// which case the gradient is zero.
struct ObjectiveGradient {
  double value = 0.0;
  render::PatchTexture gradient;
  bool rendered = false;
};
ObjectiveGradient patch_objective_gradient(const model::TinyConvNet& net,
                                           const render::PatchTexture& q,
                                           const geometry::PatchPlacement& placement,
                                           const geometry::CameraIntrinsics& k,
                                           const Image& scene, int target);

struct StepResult {
  double mean_objective = 0.0;
  int rendered = 0;
};

/// One expectation-over-transformations ascent step on `q` over `scenes`.
/// Placements are drawn from `rng` in scene order before any parallel work,
/// and texel gradients are reduced in scene order.
StepResult eot_step(render::PatchTexture& q, int target, const model::TinyConvNet& net,
                    std::span<const Image* const> scenes, const TransformDistribution& dist,
                    const geometry::CameraIntrinsics& k, const AttackConfig& config,
                    AdamState& state, Rng& rng);

/// Uniform gray initialization followed by config.n_batches EoT steps over
/// scenes drawn with replacement from `attack_scenes`.
Patch optimize_patch(const model::TinyConvNet& net, const data::Dataset& attack_scenes, int target,
                     const TransformDistribution& dist, const AttackConfig& config,
                     const geometry::CameraIntrinsics& k);

/// PNG texture plus a JSON sidecar at `png_path` with extension ".json".
void save_patch(const Patch& patch, const std::filesystem::path& png_path);
Patch load_patch(const std::filesystem::path& png_path);
std::filesystem::path sidecar_path(const std::filesystem::path& png_path);

}  // namespace patchpose::attack

#endif  // PATCHPOSE_ATTACK_HPP_
