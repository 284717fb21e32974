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

#ifndef PATCHPOSE_EVALUATION_HPP_
#define PATCHPOSE_EVALUATION_HPP_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attack.hpp"
#include "dataset.hpp"
#include "geometry.hpp"
#include "tiny_convnet.hpp"

namespace patchpose::eval {

enum class ParamKind { kYaw, kRoll, kLoom };

std::string_view param_name(ParamKind kind);
/// Throws std::invalid_argument for unknown names.
ParamKind parse_param(std::string_view name);

/// One-dimensional pose sweep over [alpha, beta] sampled at the n+1
/// interval endpoints. `fixed` supplies the non-swept pose parameters.
struct SweepSpec {
  ParamKind kind = ParamKind::kYaw;
  double alpha = -90.0;
  double beta = 90.0;
  int n_intervals = 60;
  int images_per_point = 320;
  geometry::PatchPlacement fixed;
  bool randomize_location = true;
  std::uint64_t seed = 0;

  void validate() const;
  double point(int i) const { return alpha + (beta - alpha) * i / n_intervals; }
  geometry::PatchPlacement placement_at(double phi) const;
  bool operator==(const SweepSpec&) const = default;
};

struct SweepResult {
  SweepSpec spec;
  int target_class = 0;
  std::vector<double> phi;
  std::vector<double> success;
};

/// Yaw x roll lattice of (n+1)^2 endpoints. success[i * (n+1) + j] is the
/// rate at (yaw[i], roll[j]): yaw indexes rows, roll indexes columns.
struct GridSpec {
  double yaw_lo = -180.0;
  double yaw_hi = 180.0;
  double roll_lo = -360.0;
  double roll_hi = 360.0;
  int n_intervals = 20;
  int images_per_point = 320;
  double depth = 7.0;
  double side = 2.0;
  bool randomize_location = true;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

struct GridResult {
  GridSpec spec;
  int target_class = 0;
  std::vector<double> yaw;
  std::vector<double> roll;
  std::vector<double> success;

  double at(std::size_t i, std::size_t j) const { return success[i * roll.size() + j]; }
};

/// Scenes drawn from the evaluation split with their clean predictions
/// cached; a patch that cannot be rendered leaves the scene untouched, so
/// its prediction is looked up instead of recomputed.
class EvalPool {
 public:
  EvalPool(const model::TinyConvNet& net, const data::Dataset& scenes,
           const geometry::CameraIntrinsics& k);

  const model::TinyConvNet& net() const { return net_; }
  const data::Dataset& scenes() const { return scenes_; }
  const geometry::CameraIntrinsics& intrinsics() const { return k_; }
  int clean_prediction(std::size_t scene) const;

  /// Number of (scene, pose) classifications requested so far.
  std::size_t evaluations() const { return evaluations_.load(); }
  void count(std::size_t n) const { evaluations_ += n; }

 private:
  const model::TinyConvNet& net_;
  const data::Dataset& scenes_;
  geometry::CameraIntrinsics k_;
  mutable std::vector<std::atomic<int>> clean_;
  mutable std::atomic<std::size_t> evaluations_{0};
};

/// Fraction of the given scenes classified as `target` after inserting the
/// patch at `placement`. With randomize_location the lateral offset is
/// redrawn per scene from `rng`.
double success_rate(const render::PatchTexture& texture, int target, const EvalPool& pool,
                    std::span<const std::size_t> scene_indices,
                    const geometry::PatchPlacement& placement, bool randomize_location, Rng& rng);

/// Scenes and location draws for a pose come from a stream keyed by the
/// seed and the pose itself, so every harness that evaluates the same pose
/// with the same seed sees the same scenes.
double success_at_pose(const render::PatchTexture& texture, int target, const EvalPool& pool,
                       const geometry::PatchPlacement& placement, int images,
                       bool randomize_location, std::uint64_t seed);

SweepResult run_sweep(const attack::Patch& patch, const EvalPool& pool, const SweepSpec& spec);
GridResult run_grid(const attack::Patch& patch, const EvalPool& pool, const GridSpec& spec);

/// Trapezoidal (1/(beta-alpha)) * integral of the success curve.
double normalized_area(const SweepResult& result);

struct MastReport {
  SweepSpec spec;
  std::vector<int> classes;
  std::vector<double> per_class;
  double value = 0.0;
};

/// Class-averaged normalized area. Throws std::invalid_argument when the
/// results do not share one sweep specification (seed aside) or are empty.
MastReport mast(std::span<const SweepResult> results);

/// Mean of the success curves of several patches sharing one spec.
SweepResult mean_curve(std::span<const SweepResult> results);

// CSV interchange ------------------------------------------------------------

inline constexpr std::string_view kSweepHeader =
    "param_kind,target_class,phi,success_rate,n_images,seed";
inline constexpr std::string_view kGridHeader = "yaw,roll,target_class,success_rate,n_images,seed";
inline constexpr std::string_view kMastHeader = "target_class,tier,train_support,mast";

struct MastRow {
  int target_class = 0;
  std::string tier;
  std::string train_support;
  double mast = 0.0;
};

/// Shortest text that parses back to the same double.
std::string format_double(double v);

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result);
void write_grid_csv(const std::filesystem::path& path, const GridResult& result);
void write_mast_csv(const std::filesystem::path& path, std::span<const MastRow> rows);

/// Parsers throw IoError naming the offending line.
SweepResult read_sweep_csv(const std::filesystem::path& path);
GridResult read_grid_csv(const std::filesystem::path& path);
std::vector<MastRow> read_mast_csv(const std::filesystem::path& path);

}  // namespace patchpose::eval

#endif  // PATCHPOSE_EVALUATION_HPP_
