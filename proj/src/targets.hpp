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


#ifndef PATCHPOSE_TARGETS_HPP_
#define PATCHPOSE_TARGETS_HPP_

#include <cstdint>
#include <vector>

#include "attack.hpp"
#include "dataset.hpp"
#include "evaluation.hpp"
#include "tiny_convnet.hpp"

namespace patchpose::data {

struct TargetTiers {
  std::vector<int> high;
  std::vector<int> mid;
  std::vector<int> low;
  /// Quick-attack success at the reference pose, indexed by class id.
  std::vector<double> scores;

  bool operator==(const TargetTiers&) const = default;
};

struct RankOptions {
  int tier_size = 3;
  int n_batches = 25;
  int batch_size = 32;
  int images = 128;
  attack::AttackConfig attack;  // n_batches, batch_size and seed are overridden
  double depth = 7.0;
  double side = 2.0;
  bool randomize_location = true;
  double min_accuracy = 0.5;
  std::uint64_t seed = 0;
};

/// Sorts classes by success of a short fronto-parallel attack and takes the
/// top, middle and bottom `tier_size` ranks. Ties rank the lower class id
/// first. Throws GateError when the net's accuracy on `val` is below
/// `min_accuracy`.
TargetTiers rank_target_classes(const model::TinyConvNet& net, const Dataset& val,
                                const Dataset& attack_scenes, const eval::EvalPool& pool,
                                const RankOptions& options);

/// Index of the first mid-tier rank.
int mid_tier_start(int num_classes, int tier_size);

}  // namespace patchpose::data

#endif  // PATCHPOSE_TARGETS_HPP_
