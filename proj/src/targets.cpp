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


#include "targets.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

namespace patchpose::data {

int mid_tier_start(int num_classes, int tier_size) { return (num_classes - tier_size) / 2; }

TargetTiers rank_target_classes(const model::TinyConvNet& net, const Dataset& val,
                                const Dataset& attack_scenes, const eval::EvalPool& pool,
                                const RankOptions& options) {
  const int k = net.num_classes();
  if (options.tier_size <= 0 || 3 * options.tier_size > k) {
    throw std::invalid_argument("tier size must satisfy 0 < 3 * size <= num_classes");
  }
  const double acc = model::accuracy(net, val);
  if (acc < options.min_accuracy) {
    throw GateError("classifier accuracy " + std::to_string(acc) + " is below " +
                    std::to_string(options.min_accuracy) + "; train the model before ranking");
  }

  attack::TransformDistribution dist;
  dist.z_lo = dist.z_hi = options.depth;
  dist.side = options.side;
  dist.randomize_location = options.randomize_location;

  attack::AttackConfig cfg = options.attack;
  cfg.n_batches = options.n_batches;
  cfg.batch_size = options.batch_size;
  cfg.seed = derive_seed(options.seed, "rank-attack");

  geometry::PatchPlacement reference;
  reference.depth = options.depth;
  reference.side = options.side;
  const std::uint64_t eval_seed = derive_seed(options.seed, "rank-eval");

  TargetTiers tiers;
  tiers.scores.resize(k);
  for (int c = 0; c < k; ++c) {
    const attack::Patch patch =
        attack::optimize_patch(net, attack_scenes, c, dist, cfg, pool.intrinsics());
    tiers.scores[c] = eval::success_at_pose(patch.texture, c, pool, reference, options.images,
                                            options.randomize_location, eval_seed);
  }

  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return tiers.scores[a] > tiers.scores[b]; });
  const int t = options.tier_size;
  const int mid = mid_tier_start(k, t);
  tiers.high.assign(order.begin(), order.begin() + t);
  tiers.mid.assign(order.begin() + mid, order.begin() + mid + t);
  tiers.low.assign(order.end() - t, order.end());
  return tiers;
}

}  // namespace patchpose::data
