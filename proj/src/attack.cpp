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

#include "attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "errors.hpp"
#include "parallel.hpp"

namespace patchpose::attack {

using geometry::PatchPlacement;

void TransformDistribution::validate() const {
  if (!(yaw_max_deg >= 0.0) || !(roll_max_deg >= 0.0)) {
    throw std::invalid_argument("rotation ranges must be non-negative");
  }
  if (!(z_lo > 0.0) || !(z_lo <= z_hi)) throw std::invalid_argument("need 0 < z_lo <= z_hi");
  if (!(side > 0.0)) throw std::invalid_argument("patch side must be positive");
}

void AttackConfig::validate() const {
  if (n_batches < 0 || batch_size <= 0) throw std::invalid_argument("invalid batch settings");
  if (!(step_size > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("moment decay rates must lie in [0, 1)");
  }
  if (texture_size <= 0) throw std::invalid_argument("texture size must be positive");
}

PatchPlacement randomize_location(PatchPlacement placement, const geometry::CameraIntrinsics& k,
                                  Rng& rng) {
  constexpr int kMaxTries = 100;
  const double half_x = placement.depth * k.cx / k.fx;
  const double half_y = placement.depth * k.cy / k.fy;
  for (int i = 0; i < kMaxTries; ++i) {
    placement.offset.x() = uniform(rng, -half_x, half_x);
    placement.offset.y() = uniform(rng, -half_y, half_y);
    const auto quad = geometry::project_patch(placement, k);
    if (!quad) continue;
    const bool inside = std::all_of(quad->begin(), quad->end(), [&](const geometry::Vec2& p) {
      return p.x() >= 0.0 && p.x() <= k.width && p.y() >= 0.0 && p.y() <= k.height;
    });
    if (inside) return placement;
  }
  placement.offset = geometry::Vec2::Zero();
  return placement;
}

PatchPlacement sample_transform(const TransformDistribution& dist,
                                const geometry::CameraIntrinsics& k, Rng& rng) {
  PatchPlacement p;
  p.yaw_deg = uniform(rng, -dist.yaw_max_deg, dist.yaw_max_deg);
  p.roll_deg = uniform(rng, -dist.roll_max_deg, dist.roll_max_deg);
  p.depth = uniform(rng, dist.z_lo, dist.z_hi);
  p.side = dist.side;
  if (dist.randomize_location) p = randomize_location(p, k, rng);
  return p;
}

ObjectiveGradient patch_objective_gradient(const model::TinyConvNet& net,
                                           const render::PatchTexture& q,
                                           const PatchPlacement& placement,
                                           const geometry::CameraIntrinsics& k,
                                           const Image& scene, int target) {
  const render::AppliedPatch applied = render::apply_patch(q, placement, k, scene);
  ObjectiveGradient out;
  out.rendered = applied.rendered;
  if (!applied.rendered) {
    out.value = model::target_log_prob(net, applied.image, target);
    out.gradient = render::PatchTexture(q.height(), q.width());
    return out;
  }
  const model::ValueAndGradient vg = model::target_log_prob_and_gradient(net, applied.image, target);
  out.value = vg.value;
  out.gradient = render::backprop_to_texture(applied.record, vg.gradient);
  return out;
}

StepResult eot_step(render::PatchTexture& q, int target, const model::TinyConvNet& net,
                    std::span<const Image* const> scenes, const TransformDistribution& dist,
                    const geometry::CameraIntrinsics& k, const AttackConfig& config,
                    AdamState& state, Rng& rng) {
  if (scenes.empty()) throw std::invalid_argument("eot_step needs at least one scene");
  std::vector<PatchPlacement> placements;
  placements.reserve(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) placements.push_back(sample_transform(dist, k, rng));

  std::vector<ObjectiveGradient> results(scenes.size());
  parallel_for(scenes.size(), [&](std::size_t i) {
    results[i] = patch_objective_gradient(net, q, placements[i], k, *scenes[i], target);
  });

  const std::size_t n = q.size();
  std::vector<double> grad(n, 0.0);
  StepResult step;
  for (const ObjectiveGradient& r : results) {
    step.mean_objective += r.value;
    if (!r.rendered) continue;
    ++step.rendered;
    const auto g = r.gradient.values();
    for (std::size_t j = 0; j < n; ++j) grad[j] += g[j];
  }
  const double inv = 1.0 / static_cast<double>(scenes.size());
  step.mean_objective *= inv;

  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
    state.step = 0;
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  auto texels = q.values();
  for (std::size_t j = 0; j < n; ++j) {
    const double g = grad[j] * inv;
    state.m[j] = config.beta1 * state.m[j] + (1.0 - config.beta1) * g;
    state.v[j] = config.beta2 * state.v[j] + (1.0 - config.beta2) * g * g;
    const double mhat = state.m[j] / c1;
    const double vhat = state.v[j] / c2;
    // Ascent on the objective, then projection back onto valid pixels.
    texels[j] = std::clamp(texels[j] + config.step_size * mhat / (std::sqrt(vhat) + config.epsilon),
                           0.0, 1.0);
  }
  return step;
}

Patch optimize_patch(const model::TinyConvNet& net, const data::Dataset& attack_scenes, int target,
                     const TransformDistribution& dist, const AttackConfig& config,
                     const geometry::CameraIntrinsics& k) {
  if (target < 0 || target >= net.num_classes()) throw std::invalid_argument("target class out of range");
  dist.validate();
  config.validate();
  if (attack_scenes.empty()) throw std::invalid_argument("no attack scenes");

  Patch patch;
  patch.target = target;
  patch.support = dist;
  patch.config = config;
  patch.model_seed = net.seed();
  patch.texture = render::PatchTexture(config.texture_size, config.texture_size, 0.5);

  Rng rng = make_stream({config.seed, name_key("optimize-patch"), static_cast<std::uint64_t>(target)});
  AdamState state;
  std::vector<const Image*> batch(static_cast<std::size_t>(config.batch_size));
  for (int b = 0; b < config.n_batches; ++b) {
    for (auto& scene : batch) scene = &attack_scenes.items[uniform_index(rng, attack_scenes.size())].image;
    const StepResult r = eot_step(patch.texture, target, net, batch, dist, k, config, state, rng);
    patch.objective_history.push_back(r.mean_objective);
  }
  return patch;
}

namespace {

nlohmann::json to_json(const TransformDistribution& d) {
  return {{"yaw_max_deg", d.yaw_max_deg}, {"roll_max_deg", d.roll_max_deg}, {"z_lo", d.z_lo},
          {"z_hi", d.z_hi}, {"randomize_location", d.randomize_location}, {"side", d.side}};
}

nlohmann::json to_json(const AttackConfig& c) {
  return {{"n_batches", c.n_batches}, {"batch_size", c.batch_size}, {"step_size", c.step_size},
          {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon},
          {"texture_size", c.texture_size}, {"seed", c.seed}};
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& png_path) {
  std::filesystem::path p = png_path;
  p.replace_extension(".json");
  return p;
}

void save_patch(const Patch& patch, const std::filesystem::path& png_path) {
  if (png_path.has_parent_path()) std::filesystem::create_directories(png_path.parent_path());
  write_png(patch.texture, png_path);
  const nlohmann::json meta = {
      {"format", "patchpose-patch-v1"},
      {"target_class", patch.target},
      {"texture_height", patch.texture.height()},
      {"texture_width", patch.texture.width()},
      {"seed", patch.config.seed},
      {"model_seed", patch.model_seed},
      {"train_support", to_json(patch.support)},
      {"attack_config", to_json(patch.config)},
      {"objective_history", patch.objective_history},
  };
  std::ofstream out(sidecar_path(png_path));
  if (!out) throw IoError("cannot write " + sidecar_path(png_path).string());
  out << meta.dump(2) << '\n';
}

Patch load_patch(const std::filesystem::path& png_path) {
  std::ifstream in(sidecar_path(png_path));
  if (!in) throw IoError("missing patch sidecar " + sidecar_path(png_path).string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(sidecar_path(png_path).string() + ": " + e.what());
  }
  Patch p;
  p.texture = read_png(png_path);
  p.target = meta.at("target_class").get<int>();
  p.model_seed = meta.value("model_seed", std::uint64_t{0});
  const auto& s = meta.at("train_support");
  p.support.yaw_max_deg = s.at("yaw_max_deg").get<double>();
  p.support.roll_max_deg = s.at("roll_max_deg").get<double>();
  p.support.z_lo = s.at("z_lo").get<double>();
  p.support.z_hi = s.at("z_hi").get<double>();
  p.support.randomize_location = s.at("randomize_location").get<bool>();
  p.support.side = s.at("side").get<double>();
  const auto& c = meta.at("attack_config");
  p.config.n_batches = c.at("n_batches").get<int>();
  p.config.batch_size = c.at("batch_size").get<int>();
  p.config.step_size = c.at("step_size").get<double>();
  p.config.beta1 = c.at("beta1").get<double>();
  p.config.beta2 = c.at("beta2").get<double>();
  p.config.epsilon = c.at("epsilon").get<double>();
  p.config.texture_size = c.at("texture_size").get<int>();
  p.config.seed = c.at("seed").get<std::uint64_t>();
  p.objective_history = meta.value("objective_history", std::vector<double>{});
  if (p.texture.height() != meta.at("texture_height").get<int>() ||
      p.texture.width() != meta.at("texture_width").get<int>()) {
    throw IoError("patch PNG does not match its sidecar dimensions");
  }
  return p;
}

}  // namespace patchpose::attack
