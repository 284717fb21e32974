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


#include <cmath>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "attack.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "image.hpp"
#include "scenes.hpp"
#include "tiny_convnet.hpp"

using namespace patchpose;
using namespace patchpose::attack;
using geometry::PatchPlacement;

namespace {

const geometry::CameraIntrinsics kCam = geometry::intrinsics_from_fov(60, 64, 64);

Image random_image(int n, std::mt19937_64& rng) {
  Image img(n, n);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : img.values()) v = u(rng);
  return img;
}

AttackConfig small_config(int batches) {
  AttackConfig c;
  c.n_batches = batches;
  c.batch_size = 4;
  c.texture_size = 8;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("degenerate distribution always gives the reference placement") {
  TransformDistribution d;
  d.randomize_location = false;
  d.side = 3.0;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const PatchPlacement p = sample_transform(d, kCam, rng);
    CHECK(p.yaw_deg == 0.0);
    CHECK(p.roll_deg == 0.0);
    CHECK(p.depth == 7.0);
    CHECK(p.offset == geometry::Vec2::Zero());
    CHECK(p.side == 3.0);
  }
}

TEST_CASE("yaw draws are uniform on the support") {
  TransformDistribution d;
  d.yaw_max_deg = 20.0;
  d.randomize_location = false;
  Rng rng(2);
  const int n = 100000;
  double sum = 0.0, sq = 0.0, lo = 1e9, hi = -1e9;
  for (int i = 0; i < n; ++i) {
    const double y = sample_transform(d, kCam, rng).yaw_deg;
    sum += y;
    sq += y * y;
    lo = std::min(lo, y);
    hi = std::max(hi, y);
  }
  CHECK(std::abs(sum / n) < 0.5);
  CHECK(lo >= -20.0);
  CHECK(hi <= 20.0);
  CHECK(lo < -19.9);
  CHECK(hi > 19.9);
  // Variance of U[-a, a] is a^2 / 3.
  CHECK(std::abs(sq / n - 400.0 / 3.0) < 2.0);
}

TEST_CASE("randomized locations stay inside the image") {
  TransformDistribution d;
  d.yaw_max_deg = 40;
  d.roll_max_deg = 180;
  d.z_lo = 6;
  d.z_hi = 10;
  d.side = 3.0;
  Rng rng(3);
  int moved = 0;
  for (int i = 0; i < 10000; ++i) {
    const PatchPlacement p = sample_transform(d, kCam, rng);
    const auto q = geometry::project_patch(p, kCam);
    REQUIRE(q);
    for (const auto& v : *q) {
      CHECK(v.x() >= 0.0);
      CHECK(v.y() >= 0.0);
      CHECK(v.x() <= 64.0);
      CHECK(v.y() <= 64.0);
    }
    if (p.offset.norm() > 0.0) ++moved;
  }
  CHECK(moved > 9000);
}

TEST_CASE("distribution and config validation") {
  TransformDistribution d;
  d.yaw_max_deg = -1;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d = TransformDistribution{};
  d.z_lo = 8;
  d.z_hi = 6;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  AttackConfig c;
  c.step_size = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = AttackConfig{};
  c.n_batches = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("objective gradient matches finite differences end to end") {
  const auto net = model::TinyConvNet::initialized(12, 64, 5);
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> tex(0, 7), chan(0, 2);
  double worst = 0.0;
  int probes = 0;
  for (int t = 0; t < 3; ++t) {
    const Image scene = random_image(64, rng);
    const Image q = random_image(8, rng);
    PatchPlacement p;
    p.yaw_deg = 25.0 * t - 20.0;
    p.roll_deg = 40.0 * t;
    p.side = 3.0;
    const auto og = patch_objective_gradient(net, q, p, kCam, scene, 3);
    REQUIRE(og.rendered);
    CHECK(og.value == doctest::Approx(model::target_log_prob(
                                          net, render::apply_patch(q, p, kCam, scene).image, 3))
                          .epsilon(1e-12));
    for (int n = 0; n < 5; ++n) {
      const int i = tex(rng), j = tex(rng), c = chan(rng);
      const double h = 1e-5;
      Image qp = q, qm = q;
      qp.at(i, j, c) += h;
      qm.at(i, j, c) -= h;
      const double fd = (patch_objective_gradient(net, qp, p, kCam, scene, 3).value -
                         patch_objective_gradient(net, qm, p, kCam, scene, 3).value) /
                        (2 * h);
      const double an = og.gradient.at(i, j, c);
      worst = std::max(worst, std::abs(an - fd) / std::max({1e-7, std::abs(an), std::abs(fd)}));
      ++probes;
    }
  }
  CHECK(probes >= 10);
  CHECK(worst < 1e-3);
}

TEST_CASE("unrenderable placements leave the texture untouched") {
  const auto net = model::TinyConvNet::initialized(12, 64, 5);
  const auto scenes = data::make_dataset(1, data::Split::kAttack, 2);
  PatchPlacement edge;
  edge.yaw_deg = 90;
  Image q(8, 8, 0.5);
  const auto og = patch_objective_gradient(net, q, edge, kCam, scenes.items[0].image, 1);
  CHECK_FALSE(og.rendered);
  for (double v : og.gradient.values()) CHECK(v == 0.0);

  // A patch far below the minimum footprint never renders, so Adam sees
  // only zero gradients.
  std::vector<const Image*> batch;
  for (const auto& it : scenes.items) batch.push_back(&it.image);
  TransformDistribution tiny;
  tiny.side = 0.05;
  tiny.randomize_location = false;
  AdamState st;
  Rng rng(1);
  const auto r = eot_step(q, 1, net, batch, tiny, kCam, small_config(1), st, rng);
  CHECK(r.rendered == 0);
  for (double v : q.values()) CHECK(v == 0.5);
}

TEST_CASE("ascent steps clamp to the unit interval") {
  const auto net = model::TinyConvNet::initialized(12, 64, 5);
  const auto scenes = data::make_dataset(1, data::Split::kAttack, 2);
  std::vector<const Image*> batch;
  for (const auto& it : scenes.items) batch.push_back(&it.image);
  TransformDistribution d;
  d.side = 3.0;
  AttackConfig c = small_config(1);
  c.step_size = 5.0;
  Image q(8, 8, 0.5);
  AdamState st;
  Rng rng(4);
  for (int i = 0; i < 3; ++i) {
    const auto r = eot_step(q, 0, net, batch, d, kCam, c, st, rng);
    CHECK(r.rendered == static_cast<int>(batch.size()));
  }
  bool at_bound = false;
  for (double v : q.values()) {
    CHECK((v >= 0.0 && v <= 1.0));
    at_bound = at_bound || v == 0.0 || v == 1.0;
  }
  CHECK(at_bound);
}

TEST_CASE("optimization is deterministic and improves the objective") {
  const auto net = model::TinyConvNet::initialized(12, 64, 5);
  const auto scenes = data::make_dataset(2, data::Split::kAttack, 2);
  TransformDistribution d;
  d.yaw_max_deg = 20;
  d.side = 3.0;
  const AttackConfig c = small_config(30);
  const Patch a = optimize_patch(net, scenes, 7, d, c, kCam);
  const Patch b = optimize_patch(net, scenes, 7, d, c, kCam);
  CHECK(a.texture == b.texture);
  CHECK(a.objective_history == b.objective_history);
  REQUIRE(a.objective_history.size() == 30u);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 5; ++i) {
    first += a.objective_history[i];
    last += a.objective_history[25 + i];
  }
  CHECK(last > first);

  const Patch none = optimize_patch(net, scenes, 7, d, small_config(0), kCam);
  for (double v : none.texture.values()) CHECK(v == 0.5);
  CHECK(none.objective_history.empty());
  CHECK_THROWS_AS(optimize_patch(net, scenes, 12, d, c, kCam), std::invalid_argument);
}

TEST_CASE("patch files round trip") {
  const auto net = model::TinyConvNet::initialized(12, 64, 5);
  const auto scenes = data::make_dataset(1, data::Split::kAttack, 2);
  TransformDistribution d;
  d.roll_max_deg = 45;
  Patch p = optimize_patch(net, scenes, 4, d, small_config(3), kCam);
  p.model_seed = 77;
  const auto path = std::filesystem::temp_directory_path() / "patchpose_test_attack" / "p.png";
  save_patch(p, path);
  CHECK(std::filesystem::exists(sidecar_path(path)));
  const Patch back = load_patch(path);
  CHECK(back.texture == quantize_8bit(p.texture));
  CHECK(back.target == 4);
  CHECK(back.support == p.support);
  CHECK(back.config == p.config);
  CHECK(back.model_seed == 77u);
  std::filesystem::remove(sidecar_path(path));
  CHECK_THROWS_AS(load_patch(path), IoError);
}
