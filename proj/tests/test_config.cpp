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


#include <string>

#include <doctest.h>

#include "config.hpp"
#include "errors.hpp"
#include "experiment.hpp"

using namespace patchpose;
using namespace patchpose::experiment;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("presets") {
  const auto desk = preset("desk");
  CHECK(desk.attack.n_batches == 100);
  CHECK(desk.images_per_point == 128);
  CHECK(desk.patch.side == 3.0);
  const auto full = preset("full");
  CHECK(full.attack.n_batches == 200);
  CHECK(full.images_per_point == 320);
  CHECK(full.out_dir == "runs/full");
  CHECK_THROWS_AS(preset("huge"), ConfigError);
  CHECK(desk.yaw.supports.size() == 4u);
  CHECK(desk.yaw.supports[1].yaw_max == 20.0);
  CHECK(desk.roll.supports[3].roll_max == 180.0);
  CHECK(desk.loom.supports[2].z_lo == 5.0);
  CHECK(desk.loom.supports[2].z_hi == 9.0);
  CHECK(family_supports(desk, Family::kGrid).size() == 16u);
}

TEST_CASE("round trip through json text") {
  for (const char* name : {"desk", "full"}) {
    const auto c = preset(name);
    CHECK(parse_config(dump_config(c)) == c);
  }
  auto c = preset("desk");
  c.seed = 7;
  c.targets.high = {1, 2, 3};
  c.loom.supports = {Support{0, 0, 3, 11}};
  c.grid.n_intervals = 4;
  CHECK(parse_config(dump_config(c)) == c);
  CHECK(parse_config("{}") == preset("desk"));
  CHECK(parse_config(R"({"preset": "full"})") == preset("full"));
}

TEST_CASE("diagnostics name the offending field or position") {
  CHECK(error_of(R"({"attack": {"n_batchez": 3}})").find("/attack/n_batchez") != std::string::npos);
  CHECK(error_of(R"({"attack": {"n_batches": "many"}})").find("/attack/n_batches") != std::string::npos);
  CHECK(error_of(R"({"attack": {"step_size": -1}})").find("step_size") != std::string::npos);
  CHECK(error_of(R"({"fov_deg": 200})").find("fov_deg") != std::string::npos);
  CHECK(error_of(R"({"dataset": {"num_classes": 13}})").find("num_classes") != std::string::npos);
  CHECK(error_of(R"({"yaw": {"alpha": 10, "beta": -10}})").find("/yaw") != std::string::npos);
  CHECK(error_of(R"({"schema_version": 99})").find("schema_version") != std::string::npos);
  const std::string syntax = error_of("{\n  \"seed\": 1,\n  \"attack\": {\"n_batches\": }\n}\n");
  CHECK(syntax.find("line 3") != std::string::npos);
  CHECK(syntax.find("column") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("pointer overrides") {
  auto c = preset("desk");
  set_field(c, "/attack/n_batches", "12");
  CHECK(c.attack.n_batches == 12);
  set_field(c, "/out_dir", "somewhere");
  CHECK(c.out_dir == "somewhere");
  set_field(c, "/yaw/supports", "[0, 5]");
  REQUIRE(c.yaw.supports.size() == 2u);
  CHECK(c.yaw.supports[1].yaw_max == 5.0);
  CHECK_THROWS_AS(set_field(c, "/attack/nope", "1"), ConfigError);
  CHECK_THROWS_AS(set_field(c, "/attack/n_batches", "-4"), ConfigError);
}

TEST_CASE("support names") {
  const Support s{20, 0, 7, 7};
  CHECK(s.id() == "y20_r0_z7-7");
  CHECK(Support::from_id(s.id()) == s);
  const Support l{0, 0, 5, 9};
  CHECK(Support::from_id(l.id()) == l);
  CHECK(s.label(Family::kYaw) == "±20°");
  CHECK(l.label(Family::kLoom) == "[5, 9]");
  CHECK(Support{40, 90, 7, 7}.label(Family::kGrid) == "±40° / ±90°");
  CHECK_THROWS(Support::from_id("garbage"));
  CHECK(parse_family("grid") == Family::kGrid);
  CHECK(family_name(Family::kLoom) == "loom");
}

TEST_CASE("derived specifications and plan arithmetic") {
  const auto c = preset("desk");
  const auto k = intrinsics(c);
  CHECK(k.fx == doctest::Approx(55.4256).epsilon(1e-6));
  const auto sw = sweep_spec(c, Family::kRoll, 5);
  CHECK(sw.alpha == -180.0);
  CHECK(sw.beta == 180.0);
  CHECK(sw.n_intervals == 60);
  CHECK(sw.images_per_point == 128);
  CHECK(sw.fixed.side == 3.0);
  const auto d = distribution(c, Support{0, 90, 6, 8});
  CHECK(d.roll_max_deg == 90.0);
  CHECK(d.z_lo == 6.0);

  data::TargetTiers t;
  t.high = {0, 1, 2};
  t.mid = {4, 5, 6};
  t.low = {9, 10, 11};
  const Plan p = make_plan(c, Family::kYaw, t);
  CHECK(p.jobs.size() == 36u);
  CHECK(p.points_per_job == 61u);
  CHECK(p.optimizations == 36u);
  CHECK(p.attack_samples == 36u * 100u * 32u);
  CHECK(p.evaluations == 36u * 61u * 128u);
  const Plan g = make_plan(c, Family::kGrid, t);
  CHECK(g.jobs.size() == 16u * 9u);
  CHECK(g.points_per_job == 441u);

  auto only_high = c;
  only_high.targets.run_tiers = {"high"};
  CHECK(make_plan(only_high, Family::kLoom, t).jobs.size() == 12u);
}

TEST_CASE("seeds are hierarchical and support keyed") {
  auto c = preset("desk");
  CHECK(dataset_seed(c) != model_seed(c));
  CHECK(patch_seed(c, Support{20, 0, 7, 7}, 3) == patch_seed(c, Support{20, 0, 7, 7}, 3));
  CHECK(patch_seed(c, Support{20, 0, 7, 7}, 3) != patch_seed(c, Support{20, 0, 7, 7}, 4));
  CHECK(patch_seed(c, Support{20, 0, 7, 7}, 3) != patch_seed(c, Support{0, 20, 7, 7}, 3));
  const auto before = patch_seed(c, Support{}, 1);
  c.seed += 1;
  CHECK(patch_seed(c, Support{}, 1) != before);
}
