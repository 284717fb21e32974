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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <doctest.h>

#include "attack.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "geometry.hpp"
#include "scenes.hpp"
#include "tiny_convnet.hpp"

using namespace patchpose;
using namespace patchpose::eval;

namespace {

constexpr double kPi = std::numbers::pi;

SweepResult synthetic(int n, double alpha, double beta, double (*f)(double)) {
  SweepResult r;
  r.spec.alpha = alpha;
  r.spec.beta = beta;
  r.spec.n_intervals = n;
  for (int i = 0; i <= n; ++i) {
    r.phi.push_back(r.spec.point(i));
    r.success.push_back(f(r.phi.back()));
  }
  return r;
}

double cos_deg(double d) { return std::cos(d * kPi / 180.0); }

// Composite Simpson on a fine mesh; independent of the trapezoid code.
double simpson_mean(double (*f)(double), double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0 / (b - a);
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "patchpose_test_eval";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

// Zero weights plus a unit bias on `cls`: predicts `cls` everywhere.
model::TinyConvNet constant_net(int classes, int cls) {
  model::TinyConvNet net(classes, 64);
  auto p = net.parameters();
  p[p.size() - classes + cls] = 1.0;
  return net;
}

}  // namespace

TEST_CASE("cosine oracle") {
  const SweepResult r = synthetic(60, -90, 90, cos_deg);
  const double t = normalized_area(r);
  // Closed form of the 60-interval trapezoid sum: cot(pi / 120) / 60.
  CHECK(std::abs(t - 1.0 / (60.0 * std::tan(kPi / 120.0))) < 1e-12);
  const double exact = simpson_mean(cos_deg, -90, 90, 200000);
  CHECK(std::abs(exact - 2.0 / kPi) < 1e-12);
  CHECK(std::abs(t - exact) < 1e-3);
  CHECK(std::abs(t - 0.63655) < 1e-4);
}

TEST_CASE("trapezoid error shrinks quadratically") {
  const double exact = 2.0 / kPi;
  for (int n : {10, 20, 40, 80}) {
    const double e1 = std::abs(normalized_area(synthetic(n, -90, 90, cos_deg)) - exact);
    const double e2 = std::abs(normalized_area(synthetic(2 * n, -90, 90, cos_deg)) - exact);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.02));
  }
}

TEST_CASE("constant curves and class averaging") {
  for (double c : {0.0, 0.25, 0.7, 0.1, 1.0}) {
    SweepResult r = synthetic(37, 2, 12, cos_deg);  // non-dyadic spacing
    std::fill(r.success.begin(), r.success.end(), c);
    CHECK(normalized_area(r) == c);
  }
  std::vector<SweepResult> rs;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int c = 0; c < 5; ++c) {
    SweepResult r = synthetic(20, -180, 180, cos_deg);
    for (double& s : r.success) s = u(rng);
    r.target_class = c;
    rs.push_back(r);
  }
  const double v = mast(rs).value;
  double manual = 0.0;
  for (const auto& r : rs) manual += normalized_area(r);
  CHECK(std::abs(v - manual / 5.0) < 1e-15);
  std::vector<double> areas;
  for (const auto& r : rs) areas.push_back(normalized_area(r));
  std::sort(areas.begin(), areas.end());
  for (int t = 0; t < 10; ++t) {
    std::shuffle(rs.begin(), rs.end(), rng);
    CHECK(mast(rs).value == v);
  }
  rs[2].spec.n_intervals = 21;
  rs[2].phi.push_back(200);
  rs[2].success.push_back(0);
  CHECK_THROWS_AS(mast(rs), std::invalid_argument);
  CHECK_THROWS_AS(mast(std::span<const SweepResult>{}), std::invalid_argument);
  SweepResult one = synthetic(1, 0, 1, cos_deg);
  one.success.pop_back();
  CHECK_THROWS_AS(normalized_area(one), std::invalid_argument);
}

TEST_CASE("mean curve") {
  SweepResult a = synthetic(4, 0, 4, cos_deg), b = a;
  std::fill(a.success.begin(), a.success.end(), 0.2);
  std::fill(b.success.begin(), b.success.end(), 0.6);
  const std::vector<SweepResult> v{a, b};
  for (double s : mean_curve(v).success) CHECK(s == doctest::Approx(0.4));
}

TEST_CASE("success counting") {
  const auto k = geometry::intrinsics_from_fov(60, 64, 64);
  const auto scenes = data::make_dataset(3, data::Split::kEval, 4);
  const auto net = model::TinyConvNet::initialized(12, 64, 9);
  const EvalPool pool(net, scenes, k);
  std::vector<std::size_t> idx(scenes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // Edge-on patch: the base rate of the clean predictions.
  for (int target : {0, 3, 7}) {
    int hits = 0;
    for (const auto& it : scenes.items) hits += model::predict(net, it.image) == target;
    geometry::PatchPlacement edge;
    edge.yaw_deg = 90;
    Rng rng(1);
    const double s = success_rate(Image(8, 8, 0.5), target, pool, idx, edge, false, rng);
    CHECK(s == static_cast<double>(hits) / static_cast<double>(scenes.size()));
  }

  const auto always = constant_net(12, 5);
  const EvalPool cpool(always, scenes, k);
  attack::Patch patch;
  patch.texture = Image(8, 8, 0.3);
  patch.target = 5;
  SweepSpec spec;
  spec.n_intervals = 6;
  spec.images_per_point = 10;
  const auto r = run_sweep(patch, cpool, spec);
  CHECK(r.phi.size() == 7u);
  for (double s : r.success) CHECK(s == 1.0);
  CHECK(cpool.evaluations() == 70u);
  patch.target = 4;
  for (double s : run_sweep(patch, cpool, spec).success) CHECK(s == 0.0);
}

TEST_CASE("grid and sweep share scenes at shared poses") {
  const auto k = geometry::intrinsics_from_fov(60, 64, 64);
  const auto scenes = data::make_dataset(4, data::Split::kEval, 4);
  const auto net = model::TinyConvNet::initialized(12, 64, 9);
  const EvalPool pool(net, scenes, k);
  attack::Patch patch;
  patch.texture = Image(16, 16);
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (double& v : patch.texture.values()) v = u(g);
  patch.target = model::predict(net, scenes.items[0].image);

  SweepSpec s;
  s.n_intervals = 60;
  s.images_per_point = 12;
  s.fixed.side = 3.0;
  s.seed = 42;
  GridSpec gs;
  gs.n_intervals = 20;
  gs.images_per_point = 12;
  gs.side = 3.0;
  gs.seed = 42;
  const auto sweep = run_sweep(patch, pool, s);
  const auto grid = run_grid(patch, pool, gs);
  CHECK(grid.success.size() == 441u);
  CHECK(grid.roll[10] == 0.0);
  int shared = 0;
  for (std::size_t i = 0; i < grid.yaw.size(); ++i) {
    const auto it = std::find(sweep.phi.begin(), sweep.phi.end(), grid.yaw[i]);
    if (it == sweep.phi.end()) continue;
    CHECK(grid.at(i, 10) == sweep.success[it - sweep.phi.begin()]);
    ++shared;
  }
  CHECK(shared == 11);
  CHECK(run_sweep(patch, pool, s).success == sweep.success);

  SweepSpec bad = s;
  bad.alpha = 10;
  bad.beta = 10;
  CHECK_THROWS_AS(run_sweep(patch, pool, bad), std::invalid_argument);
  GridSpec gbad = gs;
  gbad.n_intervals = 0;
  CHECK_THROWS_AS(run_grid(patch, pool, gbad), std::invalid_argument);
}

TEST_CASE("csv round trips") {
  SweepResult r = synthetic(6, -90, 90, cos_deg);
  r.spec.kind = ParamKind::kRoll;
  r.spec.images_per_point = 320;
  r.spec.seed = 123456789012345ull;
  r.target_class = 9;
  r.success[2] = 1.0 / 3.0;
  const auto p = scratch("sweep.csv");
  write_sweep_csv(p, r);
  {
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    CHECK(header == "param_kind,target_class,phi,success_rate,n_images,seed");
  }
  const SweepResult back = read_sweep_csv(p);
  CHECK(back.phi == r.phi);
  CHECK(back.success == r.success);
  CHECK(back.target_class == 9);
  CHECK(back.spec.kind == ParamKind::kRoll);
  CHECK(back.spec.images_per_point == 320);
  CHECK(back.spec.seed == r.spec.seed);

  GridResult gr;
  gr.spec.n_intervals = 1;
  gr.target_class = 2;
  gr.yaw = {-180, 180};
  gr.roll = {-360, 360};
  gr.success = {0.1, 0.2, 0.3, 0.4};
  const auto gp = scratch("grid.csv");
  write_grid_csv(gp, gr);
  const GridResult gback = read_grid_csv(gp);
  CHECK(gback.yaw == gr.yaw);
  CHECK(gback.roll == gr.roll);
  CHECK(gback.success == gr.success);
  CHECK(gback.at(1, 0) == 0.3);

  const std::vector<MastRow> rows{{3, "high", "y20_r0_z7-7", 0.5}, {4, "low", "y0_r0_z7-7", 0.125}};
  const auto mp = scratch("mast.csv");
  write_mast_csv(mp, rows);
  const auto mback = read_mast_csv(mp);
  REQUIRE(mback.size() == 2u);
  CHECK(mback[1].tier == "low");
  CHECK(mback[1].mast == 0.125);
  CHECK(mback[0].train_support == "y20_r0_z7-7");
}

TEST_CASE("csv reader errors name the line") {
  const auto p = scratch("bad.csv");
  const std::string head = "param_kind,target_class,phi,success_rate,n_images,seed\n";
  auto message = [&](const std::string& body) -> std::string {
    write_text(p, body);
    try {
      read_sweep_csv(p);
    } catch (const IoError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(message(head + "yaw,1,0,0.5,10,1\nyaw,1,3,zzz,10,1\n").find("line 3") != std::string::npos);
  CHECK(message(head + "yaw,1,0,1.5,10,1\n").find("line 2") != std::string::npos);
  CHECK(message(head + "yaw,1,0,0.5\n").find("line 2") != std::string::npos);
  CHECK(message("phi,success\n0,1\n").find("header") != std::string::npos);
  CHECK_FALSE(message(head).empty());
  CHECK_FALSE(message("").empty());
  CHECK_THROWS_AS(read_sweep_csv(scratch("does_not_exist.csv")), IoError);
}
