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


#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "errors.hpp"
#include "evaluation.hpp"
#include "experiment.hpp"
#include "report.hpp"
#include "svg.hpp"
#include "xml_check.hpp"

using namespace patchpose;
using namespace patchpose::experiment;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "patchpose_test_report" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

eval::SweepResult flat_sweep(int target, double level) {
  eval::SweepResult r;
  r.spec.n_intervals = 6;
  r.spec.images_per_point = 10;
  r.target_class = target;
  for (int i = 0; i <= 6; ++i) {
    r.phi.push_back(r.spec.point(i));
    r.success.push_back(level);
  }
  return r;
}

data::TargetTiers tiers() {
  data::TargetTiers t;
  t.high = {0, 1};
  t.mid = {2, 3};
  t.low = {4, 5};
  return t;
}

}  // namespace

TEST_CASE("grid area is exact for bilinear surfaces") {
  const std::vector<double> yaw{-180, -60, 60, 180}, roll{-360, 0, 360};
  std::vector<double> s;
  // f = 0.5 + 0.001 y - 0.0002 r + 1e-6 y r integrates to 0.5 over the
  // symmetric rectangle.
  for (double y : yaw)
    for (double r : roll) s.push_back(0.5 + 0.001 * y - 0.0002 * r + 1e-6 * y * r);
  CHECK(std::abs(grid_area(yaw, roll, s) - 0.5) < 1e-12);
  std::fill(s.begin(), s.end(), 0.3);
  CHECK(grid_area(yaw, roll, s) == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("family report from per-class sweeps") {
  const fs::path root = fresh_dir("yaw");
  const Support s0{0, 0, 7, 7}, s20{20, 0, 7, 7};
  // Tier mean of class levels: high 0.8/0.6 at s20, 0.2/0.4 at s0; low 0.1.
  const std::vector<std::tuple<Support, int, double>> runs{
      {s0, 0, 0.2}, {s0, 1, 0.4}, {s20, 0, 0.8}, {s20, 1, 0.6}, {s20, 4, 0.1}, {s20, 5, 0.1}};
  for (const auto& [s, t, v] : runs) eval::write_sweep_csv(result_path(root, Family::kYaw, s, t), flat_sweep(t, v));
  const auto rep = report_family(root, Family::kYaw, tiers());
  REQUIRE(rep.table.columns.size() == 2u);
  CHECK(rep.table.columns[0] == s0);
  CHECK(rep.table.rows == std::vector<std::string>{"high", "low"});
  CHECK(*rep.table.at("high", s0) == doctest::Approx(0.3));
  CHECK(*rep.table.at("high", s20) == doctest::Approx(0.7));
  CHECK(*rep.table.at("low", s20) == doctest::Approx(0.1));
  CHECK_FALSE(rep.table.at("low", s0).has_value());
  CHECK(rep.mast_rows.size() == 6u);

  const std::string md = slurp(root / "yaw" / "table.md");
  CHECK(md.find("| Tier | ±0° | ±20° |") != std::string::npos);
  CHECK(md.find("| High | 0.30 | 0.70 |") != std::string::npos);
  CHECK(md.find("| Low | - | 0.10 |") != std::string::npos);

  const auto rows = eval::read_mast_csv(root / "yaw" / "mast.csv");
  CHECK(rows.size() == 6u);
  for (const fs::path& f : rep.files) {
    if (f.extension() == ".svg") CHECK(testing::is_svg_document(slurp(f)));
    if (f.extension() == ".csv") CHECK_NOTHROW(validate_csv(f));
  }
  // Re-running yields byte-identical artifacts.
  const std::string svg_before = slurp(root / "yaw" / "plots" / "tier_high.svg");
  report_family(root, Family::kYaw, tiers());
  CHECK(slurp(root / "yaw" / "plots" / "tier_high.svg") == svg_before);

  CHECK_THROWS_AS(report_family(fresh_dir("empty"), Family::kRoll, tiers()), IoError);
}

TEST_CASE("grid report writes heatmaps") {
  const fs::path root = fresh_dir("grid");
  eval::GridResult g;
  g.spec.n_intervals = 2;
  g.spec.images_per_point = 4;
  g.yaw = {-180, 0, 180};
  g.roll = {-360, 0, 360};
  g.success = {0, 0, 0, 0, 1, 0, 0, 0, 0};
  for (int t : {0, 1}) {
    g.target_class = t;
    eval::write_grid_csv(result_path(root, Family::kGrid, Support{20, 45, 7, 7}, t), g);
  }
  const auto rep = report_family(root, Family::kGrid, tiers());
  REQUIRE(rep.grids.size() == 1u);
  CHECK(*rep.table.at("high", Support{20, 45, 7, 7}) == doctest::Approx(0.25));
  bool heatmap = false;
  for (const fs::path& f : rep.files) {
    if (f.extension() != ".svg") continue;
    heatmap = true;
    CHECK(testing::is_svg_document(slurp(f)));
  }
  CHECK(heatmap);
}

TEST_CASE("plotting single csv files") {
  const fs::path dir = fresh_dir("plot");
  const fs::path csv = dir / "sweeps" / "y20_r0_z7-7" / "class_3.csv";
  auto r = flat_sweep(3, 0.5);
  r.success[3] = 1.0;
  eval::write_sweep_csv(csv, r);
  const fs::path svg = plot_csv(csv, dir / "plots");
  CHECK(svg.filename() == "y20_r0_z7-7_class_3.svg");
  const std::string text = slurp(svg);
  CHECK(testing::is_svg_document(text));
  CHECK(slurp(plot_csv(csv, dir / "plots")) == text);

  const fs::path empty = dir / "empty.csv";
  std::ofstream(empty) << eval::kSweepHeader << "\n";
  CHECK_THROWS_AS(plot_csv(empty, dir / "plots2"), IoError);
  CHECK_FALSE(fs::exists(dir / "plots2" / "empty.svg"));
  const fs::path mast = dir / "mast.csv";
  eval::write_mast_csv(mast, std::vector<eval::MastRow>{{1, "high", "y0_r0_z7-7", 0.5}});
  CHECK_THROWS_AS(plot_csv(mast, dir / "plots"), IoError);
  const fs::path junk = dir / "junk.csv";
  std::ofstream(junk) << "a,b\n1,2\n";
  CHECK_THROWS_AS(csv_kind(junk), IoError);
}

TEST_CASE("svg rendering") {
  plot::LinePlot p;
  p.title = "a < b & c";
  p.x_lo = -90;
  p.x_hi = 90;
  p.series.push_back({"flat", {-90, 0, 90}, {0.5, 0.5, 0.5}, std::pair{-20.0, 20.0}});
  const std::string svg = plot::render_line_plot(p);
  CHECK(testing::is_svg_document(svg));
  CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
  CHECK(svg == plot::render_line_plot(p));
  plot::Heatmap h;
  h.x = {-1, 0, 1};
  h.y = {-1, 1};
  h.values = {0, 0.5, 1, 1, 0.5, 0};
  h.support = std::pair{0.5, 0.5};
  const std::string hm = plot::render_heatmap(h);
  CHECK(testing::is_svg_document(hm));
  CHECK(hm.find("#ffffff") != std::string::npos);
  CHECK(hm.find("#ff0000") != std::string::npos);
  CHECK(plot::xml_escape("\"<>&") == "&quot;&lt;&gt;&amp;");
}
