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


#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>

#include "patchpose/patchpose.h"

namespace fs = std::filesystem;

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  pp_string_free(s);
  return out;
}

void set(pp_config* c, const char* ptr, const char* value) {
  INFO(std::string(ptr));
  const pp_status st = pp_config_set(c, ptr, value);
  INFO(std::string(pp_last_error()));
  REQUIRE(st == PP_OK);
}

pp_config* tiny_config(const fs::path& out) {
  pp_config* c = nullptr;
  REQUIRE(pp_config_new("desk", &c) == PP_OK);
  set(c, "/targets/tier_size", "1");
  set(c, "/dataset/num_classes", "6");
  set(c, "/dataset/train_per_class", "4");
  set(c, "/dataset/val_per_class", "2");
  set(c, "/dataset/attack_per_class", "2");
  set(c, "/dataset/eval_per_class", "2");
  set(c, "/model/epochs", "1");
  set(c, "/model/batch_size", "8");
  set(c, "/attack/n_batches", "2");
  set(c, "/attack/batch_size", "2");
  set(c, "/patch/texture_size", "8");
  set(c, "/images_per_point", "3");
  set(c, "/yaw/n_intervals", "4");
  set(c, "/grid/n_intervals", "2");
  set(c, "/targets/rank_batches", "1");
  set(c, "/targets/rank_batch_size", "2");
  set(c, "/targets/rank_images", "3");
  set(c, "/targets/min_rank_accuracy", "0");
  REQUIRE(pp_config_set_out_dir(c, out.c_str()) == PP_OK);
  return c;
}

}  // namespace

TEST_CASE("argument and configuration errors") {
  CHECK(std::string(pp_version()).size() > 0);
  pp_config* c = nullptr;
  REQUIRE(pp_config_new(nullptr, &c) == PP_OK);
  pp_config_free(c);
  c = nullptr;
  CHECK(pp_config_new("desk", nullptr) == PP_ERR_INVALID_ARGUMENT);
  CHECK(pp_config_new("nope", &c) == PP_ERR_CONFIG);
  CHECK(c == nullptr);
  CHECK(std::string(pp_last_error()).find("nope") != std::string::npos);
  CHECK(pp_config_parse("{\"attack\": {\"bogus\": 1}}", &c) == PP_ERR_CONFIG);
  CHECK(std::string(pp_last_error()).find("/attack/bogus") != std::string::npos);
  CHECK(pp_config_parse("{\n\"seed\": }", &c) == PP_ERR_CONFIG);
  CHECK(std::string(pp_last_error()).find("line 2") != std::string::npos);
  CHECK(pp_config_load("/nonexistent.json", &c) == PP_ERR_CONFIG);

  REQUIRE(pp_config_parse("{\"seed\": 5}", &c) == PP_OK);
  double v = 0;
  REQUIRE(pp_config_get_number(c, "/seed", &v) == PP_OK);
  CHECK(v == 5.0);
  CHECK(pp_config_get_number(c, "/preset", &v) == PP_ERR_CONFIG);
  CHECK(pp_config_set(c, "/attack/n_batches", "-1") == PP_ERR_CONFIG);
  REQUIRE(pp_config_set_seed(c, 11) == PP_OK);
  const std::string json = [&] {
    char* s = nullptr;
    REQUIRE(pp_config_to_json(c, &s) == PP_OK);
    return take(s);
  }();
  CHECK(json.find("\"seed\": 11") != std::string::npos);
  pp_config* back = nullptr;
  REQUIRE(pp_config_parse(json.c_str(), &back) == PP_OK);
  char* s2 = nullptr;
  REQUIRE(pp_config_to_json(back, &s2) == PP_OK);
  CHECK(take(s2) == json);
  pp_config_free(back);
  pp_config_free(c);
  pp_config_free(nullptr);

  pp_model* m = nullptr;
  CHECK(pp_model_load("/nonexistent.ppnet", &m) == PP_ERR_IO);
  pp_support sup{0, 0, 7, 7};
  char* id = nullptr;
  REQUIRE(pp_support_id(&sup, &id) == PP_OK);
  CHECK(take(id) == "y0_r0_z7-7");
  sup.z_lo = 9;
  CHECK(pp_support_id(&sup, &id) == PP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("tiny pipeline through the C interface") {
  const fs::path out = fs::temp_directory_path() / "patchpose_test_capi";
  fs::remove_all(out);
  pp_set_jobs(1);
  pp_config* c = tiny_config(out);

  pp_model* m = nullptr;
  double acc = -1;
  char* metrics = nullptr;
  REQUIRE(pp_model_train(c, &m, &acc, &metrics) == PP_OK);
  CHECK((acc >= 0.0 && acc <= 1.0));
  CHECK(take(metrics).find("val_accuracy") != std::string::npos);
  int k = 0;
  REQUIRE(pp_model_num_classes(m, &k) == PP_OK);
  CHECK(k == 6);
  const std::vector<double> img(64 * 64 * 3, 0.5);
  int cls = -1;
  REQUIRE(pp_model_predict(m, img.data(), 64, 64, &cls) == PP_OK);
  CHECK((cls >= 0 && cls < 6));
  CHECK(pp_model_predict(m, img.data(), 32, 32, &cls) == PP_ERR_INVALID_ARGUMENT);
  const std::string model_path = (out / "model.ppnet").string();
  REQUIRE(pp_model_save(m, model_path.c_str()) == PP_OK);
  pp_model* m2 = nullptr;
  REQUIRE(pp_model_load(model_path.c_str(), &m2) == PP_OK);
  int cls2 = -1;
  REQUIRE(pp_model_predict(m2, img.data(), 64, 64, &cls2) == PP_OK);
  CHECK(cls2 == cls);

  char* tiers = nullptr;
  REQUIRE(pp_targets_rank(c, m2, &tiers) == PP_OK);
  const std::string tiers_json = take(tiers);
  CHECK(tiers_json.find("\"high\"") != std::string::npos);

  const pp_support sup{20, 0, 7, 7};
  pp_patch* p = nullptr;
  REQUIRE(pp_patch_train(c, m2, 2, &sup, &p) == PP_OK);
  CHECK(pp_patch_train(c, m2, 6, &sup, &p) == PP_ERR_INVALID_ARGUMENT);
  const std::string patch_path = (out / "patch.png").string();
  REQUIRE(pp_patch_save(p, patch_path.c_str()) == PP_OK);
  pp_patch* p2 = nullptr;
  REQUIRE(pp_patch_load(patch_path.c_str(), &p2) == PP_OK);
  int target = -1;
  REQUIRE(pp_patch_target(p2, &target) == PP_OK);
  CHECK(target == 2);

  pp_sweep* sw = nullptr;
  REQUIRE(pp_sweep_run(c, m2, p2, PP_FAMILY_YAW, &sw) == PP_OK);
  CHECK(pp_sweep_run(c, m2, p2, PP_FAMILY_GRID, &sw) == PP_ERR_INVALID_ARGUMENT);
  size_t n = 0;
  REQUIRE(pp_sweep_size(sw, &n) == PP_OK);
  CHECK(n == 5u);
  double phi = 0, succ = 0, area = 0;
  REQUIRE(pp_sweep_point(sw, 0, &phi, &succ) == PP_OK);
  CHECK(phi == -90.0);
  CHECK(pp_sweep_point(sw, 5, &phi, &succ) == PP_ERR_INVALID_ARGUMENT);
  REQUIRE(pp_sweep_mast(sw, &area) == PP_OK);
  const std::string csv = (out / "sweep.csv").string();
  REQUIRE(pp_sweep_write_csv(sw, csv.c_str()) == PP_OK);
  const char* paths[] = {csv.c_str()};
  double from_csv = -1;
  REQUIRE(pp_mast_from_csv(paths, 1, &from_csv) == PP_OK);
  CHECK(from_csv == area);
  CHECK(pp_validate_csv(csv.c_str()) == PP_OK);
  char* svg = nullptr;
  REQUIRE(pp_plot_csv(csv.c_str(), (out / "plots").c_str(), &svg) == PP_OK);
  CHECK(fs::exists(take(svg)));

  pp_grid* g = nullptr;
  REQUIRE(pp_grid_run(c, m2, p2, &g) == PP_OK);
  size_t rows = 0, cols = 0;
  REQUIRE(pp_grid_dims(g, &rows, &cols) == PP_OK);
  CHECK(rows == 3u);
  CHECK(cols == 3u);
  double yaw = 0, roll = 0;
  REQUIRE(pp_grid_cell(g, 2, 0, &yaw, &roll, &succ) == PP_OK);
  CHECK(yaw == 180.0);
  CHECK(roll == -360.0);
  const std::string gcsv = (out / "grid.csv").string();
  REQUIRE(pp_grid_write_csv(g, gcsv.c_str()) == PP_OK);
  CHECK(pp_validate_csv(gcsv.c_str()) == PP_OK);

  char* plan = nullptr;
  REQUIRE(pp_experiment_plan(c, PP_FAMILY_LOOM, tiers_json.c_str(), &plan) == PP_OK);
  CHECK(take(plan).find("\"jobs\"") != std::string::npos);

  pp_grid_free(g);
  pp_sweep_free(sw);
  pp_patch_free(p2);
  pp_patch_free(p);
  pp_model_free(m2);
  pp_model_free(m);
  pp_config_free(c);
}
