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


#include "patchpose/patchpose.h"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <string>

#include "attack.hpp"
#include "config.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "experiment.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "tiny_convnet.hpp"

namespace ex = patchpose::experiment;
namespace fs = std::filesystem;

struct pp_config {
  ex::ExperimentConfig value;
};
struct pp_model {
  patchpose::model::TinyConvNet net{2};
};
struct pp_patch {
  patchpose::attack::Patch patch;
};
struct pp_sweep {
  patchpose::eval::SweepResult result;
};
struct pp_grid {
  patchpose::eval::GridResult result;
};

namespace {

ex::Support to_support(const pp_support& p) {
  const ex::Support s{p.yaw_max, p.roll_max, p.z_lo, p.z_hi};
  if (!(s.yaw_max >= 0.0 && s.roll_max >= 0.0 && s.z_lo > 0.0 && s.z_lo <= s.z_hi)) {
    throw std::invalid_argument("support needs yaw_max, roll_max >= 0 and 0 < z_lo <= z_hi");
  }
  return s;
}

thread_local std::string last_error;
std::atomic<bool> verbose{false};

void log_line(const std::string& s) {
  if (verbose.load()) std::fprintf(stderr, "%s\n", s.c_str());
}

ex::Progress progress() {
  if (!verbose.load()) return {};
  return log_line;
}

// Maps exceptions to status codes; the message goes to pp_last_error.
template <typename Fn>
pp_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return PP_OK;
  } catch (const patchpose::ConfigError& e) {
    last_error = e.what();
    return PP_ERR_CONFIG;
  } catch (const patchpose::IoError& e) {
    last_error = e.what();
    return PP_ERR_IO;
  } catch (const patchpose::GateError& e) {
    last_error = e.what();
    return PP_ERR_GATE;
  } catch (const patchpose::DegenerateError& e) {
    last_error = e.what();
    return PP_ERR_DEGENERATE;
  } catch (const std::invalid_argument& e) {
    last_error = e.what();
    return PP_ERR_INVALID_ARGUMENT;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PP_ERR_RUNTIME;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PP_ERR_RUNTIME;
  }
}

void need(const void* p, const char* name) {
  if (p == nullptr) throw std::invalid_argument(std::string(name) + " must not be null");
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ex::Family family(pp_family f) {
  switch (f) {
    case PP_FAMILY_YAW: return ex::Family::kYaw;
    case PP_FAMILY_ROLL: return ex::Family::kRoll;
    case PP_FAMILY_LOOM: return ex::Family::kLoom;
    case PP_FAMILY_GRID: return ex::Family::kGrid;
  }
  throw std::invalid_argument("unknown family");
}

patchpose::data::TargetTiers parse_tiers(const char* json) {
  try {
    return ex::tiers_from_json(nlohmann::json::parse(json));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("tiers JSON: ") + e.what());
  }
}

fs::path out_root(const pp_config* c) { return fs::path(c->value.out_dir); }

}  // namespace

extern "C" {

const char* pp_version(void) { return "0.1.0"; }
const char* pp_last_error(void) { return last_error.c_str(); }
void pp_string_free(char* s) { std::free(s); }
void pp_set_jobs(int jobs) { patchpose::set_worker_count(jobs); }
void pp_set_verbose(int v) { verbose.store(v != 0); }

pp_status pp_config_new(const char* preset, pp_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new pp_config{ex::preset(preset ? preset : "desk")};
  });
}

pp_status pp_config_parse(const char* json, pp_config** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    *out = new pp_config{ex::parse_config(json)};
  });
}

pp_status pp_config_load(const char* path, pp_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pp_config{ex::load_config(path)};
  });
}

pp_status pp_config_set(pp_config* config, const char* pointer, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(pointer, "pointer");
    need(value, "value");
    ex::set_field(config->value, pointer, value);
  });
}

pp_status pp_config_set_seed(pp_config* config, uint64_t seed) {
  return guarded([&] {
    need(config, "config");
    config->value.seed = seed;
  });
}

pp_status pp_config_set_out_dir(pp_config* config, const char* dir) {
  return guarded([&] {
    need(config, "config");
    need(dir, "dir");
    if (*dir == '\0') throw patchpose::ConfigError("config /out_dir: must not be empty");
    config->value.out_dir = dir;
  });
}

pp_status pp_config_out_dir(const pp_config* config, char** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = dup(config->value.out_dir);
  });
}

pp_status pp_config_to_json(const pp_config* config, char** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = dup(ex::dump_config(config->value));
  });
}

pp_status pp_config_get_number(const pp_config* config, const char* pointer, double* out) {
  return guarded([&] {
    need(config, "config");
    need(pointer, "pointer");
    need(out, "out");
    const auto j = ex::to_json(config->value);
    nlohmann::json::json_pointer ptr;
    try {
      ptr = nlohmann::json::json_pointer(pointer);
    } catch (const nlohmann::json::exception& e) {
      throw patchpose::ConfigError(std::string("config ") + pointer + ": " + e.what());
    }
    const nlohmann::json plain = j;
    if (!plain.contains(ptr) || !plain.at(ptr).is_number()) {
      throw patchpose::ConfigError(std::string("config ") + pointer + ": not a numeric field");
    }
    *out = plain.at(ptr).get<double>();
  });
}

void pp_config_free(pp_config* config) { delete config; }

pp_status pp_model_train(const pp_config* config, pp_model** out, double* val_accuracy,
                         char** metrics_json) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    ex::TrainedModel m = ex::train_model(config->value, progress());
    if (val_accuracy) *val_accuracy = m.report.val_accuracy;
    if (metrics_json) *metrics_json = dup(ex::metrics_json(config->value, m).dump(2) + "\n");
    *out = new pp_model{std::move(m.net)};
  });
}

pp_status pp_model_save(const pp_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    patchpose::model::save_model(model->net, path);
  });
}

pp_status pp_model_load(const char* path, pp_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new pp_model{patchpose::model::load_model(path)};
  });
}

pp_status pp_model_num_classes(const pp_model* model, int* out) {
  return guarded([&] {
    need(model, "model");
    need(out, "out");
    *out = model->net.num_classes();
  });
}

pp_status pp_model_predict(const pp_model* model, const double* image, int height, int width,
                           int* out_class) {
  return guarded([&] {
    need(model, "model");
    need(image, "image");
    need(out_class, "out_class");
    if (height <= 0 || width <= 0) throw std::invalid_argument("image dimensions must be positive");
    patchpose::Image img(height, width);
    std::copy(image, image + img.size(), img.values().begin());
    *out_class = patchpose::model::predict(model->net, img);
  });
}

void pp_model_free(pp_model* model) { delete model; }

pp_status pp_targets_rank(const pp_config* config, const pp_model* model, char** tiers_json) {
  return guarded([&] {
    need(config, "config");
    need(model, "model");
    need(tiers_json, "tiers_json");
    const ex::Workbench wb(config->value, model->net);
    *tiers_json = dup(ex::tiers_json(ex::rank_targets(wb)).dump(2) + "\n");
  });
}

pp_status pp_targets_resolve(const pp_config* config, const pp_model* model, char** tiers_json) {
  return guarded([&] {
    need(config, "config");
    need(model, "model");
    need(tiers_json, "tiers_json");
    const ex::Workbench wb(config->value, model->net);
    *tiers_json = dup(ex::tiers_json(ex::resolve_tiers(wb, out_root(config), progress())).dump(2) + "\n");
  });
}

pp_status pp_targets_known(const pp_config* config, char** tiers_json, int* placeholder) {
  return guarded([&] {
    need(config, "config");
    need(tiers_json, "tiers_json");
    const auto& t = config->value.targets;
    int fake = 0;
    patchpose::data::TargetTiers tiers;
    if (!t.high.empty() || !t.mid.empty() || !t.low.empty()) {
      tiers = {t.high, t.mid, t.low, {}};
    } else if (fs::exists(out_root(config) / "tiers.json")) {
      tiers = ex::load_tiers(out_root(config) / "tiers.json");
    } else {
      fake = 1;
      int next = 0;
      for (auto* v : {&tiers.high, &tiers.mid, &tiers.low}) {
        for (int i = 0; i < t.tier_size; ++i) v->push_back(next++);
      }
    }
    if (placeholder) *placeholder = fake;
    *tiers_json = dup(ex::tiers_json(tiers).dump(2) + "\n");
  });
}

pp_status pp_support_id(const pp_support* support, char** out) {
  return guarded([&] {
    need(support, "support");
    need(out, "out");
    *out = dup(to_support(*support).id());
  });
}

pp_status pp_patch_train(const pp_config* config, const pp_model* model, int target,
                         const pp_support* support, pp_patch** out) {
  return guarded([&] {
    need(config, "config");
    need(model, "model");
    need(support, "support");
    need(out, "out");
    const ex::Workbench wb(config->value, model->net);
    *out = new pp_patch{ex::train_patch(wb, target, to_support(*support))};
  });
}

pp_status pp_patch_save(const pp_patch* patch, const char* png_path) {
  return guarded([&] {
    need(patch, "patch");
    need(png_path, "png_path");
    const fs::path p(png_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    patchpose::attack::save_patch(patch->patch, p);
  });
}

pp_status pp_patch_load(const char* png_path, pp_patch** out) {
  return guarded([&] {
    need(png_path, "png_path");
    need(out, "out");
    *out = new pp_patch{patchpose::attack::load_patch(png_path)};
  });
}

pp_status pp_patch_target(const pp_patch* patch, int* out) {
  return guarded([&] {
    need(patch, "patch");
    need(out, "out");
    *out = patch->patch.target;
  });
}

void pp_patch_free(pp_patch* patch) { delete patch; }

pp_status pp_sweep_run(const pp_config* config, const pp_model* model, const pp_patch* patch,
                       pp_family fam, pp_sweep** out) {
  return guarded([&] {
    need(config, "config");
    need(model, "model");
    need(patch, "patch");
    need(out, "out");
    const ex::Family f = family(fam);
    if (f == ex::Family::kGrid) throw std::invalid_argument("use pp_grid_run for grids");
    const ex::Workbench wb(config->value, model->net);
    const auto spec = ex::sweep_spec(config->value, f, ex::eval_seed(config->value));
    *out = new pp_sweep{patchpose::eval::run_sweep(patch->patch, wb.pool(), spec)};
  });
}

pp_status pp_sweep_size(const pp_sweep* sweep, size_t* out) {
  return guarded([&] {
    need(sweep, "sweep");
    need(out, "out");
    *out = sweep->result.phi.size();
  });
}

pp_status pp_sweep_point(const pp_sweep* sweep, size_t i, double* phi, double* success) {
  return guarded([&] {
    need(sweep, "sweep");
    if (i >= sweep->result.phi.size()) throw std::invalid_argument("sweep index out of range");
    if (phi) *phi = sweep->result.phi[i];
    if (success) *success = sweep->result.success[i];
  });
}

pp_status pp_sweep_mast(const pp_sweep* sweep, double* out) {
  return guarded([&] {
    need(sweep, "sweep");
    need(out, "out");
    *out = patchpose::eval::normalized_area(sweep->result);
  });
}

pp_status pp_sweep_write_csv(const pp_sweep* sweep, const char* path) {
  return guarded([&] {
    need(sweep, "sweep");
    need(path, "path");
    patchpose::eval::write_sweep_csv(path, sweep->result);
  });
}

void pp_sweep_free(pp_sweep* sweep) { delete sweep; }

pp_status pp_grid_run(const pp_config* config, const pp_model* model, const pp_patch* patch,
                      pp_grid** out) {
  return guarded([&] {
    need(config, "config");
    need(model, "model");
    need(patch, "patch");
    need(out, "out");
    const ex::Workbench wb(config->value, model->net);
    const auto spec = ex::grid_spec(config->value, ex::eval_seed(config->value));
    *out = new pp_grid{patchpose::eval::run_grid(patch->patch, wb.pool(), spec)};
  });
}

pp_status pp_grid_dims(const pp_grid* grid, size_t* rows, size_t* cols) {
  return guarded([&] {
    need(grid, "grid");
    if (rows) *rows = grid->result.yaw.size();
    if (cols) *cols = grid->result.roll.size();
  });
}

pp_status pp_grid_cell(const pp_grid* grid, size_t row, size_t col, double* yaw, double* roll,
                       double* success) {
  return guarded([&] {
    need(grid, "grid");
    const auto& r = grid->result;
    if (row >= r.yaw.size() || col >= r.roll.size()) throw std::invalid_argument("grid index out of range");
    if (yaw) *yaw = r.yaw[row];
    if (roll) *roll = r.roll[col];
    if (success) *success = r.at(row, col);
  });
}

pp_status pp_grid_write_csv(const pp_grid* grid, const char* path) {
  return guarded([&] {
    need(grid, "grid");
    need(path, "path");
    patchpose::eval::write_grid_csv(path, grid->result);
  });
}

void pp_grid_free(pp_grid* grid) { delete grid; }

pp_status pp_mast_from_csv(const char* const* paths, size_t n, double* out) {
  return guarded([&] {
    need(paths, "paths");
    need(out, "out");
    std::vector<patchpose::eval::SweepResult> sweeps;
    for (size_t i = 0; i < n; ++i) {
      need(paths[i], "path");
      sweeps.push_back(patchpose::eval::read_sweep_csv(paths[i]));
    }
    *out = patchpose::eval::mast(sweeps).value;
  });
}

pp_status pp_experiment_plan(const pp_config* config, pp_family fam, const char* tiers_json,
                             char** plan_json) {
  return guarded([&] {
    need(config, "config");
    need(tiers_json, "tiers_json");
    need(plan_json, "plan_json");
    const auto plan = ex::make_plan(config->value, family(fam), parse_tiers(tiers_json));
    *plan_json = dup(plan.to_json().dump(2) + "\n");
  });
}

pp_status pp_experiment_run(const pp_config* config, const pp_model* model, pp_family fam,
                            char** summary_json) {
  return guarded([&] {
    need(config, "config");
    need(model, "model");
    const ex::Workbench wb(config->value, model->net);
    const auto tiers = ex::resolve_tiers(wb, out_root(config), progress());
    const auto plan = ex::make_plan(config->value, family(fam), tiers);
    const auto summary = ex::run_family(wb, plan, out_root(config), progress());
    if (summary_json) {
      nlohmann::ordered_json j;
      j["plan"] = summary.plan.to_json();
      j["optimizations"] = summary.optimizations;
      j["evaluations"] = summary.evaluations;
      nlohmann::ordered_json files = nlohmann::ordered_json::array();
      for (const auto& f : summary.files) files.push_back(f.string());
      j["files"] = files;
      *summary_json = dup(j.dump(2) + "\n");
    }
  });
}

pp_status pp_report(const pp_config* config, pp_family fam, const char* tiers_json,
                    char** table_markdown) {
  return guarded([&] {
    need(config, "config");
    const auto tiers =
        tiers_json ? parse_tiers(tiers_json) : ex::load_tiers(out_root(config) / "tiers.json");
    const auto rep = ex::report_family(out_root(config), family(fam), tiers);
    if (table_markdown) *table_markdown = dup(rep.table.markdown());
  });
}

pp_status pp_plot_csv(const char* csv_path, const char* out_dir, char** svg_path) {
  return guarded([&] {
    need(csv_path, "csv_path");
    need(out_dir, "out_dir");
    const fs::path p = ex::plot_csv(csv_path, out_dir);
    if (svg_path) *svg_path = dup(p.string());
  });
}

pp_status pp_validate_csv(const char* csv_path) {
  return guarded([&] {
    need(csv_path, "csv_path");
    ex::validate_csv(csv_path);
  });
}

}  // extern "C"
