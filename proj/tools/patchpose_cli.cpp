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


// patchpose command-line driver. Talks to the library only through the C API.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "patchpose/patchpose.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// Error carrying the process exit code.
struct Failure {
  int code;
  std::string message;
};

void check(pp_status s) {
  if (s == PP_OK) return;
  const int code = (s == PP_ERR_CONFIG || s == PP_ERR_INVALID_ARGUMENT) ? kExitConfig : kExitRuntime;
  throw Failure{code, pp_last_error()};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  pp_string_free(s);
  return out;
}

struct ConfigDeleter {
  void operator()(pp_config* c) const { pp_config_free(c); }
};
struct ModelDeleter {
  void operator()(pp_model* m) const { pp_model_free(m); }
};
struct PatchDeleter {
  void operator()(pp_patch* p) const { pp_patch_free(p); }
};
struct SweepDeleter {
  void operator()(pp_sweep* s) const { pp_sweep_free(s); }
};
struct GridDeleter {
  void operator()(pp_grid* g) const { pp_grid_free(g); }
};
using Config = std::unique_ptr<pp_config, ConfigDeleter>;
using Model = std::unique_ptr<pp_model, ModelDeleter>;
using Patch = std::unique_ptr<pp_patch, PatchDeleter>;
using Sweep = std::unique_ptr<pp_sweep, SweepDeleter>;
using Grid = std::unique_ptr<pp_grid, GridDeleter>;

struct Common {
  std::string config_path;
  std::string preset = "desk";
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  bool dry_run = false;
  bool quiet = false;
  std::vector<std::string> sets;
  std::string model_path;
};

void add_common(CLI::App* cmd, Common& c, bool needs_model) {
  cmd->add_option("--config", c.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--preset", c.preset, "Preset used when no config is given")
      ->check(CLI::IsMember({"desk", "full"}));
  cmd->add_option("--seed", c.seed, "Master seed (overrides the config)");
  cmd->add_option("--out", c.out, "Output directory (overrides the config)");
  cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--dry-run", c.dry_run, "Print the work plan without computing");
  cmd->add_flag("-q,--quiet", c.quiet, "No progress output");
  cmd->add_option("--set", c.sets, "Override a config field, e.g. --set /attack/n_batches=50");
  if (needs_model) {
    cmd->add_option("--model", c.model_path, "Trained model (default <out>/model.ppnet)");
  }
}

Config load_config(const Common& c) {
  pp_config* raw = nullptr;
  if (!c.config_path.empty()) {
    check(pp_config_load(c.config_path.c_str(), &raw));
  } else {
    check(pp_config_new(c.preset.c_str(), &raw));
  }
  Config cfg(raw);
  if (c.seed) check(pp_config_set_seed(cfg.get(), *c.seed));
  if (!c.out.empty()) check(pp_config_set_out_dir(cfg.get(), c.out.c_str()));
  for (const std::string& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Failure{kExitConfig, "--set expects POINTER=VALUE, got '" + s + "'"};
    check(pp_config_set(cfg.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str()));
  }
  pp_set_jobs(c.jobs);
  pp_set_verbose(c.quiet ? 0 : 1);
  return cfg;
}

fs::path out_dir(const Config& cfg) {
  char* s = nullptr;
  check(pp_config_out_dir(cfg.get(), &s));
  return fs::path(take(s));
}

fs::path model_path(const Common& c, const Config& cfg) {
  return c.model_path.empty() ? out_dir(cfg) / "model.ppnet" : fs::path(c.model_path);
}

Model load_model(const Common& c, const Config& cfg) {
  const fs::path p = model_path(c, cfg);
  if (!fs::exists(p)) {
    throw Failure{kExitRuntime, "no trained model at " + p.string() +
                                    "; run `patchpose train-model --out " + out_dir(cfg).string() +
                                    "` first or pass --model"};
  }
  pp_model* m = nullptr;
  check(pp_model_load(p.string().c_str(), &m));
  return Model(m);
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  out << text;
  if (!out) throw Failure{kExitRuntime, "cannot write " + p.string()};
}

void save_config_copy(const Config& cfg) {
  char* s = nullptr;
  check(pp_config_to_json(cfg.get(), &s));
  write_file(out_dir(cfg) / "config.json", take(s));
}

std::string config_json(const Config& cfg) {
  char* s = nullptr;
  check(pp_config_to_json(cfg.get(), &s));
  return take(s);
}

pp_family parse_family(const std::string& name) {
  if (name == "yaw") return PP_FAMILY_YAW;
  if (name == "roll") return PP_FAMILY_ROLL;
  if (name == "loom") return PP_FAMILY_LOOM;
  if (name == "grid") return PP_FAMILY_GRID;
  throw Failure{kExitConfig, "unknown family '" + name + "'"};
}

double config_number(const Config& cfg, const char* pointer) {
  double v = 0.0;
  check(pp_config_get_number(cfg.get(), pointer, &v));
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial patch optimization and pose-sweep evaluation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(pp_version()));

  Common common;

  auto* train_model = app.add_subcommand("train-model", "Train the classifier");
  add_common(train_model, common, true);

  auto* rank = app.add_subcommand("rank-targets", "Rank target classes into tiers");
  add_common(rank, common, true);

  int target = -1;
  double yaw_support = 0.0, roll_support = 0.0;
  std::vector<double> loom_support;
  std::string patch_out;
  auto* train_patch = app.add_subcommand("train-patch", "Optimize one patch");
  add_common(train_patch, common, true);
  train_patch->add_option("--target", target, "Target class")->required();
  train_patch->add_option("--yaw-support", yaw_support, "Yaw half-range in degrees");
  train_patch->add_option("--roll-support", roll_support, "Roll half-range in degrees");
  train_patch->add_option("--loom-support", loom_support, "Depth range LO HI")->expected(2);
  train_patch->add_option("--patch-out", patch_out, "PNG path (default <out>/patches/...)");

  std::string patch_in, family_name, csv_out;
  auto* sweep = app.add_subcommand("sweep", "Evaluate a patch over a yaw, roll or loom sweep");
  add_common(sweep, common, true);
  sweep->add_option("--patch", patch_in, "Patch PNG")->required()->check(CLI::ExistingFile);
  sweep->add_option("--family", family_name, "yaw, roll or loom")
      ->required()
      ->check(CLI::IsMember({"yaw", "roll", "loom"}));
  sweep->add_option("--csv", csv_out, "Output CSV (default <out>/<patch>_<family>.csv)");

  auto* grid = app.add_subcommand("grid", "Evaluate a patch over the yaw x roll grid");
  add_common(grid, common, true);
  grid->add_option("--patch", patch_in, "Patch PNG")->required()->check(CLI::ExistingFile);
  grid->add_option("--csv", csv_out, "Output CSV (default <out>/<patch>_grid.csv)");

  std::vector<std::string> families;
  auto* run = app.add_subcommand("run", "Run whole experiments: every support x target");
  add_common(run, common, true);
  run->add_option("--family", families, "yaw, roll, loom and/or grid")
      ->required()
      ->check(CLI::IsMember({"yaw", "roll", "loom", "grid"}));

  auto* report = app.add_subcommand("report", "Aggregate results into mAST tables and plots");
  add_common(report, common, false);
  report->add_option("--family", families, "Families to report (default: all present)")
      ->check(CLI::IsMember({"yaw", "roll", "loom", "grid"}));

  std::vector<std::string> csvs;
  auto* plot = app.add_subcommand("plot", "Render CSV results as SVG");
  add_common(plot, common, false);
  plot->add_option("csv", csvs, "CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    Config cfg = load_config(common);
    const fs::path out = out_dir(cfg);

    if (*train_model) {
      const fs::path mp = model_path(common, cfg);
      if (common.dry_run) {
        std::printf("train-model: classifier training; writes %s and %s\n", mp.string().c_str(),
                    (out / "metrics.json").string().c_str());
        std::printf("%s", config_json(cfg).c_str());
        return kExitOk;
      }
      pp_model* raw = nullptr;
      double acc = 0.0;
      char* metrics = nullptr;
      check(pp_model_train(cfg.get(), &raw, &acc, &metrics));
      Model m(raw);
      fs::create_directories(out);
      check(pp_model_save(m.get(), mp.string().c_str()));
      write_file(out / "metrics.json", take(metrics));
      save_config_copy(cfg);
      std::printf("val_accuracy %.4f\nmodel %s\n", acc, mp.string().c_str());
      const double gate = config_number(cfg, "/model/min_val_accuracy");
      if (acc < gate) {
        std::fprintf(stderr, "error: validation accuracy %.4f is below the %.2f gate\n", acc, gate);
        return kExitRuntime;
      }
      return kExitOk;
    }

    if (*rank) {
      if (common.dry_run) {
        std::printf("rank-targets: one quick fronto-parallel attack per class; writes %s\n",
                    (out / "tiers.json").string().c_str());
        return kExitOk;
      }
      Model m = load_model(common, cfg);
      char* tiers = nullptr;
      check(pp_targets_rank(cfg.get(), m.get(), &tiers));
      const std::string text = take(tiers);
      write_file(out / "tiers.json", text);
      std::printf("%s", text.c_str());
      return kExitOk;
    }

    if (*train_patch) {
      const double ref = config_number(cfg, "/patch/reference_depth");
      pp_support s{yaw_support, roll_support, ref, ref};
      if (loom_support.size() == 2) {
        s.z_lo = loom_support[0];
        s.z_hi = loom_support[1];
      }
      char* sid = nullptr;
      check(pp_support_id(&s, &sid));
      const std::string id = take(sid);
      const fs::path png = patch_out.empty()
                               ? out / "patches" / id / ("class_" + std::to_string(target) + ".png")
                               : fs::path(patch_out);
      if (common.dry_run) {
        std::printf("train-patch: target %d, support %s; writes %s\n", target, id.c_str(),
                    png.string().c_str());
        return kExitOk;
      }
      Model m = load_model(common, cfg);
      pp_patch* raw = nullptr;
      check(pp_patch_train(cfg.get(), m.get(), target, &s, &raw));
      Patch p(raw);
      check(pp_patch_save(p.get(), png.string().c_str()));
      std::printf("patch %s\n", png.string().c_str());
      return kExitOk;
    }

    if (*sweep || *grid) {
      const bool is_grid = grid->parsed();
      const std::string fam = is_grid ? "grid" : family_name;
      const fs::path csv =
          csv_out.empty() ? out / (fs::path(patch_in).stem().string() + "_" + fam + ".csv")
                          : fs::path(csv_out);
      if (common.dry_run) {
        std::printf("%s: evaluate %s; writes %s\n", is_grid ? "grid" : "sweep", patch_in.c_str(),
                    csv.string().c_str());
        return kExitOk;
      }
      Model m = load_model(common, cfg);
      pp_patch* praw = nullptr;
      check(pp_patch_load(patch_in.c_str(), &praw));
      Patch p(praw);
      if (is_grid) {
        pp_grid* g = nullptr;
        check(pp_grid_run(cfg.get(), m.get(), p.get(), &g));
        Grid gr(g);
        check(pp_grid_write_csv(gr.get(), csv.string().c_str()));
      } else {
        pp_sweep* sw = nullptr;
        check(pp_sweep_run(cfg.get(), m.get(), p.get(), parse_family(fam), &sw));
        Sweep sr(sw);
        check(pp_sweep_write_csv(sr.get(), csv.string().c_str()));
        double area = 0.0;
        check(pp_sweep_mast(sr.get(), &area));
        std::printf("mast %.4f\n", area);
      }
      std::printf("csv %s\n", csv.string().c_str());
      return kExitOk;
    }

    if (*run) {
      if (common.dry_run) {
        char* tj = nullptr;
        int placeholder = 0;
        check(pp_targets_known(cfg.get(), &tj, &placeholder));
        const std::string tiers = take(tj);
        if (placeholder) {
          std::fprintf(stderr, "note: targets are not ranked yet; class ids below are placeholders\n");
        }
        for (const std::string& f : families) {
          char* plan = nullptr;
          check(pp_experiment_plan(cfg.get(), parse_family(f), tiers.c_str(), &plan));
          std::printf("%s", take(plan).c_str());
        }
        return kExitOk;
      }
      Model m = load_model(common, cfg);
      save_config_copy(cfg);
      for (const std::string& f : families) {
        char* summary = nullptr;
        check(pp_experiment_run(cfg.get(), m.get(), parse_family(f), &summary));
        write_file(out / f / "summary.json", take(summary));
        char* table = nullptr;
        check(pp_report(cfg.get(), parse_family(f), nullptr, &table));
        std::printf("%s\n", take(table).c_str());
      }
      return kExitOk;
    }

    if (*report) {
      std::vector<std::string> todo = families;
      if (todo.empty()) {
        for (const char* f : {"yaw", "roll", "loom", "grid"}) {
          if (fs::is_directory(out / f)) todo.emplace_back(f);
        }
      }
      if (todo.empty()) throw Failure{kExitRuntime, "no experiment results under " + out.string()};
      if (common.dry_run) {
        for (const auto& f : todo) std::printf("report: %s\n", (out / f).string().c_str());
        return kExitOk;
      }
      for (const std::string& f : todo) {
        char* table = nullptr;
        check(pp_report(cfg.get(), parse_family(f), nullptr, &table));
        std::printf("%s\n", take(table).c_str());
      }
      return kExitOk;
    }

    if (*plot) {
      for (const std::string& c : csvs) {
        if (common.dry_run) {
          check(pp_validate_csv(c.c_str()));
          std::printf("plot: %s is valid\n", c.c_str());
          continue;
        }
        char* svg = nullptr;
        check(pp_plot_csv(c.c_str(), out.string().c_str(), &svg));
        std::printf("svg %s\n", take(svg).c_str());
      }
      return kExitOk;
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
