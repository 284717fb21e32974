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


#include "experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <mutex>

#include "errors.hpp"
#include "parallel.hpp"
#include "report.hpp"
#include "rng.hpp"
#include "scenes.hpp"

namespace patchpose::experiment {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::uint64_t dataset_seed(const ExperimentConfig& c) { return derive_seed(c.seed, "dataset"); }
std::uint64_t model_seed(const ExperimentConfig& c) { return derive_seed(c.seed, "model"); }
std::uint64_t rank_seed(const ExperimentConfig& c) { return derive_seed(c.seed, "rank-targets"); }
std::uint64_t eval_seed(const ExperimentConfig& c) { return derive_seed(c.seed, "evaluation"); }

std::uint64_t patch_seed(const ExperimentConfig& c, const Support& s, int target) {
  Rng r = make_stream({c.seed, name_key("patch"), name_key(s.id()),
                       static_cast<std::uint64_t>(target)});
  return r();
}

data::Dataset make_split(const ExperimentConfig& c, data::Split split) {
  int n = 0;
  switch (split) {
    case data::Split::kTrain: n = c.dataset.train_per_class; break;
    case data::Split::kVal: n = c.dataset.val_per_class; break;
    case data::Split::kAttack: n = c.dataset.attack_per_class; break;
    case data::Split::kEval: n = c.dataset.eval_per_class; break;
  }
  return data::make_dataset(n, split, dataset_seed(c), c.dataset.num_classes,
                            c.dataset.image_size);
}

TrainedModel train_model(const ExperimentConfig& c, const Progress& progress) {
  const data::Dataset train = make_split(c, data::Split::kTrain);
  const data::Dataset val = make_split(c, data::Split::kVal);
  model::TrainOptions opts;
  opts.epochs = c.model.epochs;
  opts.learning_rate = c.model.learning_rate;
  opts.momentum = c.model.momentum;
  opts.batch_size = c.model.batch_size;
  opts.seed = model_seed(c);
  if (progress) {
    progress("training classifier on " + std::to_string(train.size()) + " scenes for " +
             std::to_string(opts.epochs) + " epochs");
  }
  TrainedModel m{model::TinyConvNet(c.dataset.num_classes, c.dataset.image_size), {}};
  m.net = model::train_classifier(train, val, opts, &m.report);
  return m;
}

ordered_json metrics_json(const ExperimentConfig& c, const TrainedModel& m) {
  ordered_json j;
  j["val_accuracy"] = m.report.val_accuracy;
  j["min_val_accuracy"] = c.model.min_val_accuracy;
  j["passed_gate"] = m.report.val_accuracy >= c.model.min_val_accuracy;
  j["epochs"] = c.model.epochs;
  j["epoch_loss"] = m.report.epoch_loss;
  j["seed"] = c.seed;
  j["model_seed"] = model_seed(c);
  j["num_classes"] = c.dataset.num_classes;
  j["train_images"] = c.dataset.num_classes * c.dataset.train_per_class;
  j["val_images"] = c.dataset.num_classes * c.dataset.val_per_class;
  return j;
}

Workbench::Workbench(const ExperimentConfig& c, const model::TinyConvNet& net)
    : config_(c),
      net_(net),
      k_(experiment::intrinsics(c)),
      attack_(make_split(c, data::Split::kAttack)),
      eval_(make_split(c, data::Split::kEval)),
      pool_(net, eval_, k_) {
  if (net.num_classes() != c.dataset.num_classes || net.input_size() != c.dataset.image_size) {
    throw ConfigError("model has " + std::to_string(net.num_classes()) + " classes at " +
                      std::to_string(net.input_size()) + " px but the config expects " +
                      std::to_string(c.dataset.num_classes) + " at " +
                      std::to_string(c.dataset.image_size));
  }
}

data::TargetTiers rank_targets(const Workbench& wb) {
  const ExperimentConfig& c = wb.config();
  data::RankOptions opts;
  opts.tier_size = c.targets.tier_size;
  opts.n_batches = c.targets.rank_batches;
  opts.batch_size = c.targets.rank_batch_size;
  opts.images = c.targets.rank_images;
  opts.attack = attack_config(c, 0);
  opts.depth = c.patch.reference_depth;
  opts.side = c.patch.side;
  opts.randomize_location = c.patch.randomize_location;
  opts.min_accuracy = c.targets.min_rank_accuracy;
  opts.seed = rank_seed(c);
  const data::Dataset val = make_split(c, data::Split::kVal);
  return data::rank_target_classes(wb.net(), val, wb.attack_scenes(), wb.pool(), opts);
}

ordered_json tiers_json(const data::TargetTiers& t) {
  ordered_json j;
  j["high"] = t.high;
  j["mid"] = t.mid;
  j["low"] = t.low;
  j["scores"] = t.scores;
  return j;
}

data::TargetTiers tiers_from_json(const json& j) {
  data::TargetTiers t;
  try {
    t.high = j.at("high").get<std::vector<int>>();
    t.mid = j.at("mid").get<std::vector<int>>();
    t.low = j.at("low").get<std::vector<int>>();
    t.scores = j.value("scores", std::vector<double>{});
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed tiers: ") + e.what());
  }
  return t;
}

void save_tiers(const fs::path& path, const data::TargetTiers& t) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << tiers_json(t).dump(2) << '\n';
}

data::TargetTiers load_tiers(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return tiers_from_json(j);
}

std::string tier_of(const data::TargetTiers& t, int target) {
  const auto has = [&](const std::vector<int>& v) {
    return std::find(v.begin(), v.end(), target) != v.end();
  };
  if (has(t.high)) return "high";
  if (has(t.mid)) return "mid";
  if (has(t.low)) return "low";
  return "none";
}

data::TargetTiers resolve_tiers(const Workbench& wb, const fs::path& out_root,
                                const Progress& progress) {
  const auto& t = wb.config().targets;
  if (!t.high.empty() || !t.mid.empty() || !t.low.empty()) {
    return data::TargetTiers{t.high, t.mid, t.low, {}};
  }
  const fs::path file = out_root / "tiers.json";
  if (fs::exists(file)) return load_tiers(file);
  if (progress) progress("ranking target classes (no tiers.json yet)");
  data::TargetTiers tiers = rank_targets(wb);
  save_tiers(file, tiers);
  return tiers;
}

attack::Patch train_patch(const Workbench& wb, int target, const Support& support) {
  const ExperimentConfig& c = wb.config();
  if (target < 0 || target >= c.dataset.num_classes) {
    throw std::invalid_argument("target class " + std::to_string(target) + " is outside [0, " +
                                std::to_string(c.dataset.num_classes) + ")");
  }
  attack::Patch p =
      attack::optimize_patch(wb.net(), wb.attack_scenes(), target, distribution(c, support),
                             attack_config(c, patch_seed(c, support, target)), wb.intrinsics());
  p.model_seed = wb.net().seed();
  p.texture = quantize_8bit(p.texture);
  return p;
}

ordered_json Plan::to_json() const {
  ordered_json j;
  j["family"] = family_name(family);
  ordered_json sup = ordered_json::array();
  for (const Support& s : supports) sup.push_back(s.id());
  j["supports"] = sup;
  j["targets"] = targets;
  ordered_json jobs_j = ordered_json::array();
  for (const Job& job : jobs) {
    jobs_j.push_back({{"support", job.support.id()}, {"target", job.target}, {"tier", job.tier}});
  }
  j["jobs"] = jobs_j;
  j["points_per_job"] = points_per_job;
  j["images_per_point"] = images_per_point;
  j["optimizations"] = optimizations;
  j["attack_samples"] = attack_samples;
  j["evaluations"] = evaluations;
  return j;
}

Plan make_plan(const ExperimentConfig& c, Family family, const data::TargetTiers& tiers) {
  Plan p;
  p.family = family;
  p.supports = family_supports(c, family);
  for (const std::string& name : c.targets.run_tiers) {
    const std::vector<int>& ids = name == "high" ? tiers.high : name == "mid" ? tiers.mid : tiers.low;
    for (int t : ids) {
      if (std::find(p.targets.begin(), p.targets.end(), t) == p.targets.end()) p.targets.push_back(t);
    }
  }
  for (const Support& s : p.supports) {
    for (int t : p.targets) p.jobs.push_back({s, t, tier_of(tiers, t)});
  }
  if (family == Family::kGrid) {
    const std::size_t n = static_cast<std::size_t>(c.grid.n_intervals) + 1;
    p.points_per_job = n * n;
  } else {
    p.points_per_job = static_cast<std::size_t>(sweep_spec(c, family, 0).n_intervals) + 1;
  }
  p.images_per_point = static_cast<std::size_t>(c.images_per_point);
  p.optimizations = p.jobs.size();
  p.attack_samples = p.optimizations * static_cast<std::size_t>(c.attack.n_batches) *
                     static_cast<std::size_t>(c.attack.batch_size);
  p.evaluations = p.optimizations * p.points_per_job * p.images_per_point;
  return p;
}

fs::path family_dir(const fs::path& out_root, Family f) { return out_root / family_name(f); }

fs::path patch_path(const fs::path& out_root, Family f, const Support& s, int target) {
  return family_dir(out_root, f) / "patches" / s.id() / ("class_" + std::to_string(target) + ".png");
}

fs::path result_path(const fs::path& out_root, Family f, const Support& s, int target) {
  return family_dir(out_root, f) / (f == Family::kGrid ? "grids" : "sweeps") / s.id() /
         ("class_" + std::to_string(target) + ".csv");
}

RunSummary run_family(const Workbench& wb, const Plan& plan, const fs::path& out_root,
                      const Progress& progress) {
  const ExperimentConfig& c = wb.config();
  RunSummary summary;
  summary.plan = plan;
  const std::size_t evals_before = wb.pool().evaluations();
  const std::uint64_t seed = eval_seed(c);
  std::mutex log_mutex;
  std::size_t done = 0;

  auto run_job = [&](std::size_t i) {
    const Job& job = plan.jobs[i];
    const auto t0 = std::chrono::steady_clock::now();
    const attack::Patch patch = train_patch(wb, job.target, job.support);
    attack::save_patch(patch, patch_path(out_root, plan.family, job.support, job.target));
    const fs::path out = result_path(out_root, plan.family, job.support, job.target);
    std::string detail;
    if (plan.family == Family::kGrid) {
      const eval::GridResult g = eval::run_grid(patch, wb.pool(), grid_spec(c, seed));
      eval::write_grid_csv(out, g);
      detail = "grid mean " + eval::format_double(grid_area(g.yaw, g.roll, g.success));
    } else {
      const eval::SweepResult r = eval::run_sweep(patch, wb.pool(), sweep_spec(c, plan.family, seed));
      eval::write_sweep_csv(out, r);
      detail = "mAST " + eval::format_double(eval::normalized_area(r));
    }
    if (progress) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.1f s", secs);
      std::lock_guard lock(log_mutex);
      ++done;
      progress("[" + std::to_string(done) + "/" + std::to_string(plan.jobs.size()) + "] " +
               std::string(family_name(plan.family)) + " " + job.support.id() + " class " +
               std::to_string(job.target) + " (" + job.tier + "): " + detail + ", " + buf);
    }
  };
  // Jobs across workers when there are enough of them; otherwise the
  // workers go to the per-scene loops inside each job.
  if (plan.jobs.size() >= static_cast<std::size_t>(worker_count())) {
    parallel_for(plan.jobs.size(), run_job);
  } else {
    for (std::size_t i = 0; i < plan.jobs.size(); ++i) run_job(i);
  }
  summary.optimizations = plan.jobs.size();
  summary.evaluations = wb.pool().evaluations() - evals_before;
  for (const Job& job : plan.jobs) {
    summary.files.push_back(patch_path(out_root, plan.family, job.support, job.target));
    summary.files.push_back(result_path(out_root, plan.family, job.support, job.target));
  }

  data::TargetTiers tiers;
  for (const Job& job : plan.jobs) {
    auto& v = job.tier == "high" ? tiers.high : job.tier == "mid" ? tiers.mid : tiers.low;
    if (job.tier != "none" && std::find(v.begin(), v.end(), job.target) == v.end()) v.push_back(job.target);
  }
  const FamilyReport report = report_family(out_root, plan.family, tiers);
  summary.files.insert(summary.files.end(), report.files.begin(), report.files.end());
  return summary;
}

}  // namespace patchpose::experiment
