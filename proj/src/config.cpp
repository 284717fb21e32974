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


#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace patchpose::experiment {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kYaw: return "yaw";
    case Family::kRoll: return "roll";
    case Family::kLoom: return "loom";
    case Family::kGrid: return "grid";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "yaw") return Family::kYaw;
  if (name == "roll") return Family::kRoll;
  if (name == "loom") return Family::kLoom;
  if (name == "grid") return Family::kGrid;
  throw ConfigError("unknown experiment family '" + std::string(name) +
                    "' (expected yaw, roll, loom or grid)");
}

namespace {

std::string num(double v) { return eval::format_double(v); }

double parse_number(std::string_view s, std::string_view id) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("malformed support id '" + std::string(id) + "'");
  }
  return v;
}

std::string angle_label(double v) { return "±" + num(v) + "°"; }

}  // namespace

std::string Support::id() const {
  return "y" + num(yaw_max) + "_r" + num(roll_max) + "_z" + num(z_lo) + "-" + num(z_hi);
}

std::string Support::label(Family family) const {
  switch (family) {
    case Family::kYaw: return angle_label(yaw_max);
    case Family::kRoll: return angle_label(roll_max);
    case Family::kLoom: return "[" + num(z_lo) + ", " + num(z_hi) + "]";
    case Family::kGrid: return angle_label(yaw_max) + " / " + angle_label(roll_max);
  }
  return id();
}

Support Support::from_id(std::string_view id) {
  // y<yaw>_r<roll>_z<lo>-<hi>
  const auto r = id.find("_r");
  const auto z = id.find("_z");
  if (id.empty() || id[0] != 'y' || r == std::string_view::npos || z == std::string_view::npos ||
      z < r) {
    throw ConfigError("malformed support id '" + std::string(id) + "'");
  }
  const std::string_view zs = id.substr(z + 2);
  const auto dash = zs.find('-', 1);
  if (dash == std::string_view::npos) {
    throw ConfigError("malformed support id '" + std::string(id) + "'");
  }
  Support s;
  s.yaw_max = parse_number(id.substr(1, r - 1), id);
  s.roll_max = parse_number(id.substr(r + 2, z - r - 2), id);
  s.z_lo = parse_number(zs.substr(0, dash), id);
  s.z_hi = parse_number(zs.substr(dash + 1), id);
  return s;
}

ExperimentConfig preset(std::string_view name) {
  ExperimentConfig c;
  c.yaw.supports = {{0, 0, 7, 7}, {20, 0, 7, 7}, {40, 0, 7, 7}, {60, 0, 7, 7}};
  c.yaw.alpha = -90.0;
  c.yaw.beta = 90.0;
  c.roll.supports = {{0, 0, 7, 7}, {0, 45, 7, 7}, {0, 90, 7, 7}, {0, 180, 7, 7}};
  c.roll.alpha = -180.0;
  c.roll.beta = 180.0;
  c.loom.supports = {{0, 0, 7, 7}, {0, 0, 6, 8}, {0, 0, 5, 9}, {0, 0, 4, 10}};
  c.loom.alpha = 2.0;
  c.loom.beta = 12.0;
  if (name == "desk") return c;
  if (name == "full") {
    c.preset = "full";
    c.out_dir = "runs/full";
    c.attack.n_batches = 200;
    c.images_per_point = 320;
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected desk or full)");
}

namespace {

json supports_json(const SweepSection& s, Family f) {
  json a = json::array();
  for (const Support& sup : s.supports) {
    if (f == Family::kYaw) a.push_back(sup.yaw_max);
    else if (f == Family::kRoll) a.push_back(sup.roll_max);
    else a.push_back(json::array({sup.z_lo, sup.z_hi}));
  }
  return a;
}

ordered_json sweep_json(const SweepSection& s, Family f) {
  ordered_json j;
  j["supports"] = supports_json(s, f);
  j["alpha"] = s.alpha;
  j["beta"] = s.beta;
  j["n_intervals"] = s.n_intervals;
  return j;
}

// Strict reader: every key must be known and of the declared type.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config " + (path.empty() ? std::string("/") : path) + ": " + what);
  }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string at(const char* key) const { return path_ + "/" + key; }

  void get(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(at(key), "expected an integer");
      const auto x = v->get<std::int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) fail(at(key), "integer out of range");
      out = static_cast<int>(x);
    }
  }
  void get(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(at(key), "expected a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void get(const char* key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(at(key), "expected a number");
      out = v->get<double>();
    }
  }
  void get(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void get(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(at(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename T>
  void get(const char* key, std::vector<T>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(at(key), "expected an array");
      std::vector<T> items;
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        const std::string p = at(key) + "/" + std::to_string(i);
        if constexpr (std::is_same_v<T, int>) {
          if (!e.is_number_integer()) fail(p, "expected an integer");
          items.push_back(e.get<int>());
        } else if constexpr (std::is_same_v<T, double>) {
          if (!e.is_number()) fail(p, "expected a number");
          items.push_back(e.get<double>());
        } else {
          if (!e.is_string()) fail(p, "expected a string");
          items.push_back(e.get<std::string>());
        }
      }
      out = std::move(items);
    }
  }
  void get_supports(const char* key, Family f, std::vector<Support>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) fail(at(key), "expected an array");
    std::vector<Support> items;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      const std::string p = at(key) + "/" + std::to_string(i);
      Support s;
      if (f == Family::kLoom) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
          fail(p, "expected a [z_lo, z_hi] pair");
        }
        s.z_lo = e[0].get<double>();
        s.z_hi = e[1].get<double>();
      } else {
        if (!e.is_number()) fail(p, "expected a number");
        (f == Family::kYaw ? s.yaw_max : s.roll_max) = e.get<double>();
      }
      items.push_back(s);
    }
    out = std::move(items);
  }
  Reader child(const char* key) {
    const json* v = find(key);
    static const json kEmpty = json::object();
    return Reader(v ? *v : kEmpty, at(key));
  }
  bool has(const char* key) const { return j_.contains(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(path_ + "/" + k, "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_sweep(Reader r, Family f, SweepSection& s) {
  r.get_supports("supports", f, s.supports);
  r.get("alpha", s.alpha);
  r.get("beta", s.beta);
  r.get("n_intervals", s.n_intervals);
  r.finish();
}

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) Reader::fail(path, what);
}

void validate_sweep(const SweepSection& s, Family f, const std::string& p) {
  require(!s.supports.empty(), p + "/supports", "need at least one support");
  for (std::size_t i = 0; i < s.supports.size(); ++i) {
    const Support& sup = s.supports[i];
    const std::string sp = p + "/supports/" + std::to_string(i);
    require(std::isfinite(sup.yaw_max) && sup.yaw_max >= 0.0, sp, "yaw support must be >= 0");
    require(std::isfinite(sup.roll_max) && sup.roll_max >= 0.0, sp, "roll support must be >= 0");
    require(sup.z_lo > 0.0 && sup.z_lo <= sup.z_hi && std::isfinite(sup.z_hi), sp,
            "need 0 < z_lo <= z_hi");
  }
  require(std::isfinite(s.alpha) && std::isfinite(s.beta) && s.alpha < s.beta, p,
          "need alpha < beta");
  require(f != Family::kLoom || s.alpha > 0.0, p + "/alpha", "loom range must be positive");
  require(s.n_intervals >= 1, p + "/n_intervals", "must be >= 1");
}

}  // namespace

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["schema_version"] = c.schema_version;
  j["preset"] = c.preset;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["fov_deg"] = c.fov_deg;
  j["dataset"] = {{"num_classes", c.dataset.num_classes},
                  {"image_size", c.dataset.image_size},
                  {"train_per_class", c.dataset.train_per_class},
                  {"val_per_class", c.dataset.val_per_class},
                  {"attack_per_class", c.dataset.attack_per_class},
                  {"eval_per_class", c.dataset.eval_per_class}};
  j["model"] = {{"epochs", c.model.epochs},
                {"learning_rate", c.model.learning_rate},
                {"momentum", c.model.momentum},
                {"batch_size", c.model.batch_size},
                {"min_val_accuracy", c.model.min_val_accuracy}};
  j["patch"] = {{"texture_size", c.patch.texture_size},
                {"side", c.patch.side},
                {"reference_depth", c.patch.reference_depth},
                {"randomize_location", c.patch.randomize_location}};
  j["attack"] = {{"n_batches", c.attack.n_batches}, {"batch_size", c.attack.batch_size},
                 {"step_size", c.attack.step_size}, {"beta1", c.attack.beta1},
                 {"beta2", c.attack.beta2},         {"epsilon", c.attack.epsilon}};
  j["targets"] = {{"tier_size", c.targets.tier_size},
                  {"rank_batches", c.targets.rank_batches},
                  {"rank_batch_size", c.targets.rank_batch_size},
                  {"rank_images", c.targets.rank_images},
                  {"min_rank_accuracy", c.targets.min_rank_accuracy},
                  {"run_tiers", c.targets.run_tiers},
                  {"high", c.targets.high},
                  {"mid", c.targets.mid},
                  {"low", c.targets.low}};
  j["images_per_point"] = c.images_per_point;
  j["yaw"] = sweep_json(c.yaw, Family::kYaw);
  j["roll"] = sweep_json(c.roll, Family::kRoll);
  j["loom"] = sweep_json(c.loom, Family::kLoom);
  j["grid"] = {{"yaw_supports", c.grid.yaw_supports}, {"roll_supports", c.grid.roll_supports},
               {"yaw_lo", c.grid.yaw_lo},             {"yaw_hi", c.grid.yaw_hi},
               {"roll_lo", c.grid.roll_lo},           {"roll_hi", c.grid.roll_hi},
               {"n_intervals", c.grid.n_intervals}};
  return j;
}

ExperimentConfig from_json(const json& j) {
  Reader r(j, "");
  std::string preset_name = "desk";
  r.get("preset", preset_name);
  ExperimentConfig c = preset(preset_name);
  r.get("schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    Reader::fail("/schema_version", "unsupported schema version " +
                                        std::to_string(c.schema_version) + " (expected " +
                                        std::to_string(kSchemaVersion) + ")");
  }
  r.get("seed", c.seed);
  r.get("out_dir", c.out_dir);
  r.get("fov_deg", c.fov_deg);
  {
    Reader d = r.child("dataset");
    d.get("num_classes", c.dataset.num_classes);
    d.get("image_size", c.dataset.image_size);
    d.get("train_per_class", c.dataset.train_per_class);
    d.get("val_per_class", c.dataset.val_per_class);
    d.get("attack_per_class", c.dataset.attack_per_class);
    d.get("eval_per_class", c.dataset.eval_per_class);
    d.finish();
  }
  {
    Reader m = r.child("model");
    m.get("epochs", c.model.epochs);
    m.get("learning_rate", c.model.learning_rate);
    m.get("momentum", c.model.momentum);
    m.get("batch_size", c.model.batch_size);
    m.get("min_val_accuracy", c.model.min_val_accuracy);
    m.finish();
  }
  {
    Reader p = r.child("patch");
    p.get("texture_size", c.patch.texture_size);
    p.get("side", c.patch.side);
    p.get("reference_depth", c.patch.reference_depth);
    p.get("randomize_location", c.patch.randomize_location);
    p.finish();
  }
  {
    Reader a = r.child("attack");
    a.get("n_batches", c.attack.n_batches);
    a.get("batch_size", c.attack.batch_size);
    a.get("step_size", c.attack.step_size);
    a.get("beta1", c.attack.beta1);
    a.get("beta2", c.attack.beta2);
    a.get("epsilon", c.attack.epsilon);
    a.finish();
  }
  {
    Reader t = r.child("targets");
    t.get("tier_size", c.targets.tier_size);
    t.get("rank_batches", c.targets.rank_batches);
    t.get("rank_batch_size", c.targets.rank_batch_size);
    t.get("rank_images", c.targets.rank_images);
    t.get("min_rank_accuracy", c.targets.min_rank_accuracy);
    t.get("run_tiers", c.targets.run_tiers);
    t.get("high", c.targets.high);
    t.get("mid", c.targets.mid);
    t.get("low", c.targets.low);
    t.finish();
  }
  r.get("images_per_point", c.images_per_point);
  read_sweep(r.child("yaw"), Family::kYaw, c.yaw);
  read_sweep(r.child("roll"), Family::kRoll, c.roll);
  read_sweep(r.child("loom"), Family::kLoom, c.loom);
  {
    Reader g = r.child("grid");
    g.get("yaw_supports", c.grid.yaw_supports);
    g.get("roll_supports", c.grid.roll_supports);
    g.get("yaw_lo", c.grid.yaw_lo);
    g.get("yaw_hi", c.grid.yaw_hi);
    g.get("roll_lo", c.grid.roll_lo);
    g.get("roll_hi", c.grid.roll_hi);
    g.get("n_intervals", c.grid.n_intervals);
    g.finish();
  }
  r.finish();
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  require(schema_version == kSchemaVersion, "/schema_version", "unsupported schema version");
  require(preset == "desk" || preset == "full", "/preset", "expected desk or full");
  require(!out_dir.empty(), "/out_dir", "must not be empty");
  require(fov_deg > 0.0 && fov_deg < 180.0, "/fov_deg", "need 0 < fov_deg < 180");
  const auto& d = dataset;
  require(d.num_classes >= 2 && d.num_classes <= 12, "/dataset/num_classes",
          "must lie in [2, 12]");
  require(d.image_size >= 8 && d.image_size % 4 == 0, "/dataset/image_size",
          "must be a multiple of 4 and >= 8");
  require(d.train_per_class > 0, "/dataset/train_per_class", "must be positive");
  require(d.val_per_class > 0, "/dataset/val_per_class", "must be positive");
  require(d.attack_per_class > 0, "/dataset/attack_per_class", "must be positive");
  require(d.eval_per_class > 0, "/dataset/eval_per_class", "must be positive");
  require(model.epochs >= 0, "/model/epochs", "must be >= 0");
  require(model.learning_rate >= 0.0, "/model/learning_rate", "must be >= 0");
  require(model.momentum >= 0.0 && model.momentum < 1.0, "/model/momentum",
          "must lie in [0, 1)");
  require(model.batch_size > 0, "/model/batch_size", "must be positive");
  require(model.min_val_accuracy >= 0.0 && model.min_val_accuracy <= 1.0,
          "/model/min_val_accuracy", "must lie in [0, 1]");
  require(patch.texture_size > 0, "/patch/texture_size", "must be positive");
  require(patch.side > 0.0, "/patch/side", "must be positive");
  require(patch.reference_depth > 0.0, "/patch/reference_depth", "must be positive");
  require(attack.n_batches >= 0, "/attack/n_batches", "must be >= 0");
  require(attack.batch_size > 0, "/attack/batch_size", "must be positive");
  require(attack.step_size > 0.0, "/attack/step_size", "must be positive");
  require(attack.beta1 >= 0.0 && attack.beta1 < 1.0, "/attack/beta1", "must lie in [0, 1)");
  require(attack.beta2 >= 0.0 && attack.beta2 < 1.0, "/attack/beta2", "must lie in [0, 1)");
  require(attack.epsilon > 0.0, "/attack/epsilon", "must be positive");
  const auto& t = targets;
  require(t.tier_size > 0 && 3 * t.tier_size <= d.num_classes, "/targets/tier_size",
          "need 0 < 3 * tier_size <= num_classes");
  require(t.rank_batches >= 0, "/targets/rank_batches", "must be >= 0");
  require(t.rank_batch_size > 0, "/targets/rank_batch_size", "must be positive");
  require(t.rank_images > 0, "/targets/rank_images", "must be positive");
  for (std::size_t i = 0; i < t.run_tiers.size(); ++i) {
    const auto& n = t.run_tiers[i];
    require(n == "high" || n == "mid" || n == "low", "/targets/run_tiers/" + std::to_string(i),
            "expected high, mid or low");
  }
  const bool explicit_tiers = !t.high.empty() || !t.mid.empty() || !t.low.empty();
  if (explicit_tiers) {
    std::set<int> seen;
    for (const auto* tier : {&t.high, &t.mid, &t.low}) {
      for (int c : *tier) {
        require(c >= 0 && c < d.num_classes, "/targets", "class id out of range");
        require(seen.insert(c).second, "/targets", "tiers must be disjoint");
      }
    }
  }
  require(images_per_point > 0, "/images_per_point", "must be positive");
  validate_sweep(yaw, Family::kYaw, "/yaw");
  validate_sweep(roll, Family::kRoll, "/roll");
  validate_sweep(loom, Family::kLoom, "/loom");
  require(!grid.yaw_supports.empty() && !grid.roll_supports.empty(), "/grid",
          "need yaw and roll supports");
  for (double v : grid.yaw_supports) require(v >= 0.0, "/grid/yaw_supports", "must be >= 0");
  for (double v : grid.roll_supports) require(v >= 0.0, "/grid/roll_supports", "must be >= 0");
  require(grid.yaw_lo < grid.yaw_hi, "/grid", "need yaw_lo < yaw_hi");
  require(grid.roll_lo < grid.roll_hi, "/grid", "need roll_lo < roll_hi");
  require(grid.n_intervals >= 1, "/grid/n_intervals", "must be >= 1");
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + what);
  }
  return from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

void set_field(ExperimentConfig& config, std::string_view pointer, std::string_view value) {
  json j = to_json(config);
  json v;
  try {
    v = json::parse(value.begin(), value.end());
  } catch (const json::parse_error&) {
    // Bare words are taken as strings, e.g. --set /out_dir=runs/x.
    v = std::string(value);
  }
  try {
    const json::json_pointer ptr{std::string(pointer)};
    if (!j.contains(ptr)) throw ConfigError("config " + std::string(pointer) + ": unknown field");
    j[ptr] = v;
  } catch (const json::exception& e) {
    throw ConfigError("config " + std::string(pointer) + ": " + e.what());
  }
  config = from_json(j);
}

std::vector<Support> family_supports(const ExperimentConfig& c, Family family) {
  switch (family) {
    case Family::kYaw: return c.yaw.supports;
    case Family::kRoll: return c.roll.supports;
    case Family::kLoom: return c.loom.supports;
    case Family::kGrid: {
      std::vector<Support> out;
      for (double y : c.grid.yaw_supports) {
        for (double r : c.grid.roll_supports) {
          out.push_back({y, r, c.patch.reference_depth, c.patch.reference_depth});
        }
      }
      return out;
    }
  }
  return {};
}

attack::AttackConfig attack_config(const ExperimentConfig& c, std::uint64_t seed) {
  attack::AttackConfig a;
  a.n_batches = c.attack.n_batches;
  a.batch_size = c.attack.batch_size;
  a.step_size = c.attack.step_size;
  a.beta1 = c.attack.beta1;
  a.beta2 = c.attack.beta2;
  a.epsilon = c.attack.epsilon;
  a.texture_size = c.patch.texture_size;
  a.seed = seed;
  return a;
}

attack::TransformDistribution distribution(const ExperimentConfig& c, const Support& s) {
  attack::TransformDistribution d;
  d.yaw_max_deg = s.yaw_max;
  d.roll_max_deg = s.roll_max;
  d.z_lo = s.z_lo;
  d.z_hi = s.z_hi;
  d.randomize_location = c.patch.randomize_location;
  d.side = c.patch.side;
  return d;
}

geometry::CameraIntrinsics intrinsics(const ExperimentConfig& c) {
  return geometry::intrinsics_from_fov(c.fov_deg, c.dataset.image_size, c.dataset.image_size);
}

eval::SweepSpec sweep_spec(const ExperimentConfig& c, Family family, std::uint64_t seed) {
  eval::SweepSpec s;
  const SweepSection* sec = nullptr;
  switch (family) {
    case Family::kYaw: s.kind = eval::ParamKind::kYaw; sec = &c.yaw; break;
    case Family::kRoll: s.kind = eval::ParamKind::kRoll; sec = &c.roll; break;
    case Family::kLoom: s.kind = eval::ParamKind::kLoom; sec = &c.loom; break;
    case Family::kGrid: throw std::invalid_argument("grid is not a sweep family");
  }
  s.alpha = sec->alpha;
  s.beta = sec->beta;
  s.n_intervals = sec->n_intervals;
  s.images_per_point = c.images_per_point;
  s.fixed.depth = c.patch.reference_depth;
  s.fixed.side = c.patch.side;
  s.randomize_location = c.patch.randomize_location;
  s.seed = seed;
  return s;
}

eval::GridSpec grid_spec(const ExperimentConfig& c, std::uint64_t seed) {
  eval::GridSpec g;
  g.yaw_lo = c.grid.yaw_lo;
  g.yaw_hi = c.grid.yaw_hi;
  g.roll_lo = c.grid.roll_lo;
  g.roll_hi = c.grid.roll_hi;
  g.n_intervals = c.grid.n_intervals;
  g.images_per_point = c.images_per_point;
  g.depth = c.patch.reference_depth;
  g.side = c.patch.side;
  g.randomize_location = c.patch.randomize_location;
  g.seed = seed;
  return g;
}

}  // namespace patchpose::experiment
