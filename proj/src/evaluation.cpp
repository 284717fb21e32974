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

#include "evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "render.hpp"

namespace patchpose::eval {

std::string_view param_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::kYaw: return "yaw";
    case ParamKind::kRoll: return "roll";
    case ParamKind::kLoom: return "loom";
  }
  return "unknown";
}

ParamKind parse_param(std::string_view name) {
  if (name == "yaw") return ParamKind::kYaw;
  if (name == "roll") return ParamKind::kRoll;
  if (name == "loom") return ParamKind::kLoom;
  throw std::invalid_argument("unknown transformation parameter '" + std::string(name) + "'");
}

void SweepSpec::validate() const {
  if (!(alpha < beta)) throw std::invalid_argument("sweep range needs alpha < beta");
  if (n_intervals < 1) throw std::invalid_argument("sweep needs at least one interval");
  if (images_per_point < 1) throw std::invalid_argument("sweep needs at least one image per point");
  if (kind == ParamKind::kLoom && !(alpha > 0.0)) throw std::invalid_argument("loom range must be positive");
}

geometry::PatchPlacement SweepSpec::placement_at(double phi) const {
  geometry::PatchPlacement p = fixed;
  switch (kind) {
    case ParamKind::kYaw: p.yaw_deg = phi; break;
    case ParamKind::kRoll: p.roll_deg = phi; break;
    case ParamKind::kLoom: p.depth = phi; break;
  }
  return p;
}

void GridSpec::validate() const {
  if (!(yaw_lo < yaw_hi) || !(roll_lo < roll_hi)) throw std::invalid_argument("grid ranges need lo < hi");
  if (n_intervals < 1 || images_per_point < 1) throw std::invalid_argument("invalid grid sampling");
  if (!(depth > 0.0) || !(side > 0.0)) throw std::invalid_argument("invalid grid depth or side");
}

EvalPool::EvalPool(const model::TinyConvNet& net, const data::Dataset& scenes,
                   const geometry::CameraIntrinsics& k)
    : net_(net), scenes_(scenes), k_(k), clean_(scenes.size()) {
  if (scenes.empty()) throw std::invalid_argument("evaluation pool is empty");
  for (auto& c : clean_) c.store(-1);
}

int EvalPool::clean_prediction(std::size_t scene) const {
  int cached = clean_[scene].load();
  if (cached < 0) {
    cached = model::predict(net_, scenes_.items[scene].image);
    clean_[scene].store(cached);
  }
  return cached;
}

double success_rate(const render::PatchTexture& texture, int target, const EvalPool& pool,
                    std::span<const std::size_t> scene_indices,
                    const geometry::PatchPlacement& placement, bool randomize_location, Rng& rng) {
  if (scene_indices.empty()) throw std::invalid_argument("success_rate needs at least one scene");
  std::vector<geometry::PatchPlacement> placements(scene_indices.size(), placement);
  if (randomize_location) {
    for (auto& p : placements) p = attack::randomize_location(placement, pool.intrinsics(), rng);
  }
  std::vector<unsigned char> hit(scene_indices.size(), 0);
  parallel_for(scene_indices.size(), [&](std::size_t i) {
    const std::size_t s = scene_indices[i];
    const auto applied =
        render::apply_patch(texture, placements[i], pool.intrinsics(), pool.scenes().items[s].image);
    const int pred = applied.rendered ? model::predict(pool.net(), applied.image) : pool.clean_prediction(s);
    hit[i] = pred == target ? 1 : 0;
  });
  pool.count(scene_indices.size());
  const std::size_t hits = std::accumulate(hit.begin(), hit.end(), std::size_t{0});
  return static_cast<double>(hits) / static_cast<double>(scene_indices.size());
}

namespace {

std::uint64_t pose_key(double v) {
  return static_cast<std::uint64_t>(std::llround(v * 1e6));
}

std::vector<std::size_t> draw_scenes(std::size_t pool, int images, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(images));
  if (static_cast<std::size_t>(images) <= pool) {
    std::vector<std::size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < images; ++i) {
      const std::size_t j = static_cast<std::size_t>(i) + uniform_index(rng, pool - i);
      std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
      out.push_back(idx[static_cast<std::size_t>(i)]);
    }
  } else {
    for (int i = 0; i < images; ++i) out.push_back(uniform_index(rng, pool));
  }
  return out;
}

}  // namespace

double success_at_pose(const render::PatchTexture& texture, int target, const EvalPool& pool,
                       const geometry::PatchPlacement& placement, int images,
                       bool randomize_location, std::uint64_t seed) {
  Rng rng = make_stream({seed, name_key("eval-pose"), pose_key(placement.yaw_deg),
                         pose_key(placement.roll_deg), pose_key(placement.depth),
                         pose_key(placement.side)});
  const auto scenes = draw_scenes(pool.scenes().size(), images, rng);
  return success_rate(texture, target, pool, scenes, placement, randomize_location, rng);
}

SweepResult run_sweep(const attack::Patch& patch, const EvalPool& pool, const SweepSpec& spec) {
  spec.validate();
  SweepResult r;
  r.spec = spec;
  r.target_class = patch.target;
  for (int i = 0; i <= spec.n_intervals; ++i) {
    const double phi = spec.point(i);
    r.phi.push_back(phi);
    r.success.push_back(success_at_pose(patch.texture, patch.target, pool, spec.placement_at(phi),
                                        spec.images_per_point, spec.randomize_location, spec.seed));
  }
  return r;
}

GridResult run_grid(const attack::Patch& patch, const EvalPool& pool, const GridSpec& spec) {
  spec.validate();
  GridResult r;
  r.spec = spec;
  r.target_class = patch.target;
  const int n = spec.n_intervals;
  for (int i = 0; i <= n; ++i) {
    r.yaw.push_back(spec.yaw_lo + (spec.yaw_hi - spec.yaw_lo) * i / n);
    r.roll.push_back(spec.roll_lo + (spec.roll_hi - spec.roll_lo) * i / n);
  }
  for (double yaw : r.yaw) {
    for (double roll : r.roll) {
      geometry::PatchPlacement p;
      p.yaw_deg = yaw;
      p.roll_deg = roll;
      p.depth = spec.depth;
      p.side = spec.side;
      r.success.push_back(success_at_pose(patch.texture, patch.target, pool, p,
                                          spec.images_per_point, spec.randomize_location, spec.seed));
    }
  }
  return r;
}

double normalized_area(const SweepResult& result) {
  const std::size_t n = result.success.size();
  if (n < 2 || result.phi.size() != n) throw std::invalid_argument("sweep needs at least two points");
  // Accumulated as deviations from the first sample so a constant curve
  // comes out exactly.
  const double base = result.success.front();
  const double width = result.phi.back() - result.phi.front();
  double dev = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double mid = 0.5 * (result.success[i] + result.success[i + 1]) - base;
    dev += mid * ((result.phi[i + 1] - result.phi[i]) / width);
  }
  return base + dev;
}

namespace {

bool same_sampling(const SweepResult& a, const SweepResult& b) {
  return a.spec.kind == b.spec.kind && a.spec.alpha == b.spec.alpha && a.spec.beta == b.spec.beta &&
         a.spec.n_intervals == b.spec.n_intervals && a.phi == b.phi;
}

}  // namespace

MastReport mast(std::span<const SweepResult> results) {
  if (results.empty()) throw std::invalid_argument("mast needs at least one sweep");
  MastReport report;
  report.spec = results.front().spec;
  for (const SweepResult& r : results) {
    if (!same_sampling(r, results.front())) {
      throw std::invalid_argument("mast: sweeps do not share one specification");
    }
    report.classes.push_back(r.target_class);
    report.per_class.push_back(normalized_area(r));
  }
  // Summing in sorted order makes the mean independent of input order.
  std::vector<double> sorted = report.per_class;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double a : sorted) sum += a;
  report.value = sum / static_cast<double>(results.size());
  return report;
}

SweepResult mean_curve(std::span<const SweepResult> results) {
  if (results.empty()) throw std::invalid_argument("mean_curve needs at least one sweep");
  SweepResult out = results.front();
  out.target_class = -1;
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (!same_sampling(results[r], out)) throw std::invalid_argument("mean_curve: mismatched sweeps");
    for (std::size_t i = 0; i < out.success.size(); ++i) out.success[i] += results[r].success[i];
  }
  for (double& s : out.success) s /= static_cast<double>(results.size());
  return out;
}

// CSV ------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

using csv::open_out;
using csv::parse_number;
using csv::read_rows;

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result) {
  std::ofstream out = open_out(path);
  out << kSweepHeader << '\n';
  for (std::size_t i = 0; i < result.phi.size(); ++i) {
    out << param_name(result.spec.kind) << ',' << result.target_class << ','
        << format_double(result.phi[i]) << ',' << format_double(result.success[i]) << ','
        << result.spec.images_per_point << ',' << result.spec.seed << '\n';
  }
}

void write_grid_csv(const std::filesystem::path& path, const GridResult& result) {
  std::ofstream out = open_out(path);
  out << kGridHeader << '\n';
  for (std::size_t i = 0; i < result.yaw.size(); ++i) {
    for (std::size_t j = 0; j < result.roll.size(); ++j) {
      out << format_double(result.yaw[i]) << ',' << format_double(result.roll[j]) << ','
          << result.target_class << ',' << format_double(result.at(i, j)) << ','
          << result.spec.images_per_point << ',' << result.spec.seed << '\n';
    }
  }
}

void write_mast_csv(const std::filesystem::path& path, std::span<const MastRow> rows) {
  std::ofstream out = open_out(path);
  out << kMastHeader << '\n';
  for (const MastRow& r : rows) {
    out << r.target_class << ',' << r.tier << ',' << r.train_support << ',' << format_double(r.mast)
        << '\n';
  }
}

SweepResult read_sweep_csv(const std::filesystem::path& path) {
  const csv::Rows csv = read_rows(path, kSweepHeader, 6);
  SweepResult r;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& f = csv.rows[i];
    const int ln = csv.line_numbers[i];
    ParamKind kind;
    try {
      kind = parse_param(f[0]);
    } catch (const std::invalid_argument&) {
      throw IoError(path.string() + ": line " + std::to_string(ln) + ": unknown param_kind '" + f[0] + "'");
    }
    const int target = parse_number<int>(f[1], path, ln);
    const int images = parse_number<int>(f[4], path, ln);
    const auto seed = parse_number<std::uint64_t>(f[5], path, ln);
    if (i == 0) {
      r.spec.kind = kind;
      r.target_class = target;
      r.spec.images_per_point = images;
      r.spec.seed = seed;
    } else if (kind != r.spec.kind || target != r.target_class) {
      throw IoError(path.string() + ": line " + std::to_string(ln) + ": mixed sweeps in one file");
    }
    r.phi.push_back(parse_number<double>(f[2], path, ln));
    const double s = parse_number<double>(f[3], path, ln);
    if (!(s >= 0.0 && s <= 1.0)) {
      throw IoError(path.string() + ": line " + std::to_string(ln) + ": success_rate outside [0,1]");
    }
    r.success.push_back(s);
  }
  if (r.phi.size() < 2) throw IoError(path.string() + ": a sweep needs at least two rows");
  r.spec.alpha = r.phi.front();
  r.spec.beta = r.phi.back();
  r.spec.n_intervals = static_cast<int>(r.phi.size()) - 1;
  return r;
}

GridResult read_grid_csv(const std::filesystem::path& path) {
  const csv::Rows csv = read_rows(path, kGridHeader, 6);
  GridResult r;
  std::vector<double> yaws, rolls;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& f = csv.rows[i];
    const int ln = csv.line_numbers[i];
    const double yaw = parse_number<double>(f[0], path, ln);
    const double roll = parse_number<double>(f[1], path, ln);
    if (yaws.empty() || yaws.back() != yaw) yaws.push_back(yaw);
    if (yaws.size() == 1) rolls.push_back(roll);
    r.target_class = parse_number<int>(f[2], path, ln);
    const double s = parse_number<double>(f[3], path, ln);
    if (!(s >= 0.0 && s <= 1.0)) {
      throw IoError(path.string() + ": line " + std::to_string(ln) + ": success_rate outside [0,1]");
    }
    r.success.push_back(s);
    r.spec.images_per_point = parse_number<int>(f[4], path, ln);
    r.spec.seed = parse_number<std::uint64_t>(f[5], path, ln);
  }
  if (yaws.size() * rolls.size() != r.success.size() || yaws.size() < 2 || rolls.size() < 2) {
    throw IoError(path.string() + ": grid rows do not form a full yaw x roll lattice");
  }
  r.yaw = yaws;
  r.roll = rolls;
  r.spec.yaw_lo = yaws.front();
  r.spec.yaw_hi = yaws.back();
  r.spec.roll_lo = rolls.front();
  r.spec.roll_hi = rolls.back();
  r.spec.n_intervals = static_cast<int>(yaws.size()) - 1;
  return r;
}

std::vector<MastRow> read_mast_csv(const std::filesystem::path& path) {
  const csv::Rows csv = read_rows(path, kMastHeader, 4);
  std::vector<MastRow> rows;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& f = csv.rows[i];
    const int ln = csv.line_numbers[i];
    MastRow row;
    row.target_class = parse_number<int>(f[0], path, ln);
    row.tier = f[1];
    row.train_support = f[2];
    row.mast = csv::parse_rate(f[3], path, ln);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace patchpose::eval
