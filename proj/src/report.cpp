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


#include "report.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <tuple>

#include "csv.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "svg.hpp"

namespace patchpose::experiment {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kTierOrder{"high", "mid", "low"};

std::string tier_title(const std::string& t) {
  if (t.empty()) return t;
  std::string s = t;
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

auto support_key(const Support& s) {
  return std::make_tuple(s.yaw_max, s.roll_max, s.z_hi - s.z_lo, s.z_lo);
}

bool support_less(const Support& a, const Support& b) { return support_key(a) < support_key(b); }

Family family_of(eval::ParamKind k) {
  switch (k) {
    case eval::ParamKind::kYaw: return Family::kYaw;
    case eval::ParamKind::kRoll: return Family::kRoll;
    case eval::ParamKind::kLoom: return Family::kLoom;
  }
  return Family::kYaw;
}

std::string axis_label(eval::ParamKind k) {
  switch (k) {
    case eval::ParamKind::kYaw: return "yaw ψ (degrees)";
    case eval::ParamKind::kRoll: return "roll θ (degrees)";
    case eval::ParamKind::kLoom: return "loom z (world units)";
  }
  return "";
}

std::pair<double, double> support_interval(const Support& s, eval::ParamKind k) {
  switch (k) {
    case eval::ParamKind::kYaw: return {-s.yaw_max, s.yaw_max};
    case eval::ParamKind::kRoll: return {-s.roll_max, s.roll_max};
    case eval::ParamKind::kLoom: return {s.z_lo, s.z_hi};
  }
  return {0.0, 0.0};
}

std::string caption(Family f, double lo, double hi, int n) {
  const std::string range = "[" + eval::format_double(lo) + ", " + eval::format_double(hi) + "]";
  switch (f) {
    case Family::kYaw:
      return "mAST_ψ: yaw sweep over " + range + " degrees, " + std::to_string(n) + " intervals";
    case Family::kRoll:
      return "mAST_θ: roll sweep over " + range + " degrees, " + std::to_string(n) + " intervals";
    case Family::kLoom:
      return "mAST_z: loom sweep over " + range + ", " + std::to_string(n) + " intervals";
    case Family::kGrid:
      return "Mean success over the yaw x roll grid";
  }
  return "";
}

struct Entry {
  Support support;
  int target = 0;
  fs::path path;
};

std::vector<Entry> scan(const fs::path& dir) {
  std::vector<Entry> out;
  if (!fs::is_directory(dir)) return out;
  std::vector<fs::path> sub;
  for (const auto& d : fs::directory_iterator(dir)) {
    if (d.is_directory()) sub.push_back(d.path());
  }
  std::sort(sub.begin(), sub.end());
  for (const fs::path& d : sub) {
    const Support s = Support::from_id(d.filename().string());
    std::vector<fs::path> files;
    for (const auto& f : fs::directory_iterator(d)) {
      const std::string name = f.path().filename().string();
      if (f.is_regular_file() && name.rfind("class_", 0) == 0 && f.path().extension() == ".csv") {
        files.push_back(f.path());
      }
    }
    for (const fs::path& f : files) {
      const std::string stem = f.stem().string().substr(6);
      int target = 0;
      const auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), target);
      if (ec != std::errc() || ptr != stem.data() + stem.size()) {
        throw IoError("unexpected result file " + f.string());
      }
      out.push_back({s, target, f});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    if (support_key(a.support) != support_key(b.support)) return support_less(a.support, b.support);
    return a.target < b.target;
  });
  return out;
}

std::string svg_name(const std::string& s) { return s + ".svg"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = csv::open_out(path);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

plot::LinePlot curves_plot(const std::vector<TierCurve>& curves) {
  plot::LinePlot p;
  const TierCurve& first = curves.front();
  p.title = tier_title(first.tier) + " tier: " + std::string(eval::param_name(first.kind)) + " sweep";
  p.x_label = axis_label(first.kind);
  p.x_lo = first.phi.front();
  p.x_hi = first.phi.back();
  for (const TierCurve& c : curves) {
    p.series.push_back({c.support.label(family_of(c.kind)), c.phi, c.success,
                        support_interval(c.support, c.kind)});
    p.x_lo = std::min(p.x_lo, c.phi.front());
    p.x_hi = std::max(p.x_hi, c.phi.back());
  }
  return p;
}

plot::Heatmap grid_map(const std::string& title, const std::vector<double>& yaw,
                       const std::vector<double>& roll, const std::vector<double>& success,
                       std::optional<std::pair<double, double>> support) {
  plot::Heatmap m;
  m.title = title;
  m.x_label = "roll θ (degrees)";
  m.y_label = "yaw ψ (degrees)";
  m.x = roll;
  m.y = yaw;
  m.values = success;
  m.support = support;
  return m;
}

}  // namespace

// Tier-mean CSVs ---------------------------------------------------------------

void write_tier_curves_csv(const fs::path& path, const std::vector<TierCurve>& curves) {
  std::ofstream out = csv::open_out(path);
  out << kTierCurveHeader << '\n';
  for (const TierCurve& c : curves) {
    for (std::size_t i = 0; i < c.phi.size(); ++i) {
      out << eval::param_name(c.kind) << ',' << c.tier << ',' << c.support.id() << ','
          << eval::format_double(c.phi[i]) << ',' << eval::format_double(c.success[i]) << ','
          << c.n_images << ',' << c.seed << '\n';
    }
  }
}

std::vector<TierCurve> read_tier_curves_csv(const fs::path& path) {
  const csv::Rows rows = csv::read_rows(path, kTierCurveHeader, 7);
  std::vector<TierCurve> out;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    const auto& f = rows.rows[i];
    const int ln = rows.line_numbers[i];
    const auto fail = [&](const std::string& what) {
      throw IoError(path.string() + ": line " + std::to_string(ln) + ": " + what);
    };
    eval::ParamKind kind{};
    Support s;
    try {
      kind = eval::parse_param(f[0]);
      s = Support::from_id(f[2]);
    } catch (const std::exception& e) {
      fail(e.what());
    }
    if (f[1].empty()) fail("empty tier");
    if (out.empty() || out.back().tier != f[1] || !(out.back().support == s)) {
      TierCurve c;
      c.kind = kind;
      c.tier = f[1];
      c.support = s;
      c.n_images = csv::parse_number<int>(f[5], path, ln);
      c.seed = csv::parse_number<std::uint64_t>(f[6], path, ln);
      out.push_back(std::move(c));
    } else if (out.back().kind != kind) {
      fail("mixed param_kind within one curve");
    }
    out.back().phi.push_back(csv::parse_number<double>(f[3], path, ln));
    out.back().success.push_back(csv::parse_rate(f[4], path, ln));
  }
  for (const TierCurve& c : out) {
    if (c.phi.size() < 2) throw IoError(path.string() + ": a curve needs at least two rows");
    if (c.kind != out.front().kind) throw IoError(path.string() + ": curves of different kinds");
  }
  return out;
}

void write_tier_grid_csv(const fs::path& path, const TierGrid& g) {
  std::ofstream out = csv::open_out(path);
  out << kTierGridHeader << '\n';
  for (std::size_t i = 0; i < g.yaw.size(); ++i) {
    for (std::size_t j = 0; j < g.roll.size(); ++j) {
      out << eval::format_double(g.yaw[i]) << ',' << eval::format_double(g.roll[j]) << ','
          << g.tier << ',' << g.support.id() << ','
          << eval::format_double(g.success[i * g.roll.size() + j]) << ',' << g.n_images << ','
          << g.seed << '\n';
    }
  }
}

TierGrid read_tier_grid_csv(const fs::path& path) {
  const csv::Rows rows = csv::read_rows(path, kTierGridHeader, 7);
  TierGrid g;
  for (std::size_t i = 0; i < rows.rows.size(); ++i) {
    const auto& f = rows.rows[i];
    const int ln = rows.line_numbers[i];
    const double yaw = csv::parse_number<double>(f[0], path, ln);
    const double roll = csv::parse_number<double>(f[1], path, ln);
    if (g.yaw.empty() || g.yaw.back() != yaw) g.yaw.push_back(yaw);
    if (g.yaw.size() == 1) g.roll.push_back(roll);
    try {
      if (i == 0) g.support = Support::from_id(f[3]);
    } catch (const std::exception& e) {
      throw IoError(path.string() + ": line " + std::to_string(ln) + ": " + e.what());
    }
    g.tier = f[2];
    g.success.push_back(csv::parse_rate(f[4], path, ln));
    g.n_images = csv::parse_number<int>(f[5], path, ln);
    g.seed = csv::parse_number<std::uint64_t>(f[6], path, ln);
  }
  if (g.yaw.size() < 2 || g.roll.size() < 2 || g.yaw.size() * g.roll.size() != g.success.size()) {
    throw IoError(path.string() + ": grid rows do not form a full yaw x roll lattice");
  }
  return g;
}

double grid_area(const std::vector<double>& yaw, const std::vector<double>& roll,
                 const std::vector<double>& success) {
  if (yaw.size() < 2 || roll.size() < 2 || success.size() != yaw.size() * roll.size()) {
    throw std::invalid_argument("grid_area needs a full lattice of at least 2 x 2");
  }
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < yaw.size(); ++i) {
    for (std::size_t j = 0; j + 1 < roll.size(); ++j) {
      const auto s = [&](std::size_t a, std::size_t b) { return success[a * roll.size() + b]; };
      area += 0.25 * (s(i, j) + s(i + 1, j) + s(i, j + 1) + s(i + 1, j + 1)) *
              (yaw[i + 1] - yaw[i]) * (roll[j + 1] - roll[j]);
    }
  }
  return area / ((yaw.back() - yaw.front()) * (roll.back() - roll.front()));
}

// Tables -----------------------------------------------------------------------

std::optional<double> ReportTable::at(std::string_view tier, const Support& s) const {
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] != tier) continue;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] == s) return values[r][c];
    }
  }
  return std::nullopt;
}

std::string ReportTable::markdown() const {
  std::string s = "# " + caption + "\n\n| Tier |";
  for (const Support& c : columns) s += " " + c.label(family) + " |";
  s += "\n|:--|";
  for (std::size_t c = 0; c < columns.size(); ++c) s += "--:|";
  s += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    s += "| " + tier_title(rows[r]) + " |";
    for (const auto& v : values[r]) {
      if (v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", *v);
        s += std::string(" ") + buf + " |";
      } else {
        s += " - |";
      }
    }
    s += "\n";
  }
  return s;
}

FamilyReport report_family(const fs::path& out_root, Family family, const data::TargetTiers& tiers) {
  const fs::path dir = family_dir(out_root, family);
  const bool grid = family == Family::kGrid;
  const std::vector<Entry> entries = scan(dir / (grid ? "grids" : "sweeps"));
  if (entries.empty()) {
    throw IoError("no " + std::string(grid ? "grid" : "sweep") + " results under " + dir.string() +
                  "; run the " + std::string(family_name(family)) + " experiment first");
  }

  FamilyReport rep;
  ReportTable& table = rep.table;
  table.family = family;
  for (const Entry& e : entries) {
    if (table.columns.empty() || !(table.columns.back() == e.support)) table.columns.push_back(e.support);
  }
  for (const std::string& t : kTierOrder) {
    for (const Entry& e : entries) {
      if (tier_of(tiers, e.target) == t) {
        table.rows.push_back(t);
        break;
      }
    }
  }
  table.values.assign(table.rows.size(),
                      std::vector<std::optional<double>>(table.columns.size()));

  if (!grid) {
    std::vector<eval::SweepResult> sweeps;
    for (const Entry& e : entries) sweeps.push_back(eval::read_sweep_csv(e.path));
    table.caption = caption(family, sweeps.front().phi.front(), sweeps.front().phi.back(),
                            static_cast<int>(sweeps.front().phi.size()) - 1);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (family_of(sweeps[i].spec.kind) != family) {
        throw IoError(entries[i].path.string() + ": not a " + std::string(family_name(family)) + " sweep");
      }
      rep.mast_rows.push_back({entries[i].target, tier_of(tiers, entries[i].target),
                               entries[i].support.id(), eval::normalized_area(sweeps[i])});
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      std::vector<TierCurve> tier_curves;
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        std::vector<eval::SweepResult> members;
        for (std::size_t i = 0; i < entries.size(); ++i) {
          if (entries[i].support == table.columns[c] && tier_of(tiers, entries[i].target) == table.rows[r]) {
            members.push_back(sweeps[i]);
          }
        }
        if (members.empty()) continue;
        table.values[r][c] = eval::mast(members).value;
        const eval::SweepResult mean = eval::mean_curve(members);
        tier_curves.push_back({mean.spec.kind, table.rows[r], table.columns[c], mean.phi,
                               mean.success, mean.spec.images_per_point, mean.spec.seed});
      }
      const fs::path curve_csv = dir / "curves" / ("tier_" + table.rows[r] + ".csv");
      write_tier_curves_csv(curve_csv, tier_curves);
      const fs::path svg = dir / "plots" / svg_name("tier_" + table.rows[r]);
      write_text(svg, plot::render_line_plot(curves_plot(tier_curves)));
      rep.files.push_back(curve_csv);
      rep.files.push_back(svg);
      rep.curves.insert(rep.curves.end(), tier_curves.begin(), tier_curves.end());
    }
    const fs::path mast_csv = dir / "mast.csv";
    eval::write_mast_csv(mast_csv, rep.mast_rows);
    rep.files.push_back(mast_csv);
  } else {
    std::vector<eval::GridResult> grids;
    for (const Entry& e : entries) grids.push_back(eval::read_grid_csv(e.path));
    table.caption = caption(family, 0, 0, 0);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        TierGrid mean;
        int members = 0;
        for (std::size_t i = 0; i < entries.size(); ++i) {
          if (!(entries[i].support == table.columns[c]) || tier_of(tiers, entries[i].target) != table.rows[r]) {
            continue;
          }
          const eval::GridResult& g = grids[i];
          if (members == 0) {
            mean.tier = table.rows[r];
            mean.support = table.columns[c];
            mean.yaw = g.yaw;
            mean.roll = g.roll;
            mean.success.assign(g.success.size(), 0.0);
            mean.n_images = g.spec.images_per_point;
            mean.seed = g.spec.seed;
          } else if (g.yaw != mean.yaw || g.roll != mean.roll) {
            throw IoError(entries[i].path.string() + ": grid lattice differs from its tier");
          }
          for (std::size_t k = 0; k < g.success.size(); ++k) mean.success[k] += g.success[k];
          ++members;
        }
        if (members == 0) continue;
        for (double& v : mean.success) v /= members;
        table.values[r][c] = grid_area(mean.yaw, mean.roll, mean.success);
        const std::string stem = table.columns[c].id() + "_" + table.rows[r];
        const fs::path csv_path = dir / "curves" / (stem + ".csv");
        write_tier_grid_csv(csv_path, mean);
        const fs::path svg = dir / "plots" / svg_name(stem);
        write_text(svg, plot::render_heatmap(grid_map(
                            tier_title(table.rows[r]) + " tier, trained on " +
                                table.columns[c].label(Family::kGrid),
                            mean.yaw, mean.roll, mean.success,
                            std::pair{mean.support.roll_max, mean.support.yaw_max})));
        rep.files.push_back(csv_path);
        rep.files.push_back(svg);
        rep.grids.push_back(std::move(mean));
      }
    }
  }
  const fs::path md = dir / "table.md";
  write_text(md, table.markdown());
  rep.files.push_back(md);
  return rep;
}

// CSV dispatch -------------------------------------------------------------------

CsvKind csv_kind(const fs::path& path) {
  const std::string h = csv::first_line(path);
  if (h == eval::kSweepHeader) return CsvKind::kSweep;
  if (h == eval::kGridHeader) return CsvKind::kGrid;
  if (h == eval::kMastHeader) return CsvKind::kMast;
  if (h == kTierCurveHeader) return CsvKind::kTierCurve;
  if (h == kTierGridHeader) return CsvKind::kTierGrid;
  throw IoError(path.string() + ": line 1: unrecognized header '" + h + "'");
}

void validate_csv(const fs::path& path) {
  switch (csv_kind(path)) {
    case CsvKind::kSweep: eval::read_sweep_csv(path); break;
    case CsvKind::kGrid: eval::read_grid_csv(path); break;
    case CsvKind::kMast: eval::read_mast_csv(path); break;
    case CsvKind::kTierCurve: read_tier_curves_csv(path); break;
    case CsvKind::kTierGrid: read_tier_grid_csv(path); break;
  }
}

fs::path plot_csv(const fs::path& csv_path, const fs::path& out_dir) {
  std::string svg;
  switch (csv_kind(csv_path)) {
    case CsvKind::kSweep: {
      const eval::SweepResult r = eval::read_sweep_csv(csv_path);
      plot::LinePlot p;
      p.title = std::string(eval::param_name(r.spec.kind)) + " sweep, target class " +
                std::to_string(r.target_class);
      p.x_label = axis_label(r.spec.kind);
      p.x_lo = r.phi.front();
      p.x_hi = r.phi.back();
      p.series.push_back({"class " + std::to_string(r.target_class), r.phi, r.success, std::nullopt});
      svg = plot::render_line_plot(p);
      break;
    }
    case CsvKind::kTierCurve:
      svg = plot::render_line_plot(curves_plot(read_tier_curves_csv(csv_path)));
      break;
    case CsvKind::kGrid: {
      const eval::GridResult g = eval::read_grid_csv(csv_path);
      svg = plot::render_heatmap(grid_map("target class " + std::to_string(g.target_class), g.yaw,
                                          g.roll, g.success, std::nullopt));
      break;
    }
    case CsvKind::kTierGrid: {
      const TierGrid g = read_tier_grid_csv(csv_path);
      svg = plot::render_heatmap(grid_map(tier_title(g.tier) + " tier, trained on " +
                                              g.support.label(Family::kGrid),
                                          g.yaw, g.roll, g.success,
                                          std::pair{g.support.roll_max, g.support.yaw_max}));
      break;
    }
    case CsvKind::kMast:
      throw IoError(csv_path.string() + ": mAST tables are not plotted; use the report command");
  }
  // Per-class result files share stems across supports; keep them apart.
  std::string stem = csv_path.stem().string();
  if (stem.rfind("class_", 0) == 0 && csv_path.has_parent_path()) {
    stem = csv_path.parent_path().filename().string() + "_" + stem;
  }
  const fs::path out = out_dir / svg_name(stem);
  write_text(out, svg);
  return out;
}

}  // namespace patchpose::experiment
