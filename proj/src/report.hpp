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


#ifndef PATCHPOSE_REPORT_HPP_
#define PATCHPOSE_REPORT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "evaluation.hpp"
#include "targets.hpp"

namespace patchpose::experiment {

inline constexpr std::string_view kTierCurveHeader =
    "param_kind,tier,train_support,phi,success_rate,n_images,seed";
inline constexpr std::string_view kTierGridHeader =
    "yaw,roll,tier,train_support,success_rate,n_images,seed";

/// Class-mean sweep of one tier at one training support.
struct TierCurve {
  eval::ParamKind kind = eval::ParamKind::kYaw;
  std::string tier;
  Support support;
  std::vector<double> phi;
  std::vector<double> success;
  int n_images = 0;
  std::uint64_t seed = 0;
};

struct TierGrid {
  std::string tier;
  Support support;
  std::vector<double> yaw;
  std::vector<double> roll;
  std::vector<double> success;
  int n_images = 0;
  std::uint64_t seed = 0;
};

void write_tier_curves_csv(const std::filesystem::path& path, const std::vector<TierCurve>& curves);
std::vector<TierCurve> read_tier_curves_csv(const std::filesystem::path& path);
void write_tier_grid_csv(const std::filesystem::path& path, const TierGrid& grid);
TierGrid read_tier_grid_csv(const std::filesystem::path& path);

/// Rows are tiers, columns are training supports, as in the result tables.
struct ReportTable {
  Family family = Family::kYaw;
  std::string caption;
  std::vector<Support> columns;
  std::vector<std::string> rows;
  std::vector<std::vector<std::optional<double>>> values;

  std::optional<double> at(std::string_view tier, const Support& s) const;
  std::string markdown() const;
};

struct FamilyReport {
  ReportTable table;
  std::vector<eval::MastRow> mast_rows;
  std::vector<TierCurve> curves;
  std::vector<TierGrid> grids;
  std::vector<std::filesystem::path> files;
};

/// Aggregates the per-patch CSVs under <out_root>/<family>/ into mast.csv
/// (sweep families), tier-mean CSVs, table.md and SVG plots.
FamilyReport report_family(const std::filesystem::path& out_root, Family family,
                           const data::TargetTiers& tiers);

/// Normalized trapezoidal area of a grid over its yaw x roll rectangle.
double grid_area(const std::vector<double>& yaw, const std::vector<double>& roll,
                 const std::vector<double>& success);

enum class CsvKind { kSweep, kGrid, kMast, kTierCurve, kTierGrid };
/// Identifies a CSV by its header line; throws IoError otherwise.
CsvKind csv_kind(const std::filesystem::path& path);
/// Full schema check of any CSV this library writes.
void validate_csv(const std::filesystem::path& path);

/// One SVG per input CSV, named <stem>.svg in out_dir (<parent>_<stem>.svg
/// for per-class files named class_<c>.csv). Throws before
/// writing anything when the CSV is malformed.
std::filesystem::path plot_csv(const std::filesystem::path& csv, const std::filesystem::path& out_dir);

}  // namespace patchpose::experiment

#endif  // PATCHPOSE_REPORT_HPP_
