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


#ifndef PATCHPOSE_SVG_HPP_
#define PATCHPOSE_SVG_HPP_

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace patchpose::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  /// Training-support interval drawn as a translucent band.
  std::optional<std::pair<double, double>> shade;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label = "attack success";
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::vector<Series> series;
};

/// Rows follow `y`, columns follow `x`; values[i * x.size() + j].
struct Heatmap {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> values;
  /// Training support as (x half-width, y half-width) around the origin.
  std::optional<std::pair<double, double>> support;
};

/// Success in [0, 1] on the y axis. Deterministic text output.
std::string render_line_plot(const LinePlot& plot);
/// White (0) to red (1) cells.
std::string render_heatmap(const Heatmap& map);

std::string xml_escape(const std::string& s);

}  // namespace patchpose::plot

#endif  // PATCHPOSE_SVG_HPP_
