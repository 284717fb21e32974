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


#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace patchpose::plot {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 56.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (std::abs(v - std::round(v)) < 1e-9) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.2g", v);
  }
  return buf;
}

std::string header(const std::string& title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
       fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
       xml_escape(title) + "</text>\n";
  return s;
}

// Ticks at a "nice" step giving roughly `target` intervals.
std::vector<double> ticks(double lo, double hi, int target) {
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  std::vector<double> out;
  for (double t = std::ceil(lo / step - 1e-9) * step; t <= hi + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 ? 0.0 : t);
  }
  return out;
}

void axes(std::string& s, double x_lo, double x_hi, double y_lo, double y_hi,
          const std::string& x_label, const std::string& y_label) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  s += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(pw) +
       "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(x_lo, x_hi, 6)) {
    const double x = kLeft + (t - x_lo) / (x_hi - x_lo) * pw;
    s += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(kTop + ph) + "\" x2=\"" + fmt(x) +
         "\" y2=\"" + fmt(kTop + ph + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         tick_label(t) + "</text>\n";
  }
  for (double t : ticks(y_lo, y_hi, 5)) {
    const double y = kTop + ph - (t - y_lo) / (y_hi - y_lo) * ph;
    s += "<line x1=\"" + fmt(kLeft - 5) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(kLeft) +
         "\" y2=\"" + fmt(y) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(y + 4) + "\" text-anchor=\"end\">" +
         tick_label(t) + "</text>\n";
  }
  s += "<text x=\"" + fmt(kLeft + pw / 2) + "\" y=\"" + fmt(kHeight - 14) +
       "\" text-anchor=\"middle\">" + xml_escape(x_label) + "</text>\n";
  s += "<text x=\"16\" y=\"" + fmt(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fmt(kTop + ph / 2) + ")\">" + xml_escape(y_label) + "</text>\n";
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_line_plot(const LinePlot& p) {
  if (!(p.x_lo < p.x_hi)) throw std::invalid_argument("plot needs x_lo < x_hi");
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (std::clamp(x, p.x_lo, p.x_hi) - p.x_lo) / (p.x_hi - p.x_lo) * pw; };
  auto py = [&](double y) { return kTop + ph - std::clamp(y, 0.0, 1.0) * ph; };

  std::string s = header(p.title);
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& shade = p.series[k].shade;
    if (!shade) continue;
    const double x0 = px(shade->first);
    const double x1 = px(shade->second);
    s += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(std::max(x1 - x0, 1.0)) +
         "\" height=\"" + fmt(ph) + "\" fill=\"" + kPalette[k % 8] + "\" fill-opacity=\"0.08\"/>\n";
  }
  axes(s, p.x_lo, p.x_hi, 0.0, 1.0, p.x_label, p.y_label);
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const Series& ser = p.series[k];
    if (ser.x.size() != ser.y.size()) throw std::invalid_argument("series x/y length mismatch");
    std::string pts;
    for (std::size_t i = 0; i < ser.x.size(); ++i) {
      if (i) pts += ' ';
      pts += fmt(px(ser.x[i])) + "," + fmt(py(ser.y[i]));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[k % 8]) +
         "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
    const double ly = kTop + 10 + 18.0 * k;
    const double lx = kWidth - kRight + 14;
    s += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 22) + "\" y2=\"" +
         fmt(ly) + "\" stroke=\"" + kPalette[k % 8] + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt(lx + 28) + "\" y=\"" + fmt(ly + 4) + "\">" + xml_escape(ser.label) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string render_heatmap(const Heatmap& m) {
  if (m.x.empty() || m.y.empty() || m.values.size() != m.x.size() * m.y.size()) {
    throw std::invalid_argument("heatmap dimensions do not match its values");
  }
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  // Cells centred on the sample points.
  const auto edges = [](const std::vector<double>& v) {
    if (v.size() == 1) return std::pair{v[0] - 0.5, v[0] + 0.5};
    const double h = (v.back() - v.front()) / (v.size() - 1) / 2;
    return std::pair{v.front() - h, v.back() + h};
  };
  const auto [x_lo, x_hi] = edges(m.x);
  const auto [y_lo, y_hi] = edges(m.y);
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - y_lo) / (y_hi - y_lo) * ph; };
  const double cw = pw / m.x.size();
  const double ch = ph / m.y.size();

  std::string s = header(m.title);
  for (std::size_t i = 0; i < m.y.size(); ++i) {
    for (std::size_t j = 0; j < m.x.size(); ++j) {
      const double v = std::clamp(m.values[i * m.x.size() + j], 0.0, 1.0);
      const int gb = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      char color[16];
      std::snprintf(color, sizeof color, "#ff%02x%02x", gb, gb);
      s += "<rect x=\"" + fmt(px(m.x[j]) - cw / 2) + "\" y=\"" + fmt(py(m.y[i]) - ch / 2) +
           "\" width=\"" + fmt(cw) + "\" height=\"" + fmt(ch) + "\" fill=\"" + color + "\"/>\n";
    }
  }
  if (m.support) {
    const double x0 = px(std::max(-m.support->first, x_lo));
    const double x1 = px(std::min(m.support->first, x_hi));
    const double y0 = py(std::min(m.support->second, y_hi));
    const double y1 = py(std::max(-m.support->second, y_lo));
    s += "<rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y0) + "\" width=\"" + fmt(std::max(x1 - x0, 1.0)) +
         "\" height=\"" + fmt(std::max(y1 - y0, 1.0)) +
         "\" fill=\"none\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  }
  axes(s, x_lo, x_hi, y_lo, y_hi, m.x_label, m.y_label);
  // Colour bar.
  const double bx = kWidth - kRight + 30;
  for (int k = 0; k < 10; ++k) {
    const int gb = static_cast<int>(std::lround(255.0 * (1.0 - (k + 0.5) / 10.0)));
    char color[16];
    std::snprintf(color, sizeof color, "#ff%02x%02x", gb, gb);
    s += "<rect x=\"" + fmt(bx) + "\" y=\"" + fmt(kTop + ph - (k + 1) * ph / 10) +
         "\" width=\"16\" height=\"" + fmt(ph / 10) + "\" fill=\"" + color + "\"/>\n";
  }
  s += "<rect x=\"" + fmt(bx) + "\" y=\"" + fmt(kTop) + "\" width=\"16\" height=\"" + fmt(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + fmt(bx + 22) + "\" y=\"" + fmt(kTop + ph + 4) + "\">0</text>\n";
  s += "<text x=\"" + fmt(bx + 22) + "\" y=\"" + fmt(kTop + 4) + "\">1</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace patchpose::plot
