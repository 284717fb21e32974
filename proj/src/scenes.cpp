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

#include "scenes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "rng.hpp"

namespace patchpose::data {
namespace {

constexpr std::array<std::array<double, 3>, kNumColors> kPalette = {{
    {0.85, 0.15, 0.15},
    {0.15, 0.75, 0.20},
    {0.20, 0.30, 0.90},
}};

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// (u, v) in glyph units: the glyph fits in [-1, 1]^2.
bool inside_glyph(Shape shape, double u, double v) {
  switch (shape) {
    case Shape::kTriangle: {
      const double e0 = edge(0.0, -1.0, 0.95, 0.75, u, v);
      const double e1 = edge(0.95, 0.75, -0.95, 0.75, u, v);
      const double e2 = edge(-0.95, 0.75, 0.0, -1.0, u, v);
      return e0 >= 0 && e1 >= 0 && e2 >= 0;
    }
    case Shape::kHorizontalBar:
      return std::abs(u) <= 1.0 && std::abs(v) <= 0.32;
    case Shape::kVerticalBar:
      return std::abs(u) <= 0.32 && std::abs(v) <= 1.0;
    case Shape::kTriangleDown:
      return inside_glyph(Shape::kTriangle, u, -v);
  }
  return false;
}

}  // namespace

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kAttack: return "attack";
    case Split::kEval: return "eval";
  }
  return "unknown";
}

Image render_scene(const SceneSpec& spec) {
  if (spec.class_id < 0 || spec.class_id >= kMaxClasses) {
    throw std::invalid_argument("scene class id out of range");
  }
  if (spec.size < 8) throw std::invalid_argument("scene size too small");
  Rng rng = make_stream({spec.seed, name_key("scene")});
  const int n = spec.size;

  // Background: 4x4 control grid of muted colors, bilinearly upsampled.
  constexpr int kGrid = 4;
  std::array<std::array<std::array<double, 3>, kGrid>, kGrid> grid{};
  const double base = uniform(rng, 0.3, 0.7);
  for (auto& row : grid) {
    for (auto& cell : row) {
      for (double& ch : cell) ch = std::clamp(base + uniform(rng, -0.18, 0.18), 0.0, 1.0);
    }
  }
  Image img(n, n);
  for (int y = 0; y < n; ++y) {
    const double gy = (y + 0.5) / n * (kGrid - 1);
    const int y0 = std::min(static_cast<int>(gy), kGrid - 2);
    const double fy = gy - y0;
    for (int x = 0; x < n; ++x) {
      const double gx = (x + 0.5) / n * (kGrid - 1);
      const int x0 = std::min(static_cast<int>(gx), kGrid - 2);
      const double fx = gx - x0;
      for (int c = 0; c < 3; ++c) {
        img.at(y, x, c) = (1 - fy) * ((1 - fx) * grid[y0][x0][c] + fx * grid[y0][x0 + 1][c]) +
                          fy * ((1 - fx) * grid[y0 + 1][x0][c] + fx * grid[y0 + 1][x0 + 1][c]);
      }
    }
  }

  // Clutter: one or two axis-aligned squares in palette colors, so color
  // alone does not identify a class.
  const int n_clutter = 1 + static_cast<int>(uniform_index(rng, 2));
  for (int i = 0; i < n_clutter; ++i) {
    const auto& tint = kPalette[uniform_index(rng, kNumColors)];
    const double half = n * uniform(rng, 0.06, 0.11);
    const double qx = uniform(rng, half, n - half);
    const double qy = uniform(rng, half, n - half);
    for (int y = std::max(0, static_cast<int>(qy - half)); y < std::min(n, static_cast<int>(qy + half)); ++y) {
      for (int x = std::max(0, static_cast<int>(qx - half)); x < std::min(n, static_cast<int>(qx + half)); ++x) {
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = tint[c];
      }
    }
  }

  const Shape shape = static_cast<Shape>(spec.class_id % kNumShapes);
  std::array<double, 3> color = kPalette[spec.class_id / kNumShapes];
  for (double& ch : color) ch = std::clamp(ch + uniform(rng, -0.08, 0.08), 0.0, 1.0);
  const double radius = n * uniform(rng, 0.22, 0.30);
  const double cx = n / 2.0 + n * uniform(rng, -0.1, 0.1);
  const double cy = n / 2.0 + n * uniform(rng, -0.1, 0.1);

  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double u = (x + 0.5 - cx) / radius;
      const double v = (y + 0.5 - cy) / radius;
      if (inside_glyph(shape, u, v)) {
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = color[c];
      }
    }
  }
  // Mild sensor noise.
  for (double& v : img.values()) v = std::clamp(v + uniform(rng, -0.03, 0.03), 0.0, 1.0);
  return img;
}

Dataset make_dataset(int n_per_class, Split split, std::uint64_t seed, int num_classes, int size) {
  if (n_per_class <= 0) throw std::invalid_argument("n_per_class must be positive");
  if (num_classes < 2 || num_classes > kMaxClasses) {
    throw std::invalid_argument("num_classes must lie in [2, 12]");
  }
  Dataset ds;
  ds.split = split;
  ds.num_classes = num_classes;
  ds.items.reserve(static_cast<std::size_t>(n_per_class) * num_classes);
  constexpr std::uint64_t kLowMask = (std::uint64_t{1} << 56) - 1;
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      Rng r = make_stream({seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)});
      const std::uint64_t scene_seed =
          (static_cast<std::uint64_t>(split) << 56) | (r() & kLowMask);
      ds.items.push_back({render_scene({c, scene_seed, size}), c, scene_seed});
    }
  }
  return ds;
}

}  // namespace patchpose::data
