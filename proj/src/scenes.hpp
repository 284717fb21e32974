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

#ifndef PATCHPOSE_SCENES_HPP_
#define PATCHPOSE_SCENES_HPP_

#include <cstdint>

#include "dataset.hpp"
#include "image.hpp"

namespace patchpose::data {

/// Glyph families, all with a canonical orientation and paired so that a
/// quarter or half turn maps one shape onto another; class id =
/// color * kNumShapes + shape.
enum class Shape : int { kTriangle = 0, kHorizontalBar = 1, kVerticalBar = 2, kTriangleDown = 3 };
inline constexpr int kNumShapes = 4;
inline constexpr int kNumColors = 3;
inline constexpr int kMaxClasses = kNumShapes * kNumColors;

struct SceneSpec {
  int class_id = 0;
  std::uint64_t seed = 0;
  int size = 64;
};

/// Low-frequency random background plus one class-determined glyph whose
/// position, scale and tint are jittered by the seed. Pure function of spec.
/// Throws std::invalid_argument for class ids outside [0, kMaxClasses).
Image render_scene(const SceneSpec& spec);

/// num_classes * n_per_class labelled scenes, class-major. Scene seeds carry
/// the split tag in their top byte so different splits never share a scene.
Dataset make_dataset(int n_per_class, Split split, std::uint64_t seed, int num_classes = 12,
                     int size = 64);

}  // namespace patchpose::data

#endif  // PATCHPOSE_SCENES_HPP_
