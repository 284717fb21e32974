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

#ifndef PATCHPOSE_RENDER_HPP_
#define PATCHPOSE_RENDER_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "geometry.hpp"
#include "image.hpp"

namespace patchpose::render {

/// Texture of the patch; same layout as an image. Texel (i, j) covers the
/// continuous texture square [j, j+1) x [i, i+1), its center at (j+.5, i+.5).
using PatchTexture = Image;

/// One destination pixel pulled from four texels.
struct SampleTap {
  std::int32_t pixel = 0;                // y * out_width + x
  std::array<std::int32_t, 4> texel{};   // i * texture_width + j
  std::array<double, 4> weight{};        // bilinear, sums to 1
};

/// Cache of a forward warp for the backward pass.
struct CompositeRecord {
  geometry::Homography homography;
  Mask mask;
  int texture_height = 0;
  int texture_width = 0;
  int out_height = 0;
  int out_width = 0;
  std::vector<SampleTap> taps;

  bool empty() const { return taps.empty(); }
};

struct WarpResult {
  Image warped;
  Mask mask;
  CompositeRecord record;
};

/// Inverse-maps every pixel whose center lies strictly inside `quad` through
/// h^-1 (texture -> image homography) and samples the texture bilinearly
/// with clamp-to-edge. Throws DegenerateError when h is not invertible.
WarpResult warp_patch(const PatchTexture& q, const geometry::Homography& h, int out_width,
                      int out_height, const geometry::Quad& quad);

/// out = mask * warped + (1 - mask) * scene.
Image insert_patch(const Image& warped, const Mask& mask, const Image& scene);

struct AppliedPatch {
  Image image;
  CompositeRecord record;
  bool rendered = false;
};

/// Full applicator: project the placement, fit the texture -> quad
/// homography, warp, and insert. When the placement cannot be rendered the
/// scene is returned unchanged with an empty record.
AppliedPatch apply_patch(const PatchTexture& q, const geometry::PatchPlacement& placement,
                         const geometry::CameraIntrinsics& k, const Image& scene);

/// Texture corners in texture-pixel coordinates, matching the order of
/// geometry::Quad.
std::array<geometry::Vec2, 4> texture_corners(int texture_width, int texture_height);

/// dL/dq given dL/d(composited image). Linear in grad_out. Throws
/// std::invalid_argument when grad_out does not match the record.
PatchTexture backprop_to_texture(const CompositeRecord& rec, const Image& grad_out);

}  // namespace patchpose::render

#endif  // PATCHPOSE_RENDER_HPP_
