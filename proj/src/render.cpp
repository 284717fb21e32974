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

#include "render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace patchpose::render {

using geometry::Quad;
using geometry::Vec2;

namespace {

bool strictly_inside(const Quad& quad, const Vec2& p) {
  for (int i = 0; i < 4; ++i) {
    const Vec2 e = quad[(i + 1) % 4] - quad[i];
    const Vec2 d = p - quad[i];
    if (!(e.x() * d.y() - e.y() * d.x() > 0.0)) return false;
  }
  return true;
}

// Bilinear taps for the continuous texture coordinate (u, v).
SampleTap bilinear_tap(double u, double v, int tw, int th) {
  const double x = u - 0.5;
  const double y = v - 0.5;
  const double x0f = std::floor(x);
  const double y0f = std::floor(y);
  const double fx = x - x0f;
  const double fy = y - y0f;
  const int x0 = static_cast<int>(x0f);
  const int y0 = static_cast<int>(y0f);
  const int xa = std::clamp(x0, 0, tw - 1);
  const int xb = std::clamp(x0 + 1, 0, tw - 1);
  const int ya = std::clamp(y0, 0, th - 1);
  const int yb = std::clamp(y0 + 1, 0, th - 1);
  SampleTap t;
  t.texel = {ya * tw + xa, ya * tw + xb, yb * tw + xa, yb * tw + xb};
  t.weight = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  return t;
}

}  // namespace

std::array<Vec2, 4> texture_corners(int texture_width, int texture_height) {
  const double w = texture_width;
  const double h = texture_height;
  return {Vec2(0, 0), Vec2(w, 0), Vec2(w, h), Vec2(0, h)};
}

WarpResult warp_patch(const PatchTexture& q, const geometry::Homography& h, int out_width,
                      int out_height, const Quad& quad) {
  if (q.empty()) throw std::invalid_argument("empty patch texture");
  if (out_width <= 0 || out_height <= 0) throw std::invalid_argument("empty output image");
  const geometry::Homography hinv = h.inverse();
  const int tw = q.width();
  const int th = q.height();

  WarpResult r;
  r.warped = Image(out_height, out_width);
  r.mask = Mask(out_height, out_width);
  r.record.homography = h;
  r.record.texture_height = th;
  r.record.texture_width = tw;
  r.record.out_height = out_height;
  r.record.out_width = out_width;

  double xmin = quad[0].x(), xmax = xmin, ymin = quad[0].y(), ymax = ymin;
  for (const Vec2& p : quad) {
    xmin = std::min(xmin, p.x());
    xmax = std::max(xmax, p.x());
    ymin = std::min(ymin, p.y());
    ymax = std::max(ymax, p.y());
  }
  const int x_begin = std::max(0, static_cast<int>(std::floor(xmin)));
  const int x_end = std::min(out_width, static_cast<int>(std::ceil(xmax)) + 1);
  const int y_begin = std::max(0, static_cast<int>(std::floor(ymin)));
  const int y_end = std::min(out_height, static_cast<int>(std::ceil(ymax)) + 1);

  constexpr double kEdgeTol = 1e-9;
  for (int y = y_begin; y < y_end; ++y) {
    for (int x = x_begin; x < x_end; ++x) {
      const Vec2 center(x + 0.5, y + 0.5);
      if (!strictly_inside(quad, center)) continue;
      const Vec2 src = hinv.apply(center);
      if (!(src.x() >= -kEdgeTol && src.x() <= tw + kEdgeTol && src.y() >= -kEdgeTol &&
            src.y() <= th + kEdgeTol)) {
        continue;
      }
      SampleTap tap = bilinear_tap(src.x(), src.y(), tw, th);
      tap.pixel = y * out_width + x;
      const auto texels = q.values();
      for (int c = 0; c < Image::kChannels; ++c) {
        double v = 0.0;
        for (int k = 0; k < 4; ++k) {
          v += tap.weight[k] * texels[static_cast<std::size_t>(tap.texel[k]) * Image::kChannels + c];
        }
        r.warped.at(y, x, c) = v;
      }
      r.mask.at(y, x) = 1.0;
      r.record.taps.push_back(tap);
    }
  }
  r.record.mask = r.mask;
  return r;
}

Image insert_patch(const Image& warped, const Mask& mask, const Image& scene) {
  if (!warped.same_shape(scene) || mask.height() != scene.height() ||
      mask.width() != scene.width()) {
    throw std::invalid_argument("insert_patch: dimension mismatch");
  }
  Image out(scene.height(), scene.width());
  for (int y = 0; y < scene.height(); ++y) {
    for (int x = 0; x < scene.width(); ++x) {
      const double m = mask.at(y, x);
      for (int c = 0; c < Image::kChannels; ++c) {
        out.at(y, x, c) = m * warped.at(y, x, c) + (1.0 - m) * scene.at(y, x, c);
      }
    }
  }
  return out;
}

AppliedPatch apply_patch(const PatchTexture& q, const geometry::PatchPlacement& placement,
                         const geometry::CameraIntrinsics& k, const Image& scene) {
  AppliedPatch out;
  out.record.texture_height = q.height();
  out.record.texture_width = q.width();
  out.record.out_height = scene.height();
  out.record.out_width = scene.width();
  const auto quad = geometry::project_patch(placement, k);
  if (!quad) {
    out.image = scene;
    return out;
  }
  try {
    const auto h = geometry::homography_from_correspondences(
        texture_corners(q.width(), q.height()), *quad);
    WarpResult w = warp_patch(q, h, scene.width(), scene.height(), *quad);
    out.image = insert_patch(w.warped, w.mask, scene);
    out.record = std::move(w.record);
    out.rendered = true;
  } catch (const DegenerateError&) {
    out.image = scene;
  }
  return out;
}

PatchTexture backprop_to_texture(const CompositeRecord& rec, const Image& grad_out) {
  if (grad_out.height() != rec.out_height || grad_out.width() != rec.out_width) {
    throw std::invalid_argument("backprop_to_texture: gradient does not match the record");
  }
  PatchTexture grad(rec.texture_height, rec.texture_width);
  auto g = grad.values();
  const auto go = grad_out.values();
  const auto mask = rec.mask.values();
  for (const SampleTap& tap : rec.taps) {
    const double m = mask[tap.pixel];
    for (int c = 0; c < Image::kChannels; ++c) {
      const double upstream = m * go[static_cast<std::size_t>(tap.pixel) * Image::kChannels + c];
      for (int k = 0; k < 4; ++k) {
        g[static_cast<std::size_t>(tap.texel[k]) * Image::kChannels + c] += tap.weight[k] * upstream;
      }
    }
  }
  return grad;
}

}  // namespace patchpose::render
