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

#ifndef PATCHPOSE_IMAGE_HPP_
#define PATCHPOSE_IMAGE_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace patchpose {

/// Three-channel image with real values, interleaved row-major (HWC).
/// Also used for patch textures and for image-shaped gradients.
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data_[index(y, x, c)]; }
  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }
  bool operator==(const Image& other) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

/// Per-pixel insertion weight in [0, 1].
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, double fill = 0.0)
      : height_(height), width_(width),
        values_(static_cast<std::size_t>(height) * width, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  double& at(int y, int x) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int y, int x) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const double> values() const { return values_; }

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> values_;
};

/// 8-bit RGB PNG. Values are quantized by round(v * 255) after clamping to
/// [0, 1].
void write_png(const Image& image, const std::filesystem::path& path);
Image read_png(const std::filesystem::path& path);

/// The image a write_png / read_png round trip would return.
Image quantize_8bit(const Image& image);

}  // namespace patchpose

#endif  // PATCHPOSE_IMAGE_HPP_
