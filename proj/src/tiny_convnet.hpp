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

#ifndef PATCHPOSE_TINY_CONVNET_HPP_
#define PATCHPOSE_TINY_CONVNET_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "dataset.hpp"
#include "image.hpp"

namespace patchpose::model {

using Logits = Eigen::VectorXd;

/// Fixed classifier:
///
///   conv3x3(3->16, pad 1) ReLU maxpool2   64x64 -> 32x32
///   conv3x3(16->32, pad 1) ReLU maxpool2  32x32 -> 16x16
///   conv3x3(32->64, pad 1) ReLU           16x16
///   global average pool                   64
///   linear(64->K)
///
/// Inputs are shifted by -0.5 before the first convolution. Parameters are
/// one flat vector in the order conv1.w, conv1.b, conv2.w, conv2.b, conv3.w,
/// conv3.b, fc.w, fc.b; convolution weights are laid out
/// [out][ky][kx][in] and fc weights [class][feature], all row-major.
class TinyConvNet {
 public:
  static constexpr int kConv1 = 16;
  static constexpr int kConv2 = 32;
  static constexpr int kConv3 = 64;

  /// All-zero weights.
  explicit TinyConvNet(int num_classes, int input_size = 64);

  /// He-normal weights, zero biases.
  static TinyConvNet initialized(int num_classes, int input_size, std::uint64_t seed);

  static std::size_t parameter_count(int num_classes);

  int num_classes() const { return num_classes_; }
  int input_size() const { return input_size_; }
  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t s) { seed_ = s; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  /// Throws std::invalid_argument on an input of the wrong size.
  Logits forward(const Image& image) const;

  /// Forward pass, then reverse mode with dL/dlogits = dloss(logits).
  /// `input_grad` may be null; `param_grad` may be empty, otherwise it is
  /// accumulated into.
  Logits forward_backward(const Image& image, const std::function<Logits(const Logits&)>& dloss,
                          Image* input_grad, std::span<double> param_grad) const;

  bool operator==(const TinyConvNet& other) const = default;

 private:
  struct Activations;
  void run_forward(const Image& image, Activations& act) const;
  static Activations& workspace();
  void run_backward(Activations& act, const Logits& dlogits, Image* input_grad,
                    std::span<double> param_grad) const;
  void check_input(const Image& image) const;

  int num_classes_ = 0;
  int input_size_ = 64;
  std::uint64_t seed_ = 0;
  // Fixed base alignment keeps Eigen's vectorized kernels on the same
  // summation order for every copy of a network.
  std::vector<double, Eigen::aligned_allocator<double>> params_;
};

/// Numerically stable log softmax.
Eigen::VectorXd log_softmax(const Logits& logits);
Eigen::VectorXd softmax(const Logits& logits);

/// log softmax(logits)[target]. Throws std::invalid_argument for an
/// out-of-range class id.
double target_log_prob(const TinyConvNet& net, const Image& image, int target);

/// d target_log_prob / d input pixels.
Image input_gradient(const TinyConvNet& net, const Image& image, int target);

struct ValueAndGradient {
  double value = 0.0;
  Image gradient;
  Logits logits;
};
ValueAndGradient target_log_prob_and_gradient(const TinyConvNet& net, const Image& image,
                                              int target);

/// Argmax; ties go to the lowest class id.
int predict(const Logits& logits);
int predict(const TinyConvNet& net, const Image& image);

double accuracy(const TinyConvNet& net, const data::Dataset& dataset);

struct TrainOptions {
  int epochs = 20;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> epoch_loss;
  double val_accuracy = 0.0;
};

/// Cross-entropy with momentum SGD. Deterministic given options.seed.
/// Throws std::invalid_argument on an empty training set.
TinyConvNet train_classifier(const data::Dataset& train, const data::Dataset& val,
                             const TrainOptions& options, TrainReport* report = nullptr);

/// "PPNET1", u32 LE header length, JSON header, then little-endian f64
/// parameters.
void save_model(const TinyConvNet& net, const std::filesystem::path& path);
TinyConvNet load_model(const std::filesystem::path& path);

}  // namespace patchpose::model

#endif  // PATCHPOSE_TINY_CONVNET_HPP_
