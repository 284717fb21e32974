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

#include "tiny_convnet.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "errors.hpp"
#include "rng.hpp"

namespace patchpose::model {
namespace {

using Mat = Eigen::MatrixXd;  // channels x (row-major spatial index)
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeights = Eigen::Map<const RowMat>;
using Weights = Eigen::Map<RowMat>;
using ConstVec = Eigen::Map<const Eigen::VectorXd>;
using Vec = Eigen::Map<Eigen::VectorXd>;

constexpr int kIn = Image::kChannels;
constexpr int kC1 = TinyConvNet::kConv1;
constexpr int kC2 = TinyConvNet::kConv2;
constexpr int kC3 = TinyConvNet::kConv3;

struct Layout {
  std::size_t w1, b1, w2, b2, w3, b3, wf, bf, total;
};

Layout layout(int k) {
  Layout l{};
  std::size_t o = 0;
  l.w1 = o; o += static_cast<std::size_t>(kC1) * 9 * kIn;
  l.b1 = o; o += kC1;
  l.w2 = o; o += static_cast<std::size_t>(kC2) * 9 * kC1;
  l.b2 = o; o += kC2;
  l.w3 = o; o += static_cast<std::size_t>(kC3) * 9 * kC2;
  l.b3 = o; o += kC3;
  l.wf = o; o += static_cast<std::size_t>(k) * kC3;
  l.bf = o; o += k;
  l.total = o;
  return l;
}

// Rows of the column matrix are ordered (ky, kx, channel), matching the
// [out][ky][kx][in] weight layout.
void im2col(const Mat& in, int size, Mat& col) {
  const int c = static_cast<int>(in.rows());
  col.resize(9 * c, static_cast<Eigen::Index>(size) * size);
  col.setZero();
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int p = y * size + x;
      for (int ky = 0; ky < 3; ++ky) {
        const int yy = y + ky - 1;
        if (yy < 0 || yy >= size) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int xx = x + kx - 1;
          if (xx < 0 || xx >= size) continue;
          col.block((ky * 3 + kx) * c, p, c, 1) = in.col(yy * size + xx);
        }
      }
    }
  }
}

void col2im(const Mat& dcol, int channels, int size, Mat& din) {
  din.resize(channels, static_cast<Eigen::Index>(size) * size);
  din.setZero();
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int p = y * size + x;
      for (int ky = 0; ky < 3; ++ky) {
        const int yy = y + ky - 1;
        if (yy < 0 || yy >= size) continue;
        for (int kx = 0; kx < 3; ++kx) {
          const int xx = x + kx - 1;
          if (xx < 0 || xx >= size) continue;
          din.col(yy * size + xx) += dcol.block((ky * 3 + kx) * channels, p, channels, 1);
        }
      }
    }
  }
}

// 2x2 stride-2 max pool; the first maximum in raster order wins ties.
void maxpool(const Mat& in, int size, Mat& out, std::vector<int>& arg) {
  const int c = static_cast<int>(in.rows());
  const int half = size / 2;
  out.resize(c, static_cast<Eigen::Index>(half) * half);
  arg.assign(static_cast<std::size_t>(c) * half * half, 0);
  for (int oy = 0; oy < half; ++oy) {
    for (int ox = 0; ox < half; ++ox) {
      const int q = oy * half + ox;
      const int base = (2 * oy) * size + 2 * ox;
      const int cand[4] = {base, base + 1, base + size, base + size + 1};
      for (int ch = 0; ch < c; ++ch) {
        int best = cand[0];
        double bv = in(ch, best);
        for (int k = 1; k < 4; ++k) {
          if (in(ch, cand[k]) > bv) {
            bv = in(ch, cand[k]);
            best = cand[k];
          }
        }
        out(ch, q) = bv;
        arg[static_cast<std::size_t>(q) * c + ch] = best;
      }
    }
  }
}

void unpool(const Mat& dout, const std::vector<int>& arg, int size, Mat& din) {
  const int c = static_cast<int>(dout.rows());
  din.resize(c, static_cast<Eigen::Index>(size) * size);
  din.setZero();
  for (Eigen::Index q = 0; q < dout.cols(); ++q) {
    for (int ch = 0; ch < c; ++ch) {
      din(ch, arg[static_cast<std::size_t>(q) * c + ch]) += dout(ch, q);
    }
  }
}

void check_class(int target, int k) {
  if (target < 0 || target >= k) throw std::invalid_argument("class id out of range");
}

}  // namespace

// Forward activations plus backward scratch; reused per thread so the hot
// loops do not allocate.
struct TinyConvNet::Activations {
  Mat col1, a1, p1, col2, a2, p2, col3, a3;
  std::vector<int> arg1, arg2;
  Eigen::VectorXd gap;
  Logits logits;
  Mat da3, dcol, dp2, da2, dp1, da1, dx;
  // Per-sample parameter gradient. Eigen's kernels sum in an order that
  // depends on the destination's alignment, so accumulate here first.
  std::vector<double, Eigen::aligned_allocator<double>> pgrad;
};

TinyConvNet::TinyConvNet(int num_classes, int input_size)
    : num_classes_(num_classes), input_size_(input_size) {
  if (num_classes < 2) throw std::invalid_argument("need at least two classes");
  if (input_size < 4 || input_size % 4 != 0) {
    throw std::invalid_argument("input size must be a positive multiple of 4");
  }
  params_.assign(parameter_count(num_classes), 0.0);
}

std::size_t TinyConvNet::parameter_count(int num_classes) { return layout(num_classes).total; }

TinyConvNet TinyConvNet::initialized(int num_classes, int input_size, std::uint64_t seed) {
  TinyConvNet net(num_classes, input_size);
  net.seed_ = seed;
  Rng rng = make_stream({seed, name_key("tiny-convnet-init")});
  const Layout l = layout(num_classes);
  auto fill = [&](std::size_t offset, std::size_t n, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (std::size_t i = 0; i < n; ++i) net.params_[offset + i] = dist(rng);
  };
  fill(l.w1, l.b1 - l.w1, std::sqrt(2.0 / (9 * kIn)));
  fill(l.w2, l.b2 - l.w2, std::sqrt(2.0 / (9 * kC1)));
  fill(l.w3, l.b3 - l.w3, std::sqrt(2.0 / (9 * kC2)));
  fill(l.wf, l.bf - l.wf, std::sqrt(1.0 / kC3));
  return net;
}

void TinyConvNet::check_input(const Image& image) const {
  if (image.height() != input_size_ || image.width() != input_size_) {
    throw std::invalid_argument("input image does not match the network input size");
  }
}

void TinyConvNet::run_forward(const Image& image, Activations& act) const {
  check_input(image);
  const Layout l = layout(num_classes_);
  const double* p = params_.data();
  const int s0 = input_size_, s1 = s0 / 2, s2 = s1 / 2;

  act.dx = Eigen::Map<const Mat>(image.values().data(), kIn, static_cast<Eigen::Index>(s0) * s0)
               .array() -
           0.5;
  im2col(act.dx, s0, act.col1);
  act.a1.noalias() = ConstWeights(p + l.w1, kC1, 9 * kIn) * act.col1;
  act.a1.colwise() += ConstVec(p + l.b1, kC1);
  act.a1 = act.a1.cwiseMax(0.0);
  maxpool(act.a1, s0, act.p1, act.arg1);

  im2col(act.p1, s1, act.col2);
  act.a2.noalias() = ConstWeights(p + l.w2, kC2, 9 * kC1) * act.col2;
  act.a2.colwise() += ConstVec(p + l.b2, kC2);
  act.a2 = act.a2.cwiseMax(0.0);
  maxpool(act.a2, s1, act.p2, act.arg2);

  im2col(act.p2, s2, act.col3);
  act.a3.noalias() = ConstWeights(p + l.w3, kC3, 9 * kC2) * act.col3;
  act.a3.colwise() += ConstVec(p + l.b3, kC3);
  act.a3 = act.a3.cwiseMax(0.0);

  act.gap = act.a3.rowwise().sum() / static_cast<double>(act.a3.cols());
  act.logits = ConstWeights(p + l.wf, num_classes_, kC3) * act.gap + ConstVec(p + l.bf, num_classes_);
}

void TinyConvNet::run_backward(Activations& act, const Logits& dlogits, Image* input_grad,
                               std::span<double> param_grad) const {
  const Layout l = layout(num_classes_);
  const double* p = params_.data();
  const int s0 = input_size_, s1 = s0 / 2, s2 = s1 / 2;
  const bool want_params = !param_grad.empty();
  if (want_params && param_grad.size() != l.total) {
    throw std::invalid_argument("parameter gradient has the wrong size");
  }
  if (want_params) act.pgrad.assign(l.total, 0.0);
  double* g = act.pgrad.data();

  if (want_params) {
    Weights(g + l.wf, num_classes_, kC3).noalias() += dlogits * act.gap.transpose();
    Vec(g + l.bf, num_classes_) += dlogits;
  }
  const Eigen::VectorXd dgap = ConstWeights(p + l.wf, num_classes_, kC3).transpose() * dlogits;

  act.da3 = (act.a3.array() > 0.0)
                .select((dgap / static_cast<double>(act.a3.cols())).replicate(1, act.a3.cols()), 0.0);
  if (want_params) {
    Weights(g + l.w3, kC3, 9 * kC2).noalias() += act.da3 * act.col3.transpose();
    Vec(g + l.b3, kC3) += act.da3.rowwise().sum();
  }
  act.dcol.noalias() = ConstWeights(p + l.w3, kC3, 9 * kC2).transpose() * act.da3;
  col2im(act.dcol, kC2, s2, act.dp2);

  unpool(act.dp2, act.arg2, s1, act.da2);
  act.da2 = (act.a2.array() > 0.0).select(act.da2, 0.0);
  if (want_params) {
    Weights(g + l.w2, kC2, 9 * kC1).noalias() += act.da2 * act.col2.transpose();
    Vec(g + l.b2, kC2) += act.da2.rowwise().sum();
  }
  act.dcol.noalias() = ConstWeights(p + l.w2, kC2, 9 * kC1).transpose() * act.da2;
  col2im(act.dcol, kC1, s1, act.dp1);

  unpool(act.dp1, act.arg1, s0, act.da1);
  act.da1 = (act.a1.array() > 0.0).select(act.da1, 0.0);
  if (want_params) {
    Weights(g + l.w1, kC1, 9 * kIn).noalias() += act.da1 * act.col1.transpose();
    Vec(g + l.b1, kC1) += act.da1.rowwise().sum();
  }
  if (want_params) {
    for (std::size_t i = 0; i < l.total; ++i) param_grad[i] += act.pgrad[i];
  }
  if (input_grad != nullptr) {
    act.dcol.noalias() = ConstWeights(p + l.w1, kC1, 9 * kIn).transpose() * act.da1;
    col2im(act.dcol, kIn, s0, act.dx);
    *input_grad = Image(s0, s0);
    std::memcpy(input_grad->values().data(), act.dx.data(), sizeof(double) * act.dx.size());
  }
}

TinyConvNet::Activations& TinyConvNet::workspace() {
  thread_local Activations act;
  return act;
}

Logits TinyConvNet::forward(const Image& image) const {
  Activations& act = workspace();
  run_forward(image, act);
  return act.logits;
}

Logits TinyConvNet::forward_backward(const Image& image,
                                     const std::function<Logits(const Logits&)>& dloss,
                                     Image* input_grad, std::span<double> param_grad) const {
  Activations& act = workspace();
  run_forward(image, act);
  run_backward(act, dloss(act.logits), input_grad, param_grad);
  return act.logits;
}

Eigen::VectorXd log_softmax(const Logits& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

Eigen::VectorXd softmax(const Logits& logits) { return log_softmax(logits).array().exp(); }

double target_log_prob(const TinyConvNet& net, const Image& image, int target) {
  check_class(target, net.num_classes());
  return log_softmax(net.forward(image))(target);
}

ValueAndGradient target_log_prob_and_gradient(const TinyConvNet& net, const Image& image,
                                              int target) {
  check_class(target, net.num_classes());
  ValueAndGradient out;
  // d log p_t / d logits = onehot(t) - softmax.
  out.logits = net.forward_backward(
      image,
      [target](const Logits& z) {
        Logits d = -softmax(z);
        d(target) += 1.0;
        return d;
      },
      &out.gradient, {});
  out.value = log_softmax(out.logits)(target);
  return out;
}

Image input_gradient(const TinyConvNet& net, const Image& image, int target) {
  return target_log_prob_and_gradient(net, image, target).gradient;
}

int predict(const Logits& logits) {
  int best = 0;
  for (int i = 1; i < logits.size(); ++i) {
    if (logits(i) > logits(best)) best = i;
  }
  return best;
}

int predict(const TinyConvNet& net, const Image& image) { return predict(net.forward(image)); }

double accuracy(const TinyConvNet& net, const data::Dataset& dataset) {
  if (dataset.empty()) return 0.0;
  std::size_t correct = 0;
  for (const auto& item : dataset.items) {
    if (predict(net, item.image) == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

TinyConvNet train_classifier(const data::Dataset& train, const data::Dataset& val,
                             const TrainOptions& options, TrainReport* report) {
  if (train.empty()) throw std::invalid_argument("training set is empty");
  if (options.epochs < 0 || options.batch_size <= 0) {
    throw std::invalid_argument("invalid training options");
  }
  const int k = train.num_classes;
  const int size = train.items.front().image.height();
  TinyConvNet net = TinyConvNet::initialized(k, size, options.seed);
  Rng rng = make_stream({options.seed, name_key("train-classifier-order")});

  const std::size_t n_params = net.parameters().size();
  std::vector<double> grad(n_params), velocity(n_params, 0.0);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  TrainReport local;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t end = std::min(order.size(), start + options.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const auto& item = train.items[order[i]];
        double loss = 0.0;
        net.forward_backward(
            item.image,
            [&](const Logits& z) {
              Logits d = softmax(z);
              loss = -log_softmax(z)(item.label);
              d(item.label) -= 1.0;
              return d;
            },
            nullptr, grad);
        epoch_loss += loss;
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      auto params = net.parameters();
      for (std::size_t j = 0; j < n_params; ++j) {
        velocity[j] = options.momentum * velocity[j] + grad[j] * scale;
        params[j] -= options.learning_rate * velocity[j];
      }
    }
    local.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  local.val_accuracy = accuracy(net, val);
  if (report) *report = std::move(local);
  return net;
}

namespace {

constexpr char kMagic[6] = {'P', 'P', 'N', 'E', 'T', '1'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

}  // namespace

void save_model(const TinyConvNet& net, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  const nlohmann::json header = {
      {"format", "PPNET1"},
      {"architecture", "tiny-convnet-v1"},
      {"num_classes", net.num_classes()},
      {"input_size", net.input_size()},
      {"seed", net.seed()},
      {"parameter_count", net.parameters().size()},
      {"layer_order", {"conv1.w", "conv1.b", "conv2.w", "conv2.b", "conv3.w", "conv3.b", "fc.w", "fc.b"}},
  };
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint32_t len = to_little(static_cast<std::uint32_t>(text.size()));
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : net.parameters()) {
    const double le = to_little(v);
    out.write(reinterpret_cast<const char*>(&le), sizeof(le));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

TinyConvNet load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kMagic) + 4 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw IoError(path.string() + ": not a PPNET1 model file");
  }
  std::uint32_t len = 0;
  std::memcpy(&len, bytes.data() + sizeof(kMagic), sizeof(len));
  len = to_little(len);
  const std::size_t body = sizeof(kMagic) + 4 + len;
  if (bytes.size() < body) throw IoError(path.string() + ": truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.begin() + sizeof(kMagic) + 4, bytes.begin() + body);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": bad header: " + e.what());
  }
  const int k = header.at("num_classes").get<int>();
  const int size = header.at("input_size").get<int>();
  TinyConvNet net(k, size);
  net.set_seed(header.value("seed", std::uint64_t{0}));
  const std::size_t expected = TinyConvNet::parameter_count(k);
  if ((bytes.size() - body) != expected * sizeof(double) ||
      header.value("parameter_count", expected) != expected) {
    throw IoError(path.string() + ": parameter count mismatch (expected " +
                  std::to_string(expected) + ")");
  }
  auto params = net.parameters();
  for (std::size_t i = 0; i < expected; ++i) {
    double v = 0.0;
    std::memcpy(&v, bytes.data() + body + i * sizeof(double), sizeof(double));
    params[i] = to_little(v);
  }
  return net;
}

}  // namespace patchpose::model
