// Copyright 2026 The QCSE Toolkit Authors
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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcse/features.hpp"
#include "qcse/label.hpp"

namespace qcse {

enum class Padding : std::uint32_t { valid = 0, same = 1 };

std::string_view to_string(Padding p);
Padding parse_padding(std::string_view s);

struct ConvLayerConfig {
  std::uint32_t filters = 0;
  std::uint32_t kernel = 0;

  bool operator==(const ConvLayerConfig&) const = default;
};

// conv(32, k20) -> ReLU -> maxpool(2) -> conv(64, k10) -> ReLU -> maxpool(2)
// -> flatten -> dense(1024) -> ReLU -> dense(2) -> softmax
struct ModelConfig {
  std::uint32_t input_bins = 128;
  ConvLayerConfig conv1{32, 20};
  ConvLayerConfig conv2{64, 10};
  std::uint32_t pool_size = 2;
  Padding padding = Padding::valid;
  std::uint32_t dense_hidden = 1024;
  std::uint32_t classes = 2;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Sequence lengths through the network. Pooling floors odd lengths.
struct Geometry {
  std::size_t conv1_len = 0;
  std::size_t pool1_len = 0;
  std::size_t conv2_len = 0;
  std::size_t pool2_len = 0;
  std::size_t flatten_dim = 0;  // conv2.filters * pool2_len, channel-major
};

Geometry geometry(const ModelConfig& cfg);

// Parameter tensors in declaration (and serialization) order.
enum class TensorId : std::size_t {
  conv1_weight,  // [conv1.filters x 1 x conv1.kernel]
  conv1_bias,    // [conv1.filters]
  conv2_weight,  // [conv2.filters x conv1.filters x conv2.kernel]
  conv2_bias,    // [conv2.filters]
  dense_weight,  // [flatten_dim x dense_hidden]
  dense_bias,    // [dense_hidden]
  output_weight, // [dense_hidden x classes]
  output_bias,   // [classes]
};
inline constexpr std::size_t kTensorCount = 8;

struct TensorInfo {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
  std::size_t fan_in = 0;
};

std::vector<TensorInfo> tensor_layout(const ModelConfig& cfg);

// Closed-form count: sum of (fan_in + 1) * fan_out over the four layers.
std::size_t param_count(const ModelConfig& cfg);

// Human-readable stage list, one entry per layer, e.g. "conv1d 32x20 (1 -> 32, len 128 -> 109)".
std::vector<std::string> describe_stages(const ModelConfig& cfg);

// All parameters in one contiguous buffer, sliced by tensor_layout().
template <typename T>
struct ModelParams {
  ModelConfig config;
  std::vector<TensorInfo> layout;
  std::vector<T> values;

  static ModelParams zeros(const ModelConfig& cfg);

  std::span<T> tensor(TensorId id) {
    const TensorInfo& t = layout[static_cast<std::size_t>(id)];
    return {values.data() + t.offset, t.size};
  }
  std::span<const T> tensor(TensorId id) const {
    const TensorInfo& t = layout[static_cast<std::size_t>(id)];
    return {values.data() + t.offset, t.size};
  }

  template <typename U>
  ModelParams<U> cast() const {
    ModelParams<U> out;
    out.config = config;
    out.layout = layout;
    out.values.assign(values.begin(), values.end());
    return out;
  }
};

// Weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)), drawn in tensor order
// from Rng(seed); biases are zero.
template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

// Activation and gradient buffers for a batch of up to `capacity` frames.
// One workspace per thread; the network itself is stateless.
template <typename T>
class Workspace {
 public:
  Workspace() = default;
  Workspace(const ModelConfig& cfg, std::size_t capacity) { reserve(cfg, capacity); }
  void reserve(const ModelConfig& cfg, std::size_t capacity);
  std::size_t capacity() const { return capacity_; }

 private:
  template <typename U>
  friend struct NetworkKernels;

  std::size_t capacity_ = 0;
  std::vector<T> h1, p1, h2, p2, h3, logits, probs;
  std::vector<std::uint32_t> arg1, arg2;
  std::vector<T> d_logits, d_h3, d_p2, d_h2, d_p1, d_h1;
};

// Batch of frames (row-major, batch x input_bins) with class indices.
template <typename T>
struct Batch {
  std::span<const T> frames;
  std::span<const std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
};

// Class probabilities for every frame: out is batch x classes.
template <typename T>
void forward_batch(const ModelParams<T>& params, std::span<const T> frames, std::size_t batch,
                   std::span<T> probs, Workspace<T>& ws);

// Single frame convenience wrapper.
template <typename T>
std::vector<T> forward(const ModelParams<T>& params, std::span<const T> frame);

// Mean cross-entropy over the batch. `grad` is overwritten with its gradient.
template <typename T>
double loss_and_grad(const ModelParams<T>& params, const Batch<T>& batch, ModelParams<T>& grad,
                     Workspace<T>& ws);

template <typename T>
struct LossAndGrad {
  double loss = 0.0;
  ModelParams<T> grad;
};

template <typename T>
LossAndGrad<T> loss_and_grad(const ModelParams<T>& params, const Batch<T>& batch);

// Data-parallel variant. The batch is cut into `chunks.size()` contiguous
// pieces, each handled by one OpenMP iteration with its own workspace and
// gradient buffer; the partial gradients are then summed in chunk order. The
// result depends on the chunk count but never on the thread count.
template <typename T>
struct GradChunk {
  Workspace<T> ws;
  ModelParams<T> grad;
};

template <typename T>
double loss_and_grad_chunked(const ModelParams<T>& params, const Batch<T>& batch,
                             std::span<GradChunk<T>> chunks, ModelParams<T>& grad);

// Mean over frames of the class-probability vectors; label is the argmax,
// with an exact tie going to Label::normal.
struct UtteranceScore {
  Label label = Label::normal;
  std::array<double, kNumClasses> mean_probs{};
};

template <typename T>
UtteranceScore predict_utterance(const ModelParams<T>& params, const FeatureMatrix& features);

UtteranceScore aggregate_frame_probs(std::span<const double> probs, std::size_t n_frames);

}  // namespace qcse
