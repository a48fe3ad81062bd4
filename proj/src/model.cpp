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

#include "qcse/model.hpp"

#include <cmath>
#include <stdexcept>

#include "qcse/layers.hpp"
#include "qcse/random.hpp"

namespace qcse {

std::string_view to_string(Padding p) { return p == Padding::valid ? "valid" : "same"; }

Padding parse_padding(std::string_view s) {
  if (s == "valid") return Padding::valid;
  if (s == "same") return Padding::same;
  throw std::invalid_argument("unknown padding '" + std::string(s) + "'");
}

Geometry geometry(const ModelConfig& cfg) {
  const bool same = cfg.padding == Padding::same;
  Geometry g;
  g.conv1_len = layers::conv_shape(1, cfg.input_bins, cfg.conv1.filters, cfg.conv1.kernel, same).out_len;
  g.pool1_len = cfg.pool_size ? g.conv1_len / cfg.pool_size : 0;
  g.conv2_len = layers::conv_shape(cfg.conv1.filters, g.pool1_len, cfg.conv2.filters,
                                   cfg.conv2.kernel, same).out_len;
  g.pool2_len = cfg.pool_size ? g.conv2_len / cfg.pool_size : 0;
  g.flatten_dim = static_cast<std::size_t>(cfg.conv2.filters) * g.pool2_len;
  return g;
}

void ModelConfig::validate() const {
  if (classes != 2) throw std::invalid_argument("model must have exactly 2 classes");
  if (input_bins == 0 || conv1.filters == 0 || conv2.filters == 0 || dense_hidden == 0 ||
      conv1.kernel == 0 || conv2.kernel == 0 || pool_size == 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (conv1.kernel > input_bins) {
    throw std::invalid_argument("conv1 kernel exceeds the input length");
  }
  const Geometry g = geometry(*this);
  if (g.pool1_len == 0 || conv2.kernel > g.pool1_len) {
    throw std::invalid_argument("conv2 kernel exceeds its input length");
  }
  if (g.pool2_len == 0) throw std::invalid_argument("network collapses to zero length");
}

std::vector<TensorInfo> tensor_layout(const ModelConfig& cfg) {
  const Geometry g = geometry(cfg);
  const std::size_t f1 = cfg.conv1.filters, k1 = cfg.conv1.kernel;
  const std::size_t f2 = cfg.conv2.filters, k2 = cfg.conv2.kernel;
  const std::size_t h = cfg.dense_hidden, c = cfg.classes;

  std::vector<TensorInfo> out;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::vector<std::size_t> shape, std::size_t fan_in) {
    std::size_t size = 1;
    for (std::size_t d : shape) size *= d;
    out.push_back(TensorInfo{std::move(name), std::move(shape), offset, size, fan_in});
    offset += size;
  };
  add("conv1.weight", {f1, 1, k1}, k1);
  add("conv1.bias", {f1}, k1);
  add("conv2.weight", {f2, f1, k2}, f1 * k2);
  add("conv2.bias", {f2}, f1 * k2);
  add("dense.weight", {g.flatten_dim, h}, g.flatten_dim);
  add("dense.bias", {h}, g.flatten_dim);
  add("output.weight", {h, c}, h);
  add("output.bias", {c}, h);
  return out;
}

std::size_t param_count(const ModelConfig& cfg) {
  const Geometry g = geometry(cfg);
  const std::size_t f1 = cfg.conv1.filters, f2 = cfg.conv2.filters;
  return (1 * cfg.conv1.kernel + 1) * f1 + (f1 * cfg.conv2.kernel + 1) * f2 +
         (g.flatten_dim + 1) * cfg.dense_hidden + (std::size_t{cfg.dense_hidden} + 1) * cfg.classes;
}

std::vector<std::string> describe_stages(const ModelConfig& cfg) {
  const Geometry g = geometry(cfg);
  auto s = [](std::size_t v) { return std::to_string(v); };
  const std::string pad(to_string(cfg.padding));
  return {
      "conv1d " + s(cfg.conv1.filters) + "x" + s(cfg.conv1.kernel) + " " + pad + " (1 -> " +
          s(cfg.conv1.filters) + " ch, len " + s(cfg.input_bins) + " -> " + s(g.conv1_len) + ") + relu",
      "maxpool " + s(cfg.pool_size) + " (len " + s(g.conv1_len) + " -> " + s(g.pool1_len) + ")",
      "conv1d " + s(cfg.conv2.filters) + "x" + s(cfg.conv2.kernel) + " " + pad + " (" +
          s(cfg.conv1.filters) + " -> " + s(cfg.conv2.filters) + " ch, len " + s(g.pool1_len) +
          " -> " + s(g.conv2_len) + ") + relu",
      "maxpool " + s(cfg.pool_size) + " (len " + s(g.conv2_len) + " -> " + s(g.pool2_len) + ")",
      "flatten (" + s(cfg.conv2.filters) + " x " + s(g.pool2_len) + " = " + s(g.flatten_dim) + ")",
      "dense " + s(g.flatten_dim) + " -> " + s(cfg.dense_hidden) + " + relu",
      "dense " + s(cfg.dense_hidden) + " -> " + s(cfg.classes) + " + softmax",
  };
}

template <typename T>
ModelParams<T> ModelParams<T>::zeros(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams<T> p;
  p.config = cfg;
  p.layout = tensor_layout(cfg);
  p.values.assign(param_count(cfg), T(0));
  return p;
}

template <typename T>
ModelParams<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams<T> p = ModelParams<T>::zeros(cfg);
  Rng rng(seed);
  for (std::size_t i = 0; i < kTensorCount; i += 2) {  // weights; biases stay zero
    const TensorInfo& t = p.layout[i];
    const double bound = std::sqrt(6.0 / static_cast<double>(t.fan_in));
    for (std::size_t j = 0; j < t.size; ++j) {
      p.values[t.offset + j] = static_cast<T>(rng.uniform(-bound, bound));
    }
  }
  return p;
}

template <typename T>
void Workspace<T>::reserve(const ModelConfig& cfg, std::size_t capacity) {
  const Geometry g = geometry(cfg);
  capacity_ = capacity;
  const std::size_t f1 = cfg.conv1.filters, f2 = cfg.conv2.filters;
  h1.resize(capacity * f1 * g.conv1_len);
  p1.resize(capacity * f1 * g.pool1_len);
  arg1.resize(p1.size());
  h2.resize(capacity * f2 * g.conv2_len);
  p2.resize(capacity * g.flatten_dim);
  arg2.resize(p2.size());
  h3.resize(capacity * cfg.dense_hidden);
  logits.resize(capacity * cfg.classes);
  probs.resize(logits.size());
  d_logits.resize(logits.size());
  d_h3.resize(h3.size());
  d_p2.resize(p2.size());
  d_h2.resize(f2 * g.conv2_len);
  d_p1.resize(f1 * g.pool1_len);
  d_h1.resize(f1 * g.conv1_len);
}

template <typename T>
struct NetworkKernels {
  const ModelParams<T>& params;
  Workspace<T>& ws;
  Geometry g;
  layers::ConvShape c1, c2;

  NetworkKernels(const ModelParams<T>& p, Workspace<T>& w) : params(p), ws(w), g(geometry(p.config)) {
    const ModelConfig& cfg = p.config;
    const bool same = cfg.padding == Padding::same;
    c1 = layers::conv_shape(1, cfg.input_bins, cfg.conv1.filters, cfg.conv1.kernel, same);
    c2 = layers::conv_shape(cfg.conv1.filters, g.pool1_len, cfg.conv2.filters, cfg.conv2.kernel, same);
  }

  template <typename V>
  static std::span<V> slice(std::vector<V>& v, std::size_t index, std::size_t width) {
    return {v.data() + index * width, width};
  }

  void forward(std::span<const T> frames, std::size_t batch) {
    const ModelConfig& cfg = params.config;
    if (frames.size() != batch * cfg.input_bins) {
      throw std::invalid_argument("forward: expected " + std::to_string(batch * cfg.input_bins) +
                                  " input values, got " + std::to_string(frames.size()));
    }
    if (ws.capacity() < batch) ws.reserve(cfg, batch);
    const std::size_t pool = cfg.pool_size;

    for (std::size_t b = 0; b < batch; ++b) {
      auto x = frames.subspan(b * cfg.input_bins, cfg.input_bins);
      auto h1 = slice(ws.h1, b, c1.out_size());
      layers::conv1d_forward<T>(c1, x, params.tensor(TensorId::conv1_weight),
                                params.tensor(TensorId::conv1_bias), h1);
      layers::relu_inplace(h1);
      auto p1 = slice(ws.p1, b, c2.in_size());
      layers::maxpool_forward<T>(c1.filters, c1.out_len, pool, h1, p1, slice(ws.arg1, b, c2.in_size()));

      auto h2 = slice(ws.h2, b, c2.out_size());
      layers::conv1d_forward<T>(c2, p1, params.tensor(TensorId::conv2_weight),
                                params.tensor(TensorId::conv2_bias), h2);
      layers::relu_inplace(h2);
      layers::maxpool_forward<T>(c2.filters, c2.out_len, pool, h2, slice(ws.p2, b, g.flatten_dim),
                                 slice(ws.arg2, b, g.flatten_dim));
    }

    const std::size_t hidden = cfg.dense_hidden;
    std::span<T> h3(ws.h3.data(), batch * hidden);
    layers::dense_forward<T>(batch, g.flatten_dim, hidden, {ws.p2.data(), batch * g.flatten_dim},
                             params.tensor(TensorId::dense_weight),
                             params.tensor(TensorId::dense_bias), h3);
    layers::relu_inplace(h3);
    layers::dense_forward<T>(batch, hidden, cfg.classes, h3, params.tensor(TensorId::output_weight),
                             params.tensor(TensorId::output_bias),
                             {ws.logits.data(), batch * cfg.classes});
  }

  void probabilities(std::size_t batch, std::span<T> probs) {
    const std::size_t classes = params.config.classes;
    layers::softmax<T>(batch, classes, {ws.logits.data(), batch * classes}, probs);
  }

  // Accumulates into grad (caller zeroes it); returns the summed loss.
  double backward(std::span<const T> frames, std::span<const std::uint8_t> labels, T scale,
                  ModelParams<T>& grad) {
    const ModelConfig& cfg = params.config;
    const std::size_t batch = labels.size();
    const std::size_t hidden = cfg.dense_hidden;
    for (std::uint8_t y : labels) {
      if (y >= cfg.classes) throw std::invalid_argument("label out of range");
    }

    const double loss = layers::softmax_xent<T>(
        batch, cfg.classes, {ws.logits.data(), batch * cfg.classes}, labels, scale,
        {ws.probs.data(), batch * cfg.classes}, {ws.d_logits.data(), batch * cfg.classes});

    std::span<const T> h3(ws.h3.data(), batch * hidden);
    std::span<T> d_h3(ws.d_h3.data(), batch * hidden);
    layers::dense_backward<T>(batch, hidden, cfg.classes, h3, params.tensor(TensorId::output_weight),
                              {ws.d_logits.data(), batch * cfg.classes},
                              grad.tensor(TensorId::output_weight),
                              grad.tensor(TensorId::output_bias), d_h3);
    layers::relu_backward<T>(h3, d_h3);

    std::span<T> d_p2(ws.d_p2.data(), batch * g.flatten_dim);
    layers::dense_backward<T>(batch, g.flatten_dim, hidden, {ws.p2.data(), batch * g.flatten_dim},
                              params.tensor(TensorId::dense_weight), d_h3,
                              grad.tensor(TensorId::dense_weight),
                              grad.tensor(TensorId::dense_bias), d_p2);

    for (std::size_t b = 0; b < batch; ++b) {
      layers::maxpool_backward<T>(d_p2.subspan(b * g.flatten_dim, g.flatten_dim),
                                  slice(ws.arg2, b, g.flatten_dim), ws.d_h2);
      layers::relu_backward<T>(slice(ws.h2, b, c2.out_size()), ws.d_h2);
      layers::conv1d_backward<T>(c2, slice(ws.p1, b, c2.in_size()),
                                 params.tensor(TensorId::conv2_weight), ws.d_h2,
                                 grad.tensor(TensorId::conv2_weight),
                                 grad.tensor(TensorId::conv2_bias), ws.d_p1);
      layers::maxpool_backward<T>(ws.d_p1, slice(ws.arg1, b, c2.in_size()), ws.d_h1);
      layers::relu_backward<T>(slice(ws.h1, b, c1.out_size()), ws.d_h1);
      layers::conv1d_backward<T>(c1, frames.subspan(b * cfg.input_bins, cfg.input_bins),
                                 params.tensor(TensorId::conv1_weight), ws.d_h1,
                                 grad.tensor(TensorId::conv1_weight),
                                 grad.tensor(TensorId::conv1_bias), std::span<T>{});
    }
    return loss;
  }
};

template <typename T>
void forward_batch(const ModelParams<T>& params, std::span<const T> frames, std::size_t batch,
                   std::span<T> probs, Workspace<T>& ws) {
  const std::size_t classes = params.config.classes;
  if (probs.size() != batch * classes) throw std::invalid_argument("forward: output size mismatch");
  NetworkKernels<T> net(params, ws);
  net.forward(frames, batch);
  net.probabilities(batch, probs);
}

template <typename T>
std::vector<T> forward(const ModelParams<T>& params, std::span<const T> frame) {
  Workspace<T> ws(params.config, 1);
  std::vector<T> probs(params.config.classes);
  forward_batch(params, frame, 1, std::span<T>(probs), ws);
  return probs;
}

namespace {

template <typename T>
void zero_fill(ModelParams<T>& grad, const ModelParams<T>& like) {
  if (grad.values.size() != like.values.size() || !(grad.config == like.config)) {
    grad = ModelParams<T>::zeros(like.config);
  } else {
    std::fill(grad.values.begin(), grad.values.end(), T(0));
  }
}

template <typename T>
double chunk_loss_and_grad(const ModelParams<T>& params, std::span<const T> frames,
                           std::span<const std::uint8_t> labels, T scale, ModelParams<T>& grad,
                           Workspace<T>& ws) {
  zero_fill(grad, params);
  if (labels.empty()) return 0.0;
  NetworkKernels<T> net(params, ws);
  net.forward(frames, labels.size());
  return net.backward(frames, labels, scale, grad);
}

}  // namespace

template <typename T>
double loss_and_grad(const ModelParams<T>& params, const Batch<T>& batch, ModelParams<T>& grad,
                     Workspace<T>& ws) {
  if (batch.size() == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  const T scale = T(1) / static_cast<T>(batch.size());
  const double total = chunk_loss_and_grad(params, batch.frames, batch.labels, scale, grad, ws);
  return total / static_cast<double>(batch.size());
}

template <typename T>
LossAndGrad<T> loss_and_grad(const ModelParams<T>& params, const Batch<T>& batch) {
  LossAndGrad<T> out;
  Workspace<T> ws(params.config, batch.size());
  out.loss = loss_and_grad(params, batch, out.grad, ws);
  return out;
}

template <typename T>
double loss_and_grad_chunked(const ModelParams<T>& params, const Batch<T>& batch,
                             std::span<GradChunk<T>> chunks, ModelParams<T>& grad) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  if (chunks.empty()) throw std::invalid_argument("loss_and_grad_chunked: no chunks");
  const std::size_t n_chunks = chunks.size();
  const std::size_t bins = params.config.input_bins;
  const T scale = T(1) / static_cast<T>(n);
  std::vector<double> losses(n_chunks, 0.0);

#pragma omp parallel for schedule(static, 1)
  for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(n_chunks); ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    const std::size_t lo = n * c / n_chunks;
    const std::size_t hi = n * (c + 1) / n_chunks;
    losses[c] = chunk_loss_and_grad(params, batch.frames.subspan(lo * bins, (hi - lo) * bins),
                                    batch.labels.subspan(lo, hi - lo), scale, chunks[c].grad,
                                    chunks[c].ws);
  }

  zero_fill(grad, params);
  double total = 0.0;
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const std::vector<T>& part = chunks[c].grad.values;
    T* dst = grad.values.data();
#pragma omp simd
    for (std::size_t i = 0; i < part.size(); ++i) dst[i] += part[i];
    total += losses[c];
  }
  return total / static_cast<double>(n);
}

UtteranceScore aggregate_frame_probs(std::span<const double> probs, std::size_t n_frames) {
  if (n_frames == 0) throw std::invalid_argument("cannot score an utterance with no frames");
  if (probs.size() != n_frames * kNumClasses) {
    throw std::invalid_argument("aggregate_frame_probs: size mismatch");
  }
  UtteranceScore score;
  for (std::size_t i = 0; i < n_frames; ++i) {
    for (std::size_t c = 0; c < kNumClasses; ++c) score.mean_probs[c] += probs[i * kNumClasses + c];
  }
  for (double& p : score.mean_probs) p /= static_cast<double>(n_frames);
  score.label = score.mean_probs[1] > score.mean_probs[0] ? Label::whisper : Label::normal;
  return score;
}

template <typename T>
UtteranceScore predict_utterance(const ModelParams<T>& params, const FeatureMatrix& features) {
  const ModelConfig& cfg = params.config;
  if (features.n_frames == 0) throw std::invalid_argument("cannot score an empty feature matrix");
  if (features.n_bins != cfg.input_bins) {
    throw std::invalid_argument("feature matrix has " + std::to_string(features.n_bins) +
                                " bins, model expects " + std::to_string(cfg.input_bins));
  }
  constexpr std::size_t kChunk = 64;
  Workspace<T> ws(cfg, kChunk);
  std::vector<T> input(kChunk * cfg.input_bins);
  std::vector<T> probs(kChunk * cfg.classes);
  std::vector<double> all(features.n_frames * cfg.classes);

  for (std::size_t start = 0; start < features.n_frames; start += kChunk) {
    const std::size_t count = std::min(kChunk, features.n_frames - start);
    for (std::size_t i = 0; i < count * cfg.input_bins; ++i) {
      input[i] = static_cast<T>(features.data[start * cfg.input_bins + i]);
    }
    forward_batch<T>(params, {input.data(), count * cfg.input_bins}, count,
                     {probs.data(), count * cfg.classes}, ws);
    for (std::size_t i = 0; i < count * cfg.classes; ++i) {
      all[start * cfg.classes + i] = static_cast<double>(probs[i]);
    }
  }
  return aggregate_frame_probs(all, features.n_frames);
}

#define QCSE_INSTANTIATE(T)                                                                     \
  template struct ModelParams<T>;                                                               \
  template ModelParams<T> init_params<T>(const ModelConfig&, std::uint64_t);                     \
  template class Workspace<T>;                                                                  \
  template void forward_batch<T>(const ModelParams<T>&, std::span<const T>, std::size_t,         \
                                 std::span<T>, Workspace<T>&);                                  \
  template std::vector<T> forward<T>(const ModelParams<T>&, std::span<const T>);                \
  template double loss_and_grad<T>(const ModelParams<T>&, const Batch<T>&, ModelParams<T>&,      \
                                   Workspace<T>&);                                              \
  template LossAndGrad<T> loss_and_grad<T>(const ModelParams<T>&, const Batch<T>&);              \
  template double loss_and_grad_chunked<T>(const ModelParams<T>&, const Batch<T>&,               \
                                           std::span<GradChunk<T>>, ModelParams<T>&);           \
  template UtteranceScore predict_utterance<T>(const ModelParams<T>&, const FeatureMatrix&);

QCSE_INSTANTIATE(float)
QCSE_INSTANTIATE(double)

#undef QCSE_INSTANTIATE

}  // namespace qcse
