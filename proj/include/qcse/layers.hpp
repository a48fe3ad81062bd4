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

// Forward/backward kernels for the 1-D CNN. All tensors are dense row-major
// spans; backward kernels *accumulate* parameter gradients and *overwrite*
// input gradients.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qcse::layers {

struct ConvShape {
  std::size_t in_channels = 1;
  std::size_t in_len = 0;
  std::size_t filters = 1;
  std::size_t kernel = 1;
  std::size_t pad_left = 0;  // zero padding before the first input sample
  std::size_t out_len = 0;

  std::size_t in_size() const { return in_channels * in_len; }
  std::size_t out_size() const { return filters * out_len; }
  std::size_t weight_size() const { return filters * in_channels * kernel; }
};

// valid: out_len = in_len - kernel + 1. same: out_len = in_len, with
// (kernel - 1) / 2 zeros on the left and the rest on the right.
inline ConvShape conv_shape(std::size_t in_channels, std::size_t in_len, std::size_t filters,
                            std::size_t kernel, bool same_padding) {
  ConvShape s{in_channels, in_len, filters, kernel, 0, 0};
  if (same_padding) {
    s.pad_left = (kernel - 1) / 2;
    s.out_len = in_len;
  } else {
    s.out_len = in_len >= kernel ? in_len - kernel + 1 : 0;
  }
  return s;
}

namespace detail {

// Output positions t for which input index t + k - pad_left is in range.
inline void tap_range(const ConvShape& s, std::size_t k, std::ptrdiff_t& lo, std::ptrdiff_t& hi) {
  const auto shift = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(s.pad_left);
  lo = std::max<std::ptrdiff_t>(0, -shift);
  hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(s.out_len),
                                static_cast<std::ptrdiff_t>(s.in_len) - shift);
}

}  // namespace detail

// out[f][t] = b[f] + sum_c sum_k w[f][c][k] * in[c][t + k - pad_left]
//
// Accumulates in [t][f] order (weights transposed to [C][K][F]) so the inner
// loop is a broadcast-multiply over filters.
template <typename T>
void conv1d_forward(const ConvShape& s, std::span<const T> in, std::span<const T> w,
                    std::span<const T> b, std::span<T> out) {
  const std::size_t F = s.filters, C = s.in_channels, K = s.kernel, L = s.out_len;
  thread_local std::vector<T> w_t, out_t;
  w_t.resize(C * K * F);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t ck = 0; ck < C * K; ++ck) w_t[ck * F + f] = w[f * C * K + ck];
  }
  out_t.resize(L * F);
  for (std::size_t t = 0; t < L; ++t) std::copy(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(F), out_t.begin() + static_cast<std::ptrdiff_t>(t * F));

  for (std::size_t c = 0; c < C; ++c) {
    const T* x = in.data() + c * s.in_len;
    for (std::size_t k = 0; k < K; ++k) {
      std::ptrdiff_t lo, hi;
      detail::tap_range(s, k, lo, hi);
      const std::ptrdiff_t shift =
          static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(s.pad_left);
      const T* wr = w_t.data() + (c * K + k) * F;
      for (std::ptrdiff_t t = lo; t < hi; ++t) {
        const T xv = x[t + shift];
        if (xv == T(0)) continue;
        T* o = out_t.data() + static_cast<std::size_t>(t) * F;
#pragma omp simd
        for (std::size_t f = 0; f < F; ++f) o[f] += xv * wr[f];
      }
    }
  }
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t t = 0; t < L; ++t) out[f * L + t] = out_t[t * F + f];
  }
}

// d_w, d_b accumulate; d_in (if non-empty) is overwritten.
//
// The weight gradient is formed in [C][K][F] order from a transposed copy of
// d_out so the innermost loop runs over filters without a horizontal
// reduction, then added into d_w's [F][C][K] layout.
template <typename T>
void conv1d_backward(const ConvShape& s, std::span<const T> in, std::span<const T> w,
                     std::span<const T> d_out, std::span<T> d_w, std::span<T> d_b,
                     std::span<T> d_in) {
  const std::size_t F = s.filters, C = s.in_channels, K = s.kernel, L = s.out_len;
  thread_local std::vector<T> g_t, dw_t;
  g_t.resize(L * F);
  dw_t.assign(C * K * F, T(0));

  for (std::size_t f = 0; f < F; ++f) {
    const T* g = d_out.data() + f * L;
    T bias_acc = 0;
    for (std::size_t t = 0; t < L; ++t) {
      bias_acc += g[t];
      g_t[t * F + f] = g[t];
    }
    d_b[f] += bias_acc;
  }

  for (std::size_t c = 0; c < C; ++c) {
    const T* x = in.data() + c * s.in_len;
    for (std::size_t k = 0; k < K; ++k) {
      std::ptrdiff_t lo, hi;
      detail::tap_range(s, k, lo, hi);
      const std::ptrdiff_t shift =
          static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(s.pad_left);
      T* acc = dw_t.data() + (c * K + k) * F;
      for (std::ptrdiff_t t = lo; t < hi; ++t) {
        const T xv = x[t + shift];
        if (xv == T(0)) continue;
        const T* gr = g_t.data() + static_cast<std::size_t>(t) * F;
#pragma omp simd
        for (std::size_t f = 0; f < F; ++f) acc[f] += xv * gr[f];
      }
    }
  }
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t ck = 0; ck < C * K; ++ck) d_w[f * C * K + ck] += dw_t[ck * F + f];
  }

  if (d_in.empty()) return;
  // d_in[c][t + shift] += sum_f w[f][c][k] g[f][t], accumulated as [pos][C]
  // with weights transposed to [K][F][C].
  thread_local std::vector<T> w_kfc, dx_t;
  w_kfc.resize(K * F * C);
  for (std::size_t f = 0; f < F; ++f) {
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t k = 0; k < K; ++k) w_kfc[(k * F + f) * C + c] = w[(f * C + c) * K + k];
    }
  }
  dx_t.assign(s.in_len * C, T(0));
  for (std::size_t k = 0; k < K; ++k) {
    std::ptrdiff_t lo, hi;
    detail::tap_range(s, k, lo, hi);
    const std::ptrdiff_t shift =
        static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(s.pad_left);
    for (std::ptrdiff_t t = lo; t < hi; ++t) {
      T* dx = dx_t.data() + static_cast<std::size_t>(t + shift) * C;
      const T* gr = g_t.data() + static_cast<std::size_t>(t) * F;
      for (std::size_t f = 0; f < F; ++f) {
        const T gv = gr[f];
        if (gv == T(0)) continue;
        const T* wr = w_kfc.data() + (k * F + f) * C;
#pragma omp simd
        for (std::size_t c = 0; c < C; ++c) dx[c] += gv * wr[c];
      }
    }
  }
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t p = 0; p < s.in_len; ++p) d_in[c * s.in_len + p] = dx_t[p * C + c];
  }
}

template <typename T>
void relu_inplace(std::span<T> x) {
  for (T& v : x) v = v > T(0) ? v : T(0);
}

// grad *= (activated > 0); the derivative at 0 is taken as 0.
template <typename T>
void relu_backward(std::span<const T> activated, std::span<T> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activated[i] > T(0))) grad[i] = T(0);
  }
}

// channels x in_len -> channels x floor(in_len / pool). A trailing partial
// window is discarded. `arg` records the flat index into `in` of each max;
// ties resolve to the earliest position.
template <typename T>
void maxpool_forward(std::size_t channels, std::size_t in_len, std::size_t pool,
                     std::span<const T> in, std::span<T> out, std::span<std::uint32_t> arg) {
  const std::size_t out_len = in_len / pool;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t t = 0; t < out_len; ++t) {
      std::size_t best = c * in_len + t * pool;
      for (std::size_t p = 1; p < pool; ++p) {
        const std::size_t idx = c * in_len + t * pool + p;
        if (in[idx] > in[best]) best = idx;
      }
      out[c * out_len + t] = in[best];
      arg[c * out_len + t] = static_cast<std::uint32_t>(best);
    }
  }
}

// d_in is overwritten: zero everywhere except the recorded argmax positions.
template <typename T>
void maxpool_backward(std::span<const T> d_out, std::span<const std::uint32_t> arg,
                      std::span<T> d_in) {
  std::fill(d_in.begin(), d_in.end(), T(0));
  for (std::size_t i = 0; i < d_out.size(); ++i) d_in[arg[i]] += d_out[i];
}

namespace detail {
inline constexpr std::size_t kDenseBlock = 256;
}

// Batched affine map, w stored [n_in x n_out]:
//   out[b][j] = bias[j] + sum_i in[b][i] * w[i][j]
template <typename T>
void dense_forward(std::size_t batch, std::size_t n_in, std::size_t n_out, std::span<const T> in,
                   std::span<const T> w, std::span<const T> bias, std::span<T> out) {
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy(bias.begin(), bias.begin() + static_cast<std::ptrdiff_t>(n_out),
              out.begin() + static_cast<std::ptrdiff_t>(b * n_out));
  }
  for (std::size_t j0 = 0; j0 < n_out; j0 += detail::kDenseBlock) {
    const std::size_t j1 = std::min(n_out, j0 + detail::kDenseBlock);
    for (std::size_t i = 0; i < n_in; ++i) {
      const T* wr = w.data() + i * n_out;
      for (std::size_t b = 0; b < batch; ++b) {
        const T x = in[b * n_in + i];
        if (x == T(0)) continue;  // post-ReLU inputs are often exactly zero
        T* o = out.data() + b * n_out;
#pragma omp simd
        for (std::size_t j = j0; j < j1; ++j) o[j] += x * wr[j];
      }
    }
  }
}

// d_w, d_bias accumulate; d_in (if non-empty) is overwritten.
template <typename T>
void dense_backward(std::size_t batch, std::size_t n_in, std::size_t n_out, std::span<const T> in,
                    std::span<const T> w, std::span<const T> d_out, std::span<T> d_w,
                    std::span<T> d_bias, std::span<T> d_in) {
  for (std::size_t b = 0; b < batch; ++b) {
    const T* g = d_out.data() + b * n_out;
#pragma omp simd
    for (std::size_t j = 0; j < n_out; ++j) d_bias[j] += g[j];
  }
  for (std::size_t j0 = 0; j0 < n_out; j0 += detail::kDenseBlock) {
    const std::size_t j1 = std::min(n_out, j0 + detail::kDenseBlock);
    for (std::size_t i = 0; i < n_in; ++i) {
      T* dw = d_w.data() + i * n_out;
      for (std::size_t b = 0; b < batch; ++b) {
        const T x = in[b * n_in + i];
        if (x == T(0)) continue;
        const T* g = d_out.data() + b * n_out;
#pragma omp simd
        for (std::size_t j = j0; j < j1; ++j) dw[j] += x * g[j];
      }
    }
  }
  if (d_in.empty()) return;
  for (std::size_t i = 0; i < n_in; ++i) {
    const T* wr = w.data() + i * n_out;
    for (std::size_t b = 0; b < batch; ++b) {
      const T* g = d_out.data() + b * n_out;
      T acc = 0;
#pragma omp simd reduction(+ : acc)
      for (std::size_t j = 0; j < n_out; ++j) acc += wr[j] * g[j];
      d_in[b * n_in + i] = acc;
    }
  }
}

// Row-wise softmax with max subtraction.
template <typename T>
void softmax(std::size_t batch, std::size_t classes, std::span<const T> logits, std::span<T> probs) {
  for (std::size_t b = 0; b < batch; ++b) {
    const T* z = logits.data() + b * classes;
    T* p = probs.data() + b * classes;
    const T zmax = *std::max_element(z, z + classes);
    T sum = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      p[c] = std::exp(z[c] - zmax);
      sum += p[c];
    }
    for (std::size_t c = 0; c < classes; ++c) p[c] /= sum;
  }
}

// Summed cross-entropy over the batch (computed via log-sum-exp, in double).
// Writes softmax probabilities and d_logits = scale * (p - onehot(label)).
template <typename T>
double softmax_xent(std::size_t batch, std::size_t classes, std::span<const T> logits,
                    std::span<const std::uint8_t> labels, T scale, std::span<T> probs,
                    std::span<T> d_logits) {
  softmax(batch, classes, logits, probs);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const T* z = logits.data() + b * classes;
    const std::size_t y = labels[b];
    const double zmax = static_cast<double>(*std::max_element(z, z + classes));
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(static_cast<double>(z[c]) - zmax);
    loss += zmax + std::log(sum) - static_cast<double>(z[y]);
    for (std::size_t c = 0; c < classes; ++c) {
      const T target = c == y ? T(1) : T(0);
      d_logits[b * classes + c] = scale * (probs[b * classes + c] - target);
    }
  }
  return loss;
}

}  // namespace qcse::layers
