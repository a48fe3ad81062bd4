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

#include "qcse/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace qcse {

namespace {

Spectrogram empty_spectrogram(const FrameMatrix& frames, const FrameConfig& fcfg,
                              const ChirpConfig& ccfg) {
  Spectrogram s;
  s.n_frames = frames.n_frames;
  s.n_bins = ccfg.fft_size / 2;
  s.sample_rate = frames.sample_rate;
  s.hop = fcfg.hop;
  s.radius = ccfg.radius;
  s.data.resize(s.n_frames * s.n_bins);
  return s;
}

void check_bins(const FeatureMatrix& f, const NormStats& stats) {
  if (f.n_bins != stats.n_bins() || stats.stddev.size() != stats.n_bins()) {
    throw std::invalid_argument("normalization expects " + std::to_string(stats.n_bins()) +
                                " bins, feature matrix has " + std::to_string(f.n_bins));
  }
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::qse ? "QSE" : "QCSE";
}

FeatureKind kind_for_radius(double radius) {
  return radius == 1.0 ? FeatureKind::qse : FeatureKind::qcse;
}

Spectrogram spectrogram_serial(const AudioBuffer& buf, const FrameConfig& fcfg,
                               const ChirpConfig& ccfg) {
  ccfg.validate_for(fcfg.frame_len);
  const FrameMatrix frames = frame_signal(buf, fcfg);
  Spectrogram s = empty_spectrogram(frames, fcfg, ccfg);
  const std::vector<double> weights = chirp_weights(ccfg.radius, fcfg.frame_len);

  std::vector<double> scratch(ccfg.fft_size);
  std::vector<std::complex<double>> bins(ccfg.fft_size / 2 + 1);
  for (std::size_t i = 0; i < s.n_frames; ++i) {
    chirp_log_magnitude(frames.row(i), weights, ccfg.fft_size, scratch, bins,
                        {s.data.data() + i * s.n_bins, s.n_bins});
  }
  return s;
}

Spectrogram spectrogram(const AudioBuffer& buf, const FrameConfig& fcfg,
                        const ChirpConfig& ccfg) {
  ccfg.validate_for(fcfg.frame_len);
  const FrameMatrix frames = frame_signal(buf, fcfg);
  Spectrogram s = empty_spectrogram(frames, fcfg, ccfg);
  const std::vector<double> weights = chirp_weights(ccfg.radius, fcfg.frame_len);
  const auto n_frames = static_cast<std::ptrdiff_t>(s.n_frames);

#pragma omp parallel
  {
    std::vector<double> scratch(ccfg.fft_size);
    std::vector<std::complex<double>> bins(ccfg.fft_size / 2 + 1);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n_frames; ++i) {
      const auto row = static_cast<std::size_t>(i);
      chirp_log_magnitude(frames.row(row), weights, ccfg.fft_size, scratch, bins,
                          {s.data.data() + row * s.n_bins, s.n_bins});
    }
  }
  return s;
}

FeatureMatrix quarter(const Spectrogram& spec) {
  if (spec.n_bins == 0 || spec.n_bins % 4 != 0) {
    throw std::invalid_argument("spectrogram bin count " + std::to_string(spec.n_bins) +
                                " is not divisible by 4");
  }
  FeatureMatrix f;
  f.n_frames = spec.n_frames;
  f.n_bins = spec.n_bins / 4;
  f.kind = kind_for_radius(spec.radius);
  f.radius = spec.radius;
  f.data.resize(f.n_frames * f.n_bins);
  for (std::size_t i = 0; i < f.n_frames; ++i) {
    const std::span<const double> src = spec.row(i);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(f.n_bins),
              f.row(i).begin());
  }
  return f;
}

FeatureMatrix extract(const AudioBuffer& buf, const FrameConfig& fcfg, const ChirpConfig& ccfg) {
  return quarter(spectrogram(buf, fcfg, ccfg));
}

NormStats fit_norm(std::span<const FeatureMatrix> features) {
  if (features.empty()) throw std::invalid_argument("fit_norm: empty feature collection");
  const std::size_t bins = features.front().n_bins;
  NormStats stats;
  stats.mean.assign(bins, 0.0);
  stats.stddev.assign(bins, 0.0);

  std::size_t frames = 0;
  for (const FeatureMatrix& f : features) {
    if (f.n_bins != bins) throw std::invalid_argument("fit_norm: inconsistent bin counts");
    for (std::size_t i = 0; i < f.n_frames; ++i) {
      const auto row = f.row(i);
      for (std::size_t k = 0; k < bins; ++k) stats.mean[k] += row[k];
    }
    frames += f.n_frames;
  }
  if (frames == 0) throw std::invalid_argument("fit_norm: no frames");
  for (double& m : stats.mean) m /= static_cast<double>(frames);

  for (const FeatureMatrix& f : features) {
    for (std::size_t i = 0; i < f.n_frames; ++i) {
      const auto row = f.row(i);
      for (std::size_t k = 0; k < bins; ++k) {
        const double d = row[k] - stats.mean[k];
        stats.stddev[k] += d * d;
      }
    }
  }
  for (double& s : stats.stddev) {
    s = std::max(std::sqrt(s / static_cast<double>(frames)), kStdFloor);
  }
  return stats;
}

FeatureMatrix apply_norm(const FeatureMatrix& f, const NormStats& stats) {
  check_bins(f, stats);
  FeatureMatrix out = f;
  for (std::size_t i = 0; i < out.n_frames; ++i) {
    auto row = out.row(i);
    for (std::size_t k = 0; k < out.n_bins; ++k) {
      row[k] = (row[k] - stats.mean[k]) / stats.stddev[k];
    }
  }
  return out;
}

FeatureMatrix invert_norm(const FeatureMatrix& f, const NormStats& stats) {
  check_bins(f, stats);
  FeatureMatrix out = f;
  for (std::size_t i = 0; i < out.n_frames; ++i) {
    auto row = out.row(i);
    for (std::size_t k = 0; k < out.n_bins; ++k) {
      row[k] = row[k] * stats.stddev[k] + stats.mean[k];
    }
  }
  return out;
}

}  // namespace qcse
