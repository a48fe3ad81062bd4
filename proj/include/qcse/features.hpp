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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qcse/chirp.hpp"
#include "qcse/signal_io.hpp"

namespace qcse {

// Per-frame log-magnitude (dB) chirp spectra: n_frames x n_bins, row-major,
// n_bins = fft_size / 2.
struct Spectrogram {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  int sample_rate = kDefaultSampleRate;
  std::size_t hop = 0;
  double radius = 1.0;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * n_bins, n_bins};
  }
};

// QSE when computed on the unit circle, QCSE for any other radius. The
// numeric values are the on-disk tag.
enum class FeatureKind : std::uint8_t { qse = 0, qcse = 1 };

std::string_view to_string(FeatureKind kind);
FeatureKind kind_for_radius(double radius);

// The first quarter of each spectrogram row (K / 8 bins for FFT size K).
// This is the network input.
struct FeatureMatrix {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  FeatureKind kind = FeatureKind::qcse;
  double radius = kDefaultRadius;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * n_bins, n_bins};
  }
  std::span<double> row(std::size_t i) { return {data.data() + i * n_bins, n_bins}; }
};

inline constexpr double kStdFloor = 1e-6;

// Per-bin statistics fitted on the training split.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  std::size_t n_bins() const { return mean.size(); }
};

// OpenMP over frames. Each frame is independent, so the result is identical
// to spectrogram_serial for any thread count.
Spectrogram spectrogram(const AudioBuffer& buf, const FrameConfig& fcfg, const ChirpConfig& ccfg);
// Single-threaded reference kept for tests and benchmarks.
Spectrogram spectrogram_serial(const AudioBuffer& buf, const FrameConfig& fcfg,
                               const ChirpConfig& ccfg);

// Keeps bins [0, K/4) of every frame, unchanged.
FeatureMatrix quarter(const Spectrogram& spec);

// quarter(spectrogram(buf)); kind derives from the radius.
FeatureMatrix extract(const AudioBuffer& buf, const FrameConfig& fcfg, const ChirpConfig& ccfg);

NormStats fit_norm(std::span<const FeatureMatrix> features);
FeatureMatrix apply_norm(const FeatureMatrix& f, const NormStats& stats);
FeatureMatrix invert_norm(const FeatureMatrix& f, const NormStats& stats);

}  // namespace qcse
