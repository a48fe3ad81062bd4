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
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qcse {

inline constexpr int kDefaultSampleRate = 16000;

// Mono waveform, amplitudes nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  // Throws std::invalid_argument on a non-positive rate or non-finite sample.
  void validate() const;
};

enum class WindowKind { rectangular, hamming, hann };

std::string_view to_string(WindowKind kind);
WindowKind parse_window(std::string_view name);

struct FrameConfig {
  std::size_t frame_len = 1024;
  std::size_t hop = 256;
  WindowKind window = WindowKind::hamming;
  // Buffers at any other rate are rejected; nothing is resampled.
  int sample_rate = kDefaultSampleRate;
  bool remove_dc = false;
  bool pre_emphasis = false;
  double pre_emphasis_coeff = 0.97;

  void validate() const;
};

// n_frames rows of frame_len windowed samples, row-major.
struct FrameMatrix {
  std::size_t n_frames = 0;
  std::size_t frame_len = 0;
  int sample_rate = kDefaultSampleRate;
  std::vector<double> data;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * frame_len, frame_len};
  }
  std::span<double> row(std::size_t i) {
    return {data.data() + i * frame_len, frame_len};
  }
};

// Periodic (DFT-even) windows: w[n] = a - (1 - a) cos(2 pi n / len).
std::vector<double> make_window(WindowKind kind, std::size_t len);

// floor((len - frame_len) / hop) + 1, or 0 when the signal is shorter than a frame.
std::size_t frame_count(std::size_t signal_len, const FrameConfig& cfg);

// Frame i starts at i * hop; a trailing partial frame is dropped. Optional DC
// removal and pre-emphasis run per frame before the window.
FrameMatrix frame_signal(const AudioBuffer& buf, const FrameConfig& cfg);

// 16-bit PCM mono RIFF/WAVE. Samples are scaled by 1/32768. Chunks other than
// "fmt " and "data" are skipped.
AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer parse_wav(std::span<const unsigned char> bytes, std::string_view source);

// Writes 16-bit PCM mono. Values are rounded and clamped to [-32768, 32767]
// at quantization; returns how many samples had to be clamped.
std::size_t write_wav(const std::filesystem::path& path, const AudioBuffer& buf);
std::vector<unsigned char> encode_wav(const AudioBuffer& buf, std::size_t* clipped = nullptr);

// Round-trips samples through 16-bit quantization without touching disk.
AudioBuffer quantize_pcm16(const AudioBuffer& buf, std::size_t* clipped = nullptr);

}  // namespace qcse
