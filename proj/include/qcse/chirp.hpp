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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qcse {

// Radius of the analysis circle, 1 + 0.01. A radius of exactly 1 gives the
// ordinary Fourier spectrum.
inline constexpr double kDefaultRadius = 1.01;
// Added to |X| before taking the log so silent bins floor at -200 dB.
inline constexpr double kLogFloor = 1e-10;

struct ChirpConfig {
  double radius = kDefaultRadius;
  std::size_t fft_size = 1024;  // power of two

  void validate() const;
  // Also checks that a frame of `frame_len` samples fits in fft_size.
  void validate_for(std::size_t frame_len) const;
};

// fft_size bins of X(z) at z_k = r e^{j 2 pi k / fft_size}.
struct ComplexSpectrum {
  std::vector<std::complex<double>> bins;
};

// w[i] = radius^-i for i = 0..n-1.
std::vector<double> chirp_weights(double radius, std::size_t n);

// X(r e^{jw_k}) = sum_n (r^-n x[n]) e^{-j w_k n}: the frame is weighted by
// r^-n, zero-padded to fft_size, and transformed with an FFT. The upper half
// of the result is filled by conjugate symmetry.
ComplexSpectrum chirp_spectrum(std::span<const double> frame, const ChirpConfig& cfg);

// Reference evaluation of the same quantity by direct O(N K) summation of
// x[n] (r e^{jw_k})^-n. Used by tests and `qcse inspect --oracle`.
ComplexSpectrum chirp_spectrum_oracle(std::span<const double> frame, double radius,
                                      std::size_t fft_size);

// 20 log10(|X[k]| + kLogFloor) for k = 0 .. fft_size/2 - 1.
std::vector<double> log_magnitude(const ComplexSpectrum& spec);

// Fused per-frame kernel used by the spectrogram: weights the frame (weights
// must be chirp_weights(radius, frame.size())), transforms, and writes the
// fft_size/2 log-magnitude bins into `out`. `scratch` must hold fft_size reals.
void chirp_log_magnitude(std::span<const double> frame, std::span<const double> weights,
                         std::size_t fft_size, std::span<double> scratch,
                         std::span<std::complex<double>> bins, std::span<double> out);

}  // namespace qcse
