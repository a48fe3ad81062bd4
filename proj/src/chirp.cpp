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

#include "qcse/chirp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace qcse {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void check_radius(double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("chirp radius must be positive and finite");
  }
}

void check_frame(std::size_t frame_len, std::size_t fft_size) {
  if (frame_len > fft_size) {
    throw std::invalid_argument("frame of " + std::to_string(frame_len) +
                                " samples exceeds fft_size " + std::to_string(fft_size));
  }
}

}  // namespace

void ChirpConfig::validate() const {
  check_radius(radius);
  if (!is_power_of_two(fft_size) || fft_size < 4) {
    throw std::invalid_argument("fft_size must be a power of two >= 4");
  }
}

void ChirpConfig::validate_for(std::size_t frame_len) const {
  validate();
  check_frame(frame_len, fft_size);
}

std::vector<double> chirp_weights(double radius, std::size_t n) {
  check_radius(radius);
  if (n == 0) throw std::invalid_argument("chirp_weights: length must be positive");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(radius, -static_cast<double>(i));
  return w;
}

ComplexSpectrum chirp_spectrum(std::span<const double> frame, const ChirpConfig& cfg) {
  cfg.validate_for(frame.size());
  const std::size_t k_total = cfg.fft_size;

  std::vector<double> weighted(k_total, 0.0);
  if (!frame.empty()) {
    const std::vector<double> w = chirp_weights(cfg.radius, frame.size());
    for (std::size_t n = 0; n < frame.size(); ++n) weighted[n] = w[n] * frame[n];
  }

  std::vector<std::complex<double>> half(k_total / 2 + 1);
  detail::RealFft(k_total).execute(weighted, half);

  ComplexSpectrum spec;
  spec.bins.resize(k_total);
  for (std::size_t k = 0; k <= k_total / 2; ++k) spec.bins[k] = half[k];
  // Weighted input is real, so the upper half mirrors the lower half.
  for (std::size_t k = k_total / 2 + 1; k < k_total; ++k) {
    spec.bins[k] = std::conj(half[k_total - k]);
  }
  return spec;
}

ComplexSpectrum chirp_spectrum_oracle(std::span<const double> frame, double radius,
                                      std::size_t fft_size) {
  check_radius(radius);
  if (fft_size == 0) throw std::invalid_argument("fft_size must be positive");
  check_frame(frame.size(), fft_size);

  ComplexSpectrum spec;
  spec.bins.resize(fft_size);
  const double base = 2.0 * std::numbers::pi / static_cast<double>(fft_size);
  for (std::size_t k = 0; k < fft_size; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t n = 0; n < frame.size(); ++n) {
      // (r e^{jw})^-n = r^-n e^{-jwn}; k*n is reduced mod fft_size so the
      // angle stays in [0, 2 pi) and keeps full precision.
      const std::size_t m = (k * n) % fft_size;
      const double mag = std::pow(radius, -static_cast<double>(n));
      acc += frame[n] * std::polar(mag, -base * static_cast<double>(m));
    }
    spec.bins[k] = acc;
  }
  return spec;
}

std::vector<double> log_magnitude(const ComplexSpectrum& spec) {
  const std::size_t half = spec.bins.size() / 2;
  std::vector<double> out(half);
  for (std::size_t k = 0; k < half; ++k) {
    out[k] = 20.0 * std::log10(std::abs(spec.bins[k]) + kLogFloor);
  }
  return out;
}

void chirp_log_magnitude(std::span<const double> frame, std::span<const double> weights,
                         std::size_t fft_size, std::span<double> scratch,
                         std::span<std::complex<double>> bins, std::span<double> out) {
  check_frame(frame.size(), fft_size);
  if (weights.size() != frame.size() || scratch.size() != fft_size ||
      bins.size() != fft_size / 2 + 1 || out.size() != fft_size / 2) {
    throw std::invalid_argument("chirp_log_magnitude: buffer size mismatch");
  }
  std::size_t n = 0;
  for (; n < frame.size(); ++n) scratch[n] = weights[n] * frame[n];
  for (; n < fft_size; ++n) scratch[n] = 0.0;
  detail::RealFft(fft_size).execute(scratch, bins);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = 20.0 * std::log10(std::abs(bins[k]) + kLogFloor);
  }
}

}  // namespace qcse
