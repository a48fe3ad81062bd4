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

#include "qcse/noise.hpp"

#include <cmath>
#include <stdexcept>

#include "qcse/random.hpp"

namespace qcse {

double signal_power(const AudioBuffer& buf) {
  if (buf.empty()) throw std::invalid_argument("signal_power: empty buffer");
  double acc = 0.0;
  for (double x : buf.samples) acc += x * x;
  return acc / static_cast<double>(buf.size());
}

std::vector<double> unit_power_noise(std::size_t n, std::uint64_t seed) {
  if (n == 0) return {};
  Rng rng(seed);
  std::vector<double> noise(n);
  double mean = 0.0;
  for (double& v : noise) {
    v = rng.normal();
    mean += v;
  }
  mean /= static_cast<double>(n);
  double power = 0.0;
  for (double& v : noise) {
    v -= mean;
    power += v * v;
  }
  power /= static_cast<double>(n);
  if (!(power > 0.0)) throw std::runtime_error("unit_power_noise: degenerate draw");
  const double scale = 1.0 / std::sqrt(power);
  for (double& v : noise) v *= scale;
  return noise;
}

AudioBuffer add_awgn(const AudioBuffer& buf, const NoiseSpec& spec) {
  if (!std::isfinite(spec.snr_db)) throw std::invalid_argument("add_awgn: SNR must be finite");
  const double p_signal = signal_power(buf);
  if (!(p_signal > 0.0)) {
    throw std::invalid_argument("add_awgn: zero-power signal, SNR is undefined");
  }
  if (buf.size() < 2) throw std::invalid_argument("add_awgn: need at least two samples");
  const double sigma = std::sqrt(p_signal / std::pow(10.0, spec.snr_db / 10.0));
  const std::vector<double> noise = unit_power_noise(buf.size(), spec.seed);

  AudioBuffer out = buf;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += sigma * noise[i];
  return out;
}

double realized_snr_db(const AudioBuffer& clean, const AudioBuffer& noisy) {
  if (clean.size() != noisy.size() || clean.empty()) {
    throw std::invalid_argument("realized_snr_db: buffers differ in length");
  }
  double p_noise = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double d = noisy.samples[i] - clean.samples[i];
    p_noise += d * d;
  }
  p_noise /= static_cast<double>(clean.size());
  return 10.0 * std::log10(signal_power(clean) / p_noise);
}

}  // namespace qcse
