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
#include <vector>

#include "qcse/signal_io.hpp"

namespace qcse {

struct NoiseSpec {
  double snr_db = 0.0;
  std::uint64_t seed = 0;
};

// Mean square amplitude, (1/L) sum x^2.
double signal_power(const AudioBuffer& buf);

// Zero-mean white Gaussian sequence of `n` samples rescaled so that its
// mean square is exactly 1. Depends only on (n, seed).
std::vector<double> unit_power_noise(std::size_t n, std::uint64_t seed);

// buf + sigma * unit_power_noise(len, seed) with
// sigma^2 = signal_power(buf) / 10^(snr_db / 10). The added noise therefore
// carries exactly the requested power, and the realized SNR matches the
// request up to rounding. Nothing is clipped.
AudioBuffer add_awgn(const AudioBuffer& buf, const NoiseSpec& spec);

// 10 log10(P(clean) / P(noisy - clean)).
double realized_snr_db(const AudioBuffer& clean, const AudioBuffer& noisy);

}  // namespace qcse
