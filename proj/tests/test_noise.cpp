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


#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "qcse/noise.hpp"
#include "support.hpp"

using namespace qcse;

namespace {

double mean_square(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s / static_cast<double>(v.size());
}

std::vector<double> added(const AudioBuffer& clean, const AudioBuffer& noisy) {
  std::vector<double> n(clean.size());
  for (std::size_t i = 0; i < n.size(); ++i) n[i] = noisy.samples[i] - clean.samples[i];
  return n;
}

}  // namespace

TEST_CASE("signal power") {
  CHECK(signal_power(AudioBuffer{std::vector<double>(100, 1.0), 16000}) == 1.0);
  CHECK(signal_power(AudioBuffer{std::vector<double>(100, 0.0), 16000}) == 0.0);
  // 16000 samples of a 100 Hz sine = 100 whole periods
  const AudioBuffer s{testing::sine(16000, 100.0, 16000.0, 0.7), 16000};
  CHECK(std::abs(signal_power(s) - 0.49 / 2.0) < 1e-9);
  CHECK_THROWS(signal_power(AudioBuffer{{}, 16000}));
}

TEST_CASE("noise power follows the requested SNR") {
  const AudioBuffer s{testing::sine(16000, 100.0, 16000.0, 1.0), 16000};
  SUBCASE("0 dB") {
    const AudioBuffer n = add_awgn(s, NoiseSpec{0.0, 1});
    CHECK(mean_square(added(s, n)) == doctest::Approx(signal_power(s)).epsilon(1e-9));
  }
  SUBCASE("10 dB") {
    const AudioBuffer n = add_awgn(s, NoiseSpec{10.0, 2});
    CHECK(mean_square(added(s, n)) == doctest::Approx(0.05).epsilon(1e-6));
  }
  SUBCASE("5 dB measured") {
    const AudioBuffer n = add_awgn(s, NoiseSpec{5.0, 3});
    const double snr = 10.0 * std::log10(mean_square(s.samples) / mean_square(added(s, n)));
    CHECK(std::abs(snr - 5.0) < 0.1);
    CHECK(realized_snr_db(s, n) == doctest::Approx(snr));
  }
}

TEST_CASE("noise is Gaussian-looking and content independent") {
  const std::vector<double> n = unit_power_noise(16000, 9);
  CHECK(mean_square(n) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(std::accumulate(n.begin(), n.end(), 0.0)) < 1e-8);
  // Kurtosis near 3 and lag-1 correlation near 0 (white).
  double k4 = 0.0, lag = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    k4 += n[i] * n[i] * n[i] * n[i];
    if (i) lag += n[i] * n[i - 1];
  }
  CHECK(std::abs(k4 / 16000.0 - 3.0) < 0.25);
  CHECK(std::abs(lag / 16000.0) < 0.04);

  const AudioBuffer a{testing::sine(16000, 100.0, 16000.0, 1.0), 16000};
  const AudioBuffer b{testing::random_vector(16000, 4), 16000};
  const auto na = added(a, add_awgn(a, NoiseSpec{0.0, 5}));
  const auto nb = added(b, add_awgn(b, NoiseSpec{0.0, 5}));
  // Same seed and length: the same sequence up to the power scale.
  const double scale = std::sqrt(signal_power(a) / signal_power(b));
  for (std::size_t i = 0; i < na.size(); i += 97) CHECK(na[i] == doctest::Approx(nb[i] * scale));
}

TEST_CASE("awgn is deterministic per seed") {
  const AudioBuffer s{testing::random_vector(4000, 1), 16000};
  CHECK(add_awgn(s, NoiseSpec{5.0, 77}).samples == add_awgn(s, NoiseSpec{5.0, 77}).samples);
  CHECK(add_awgn(s, NoiseSpec{5.0, 77}).samples != add_awgn(s, NoiseSpec{5.0, 78}).samples);
}

TEST_CASE("awgn does not clip") {
  const AudioBuffer s{std::vector<double>(1000, 0.9), 16000};
  const AudioBuffer n = add_awgn(s, NoiseSpec{-10.0, 1});
  double peak = 0.0;
  for (double v : n.samples) peak = std::max(peak, std::abs(v));
  CHECK(peak > 1.0);
}

TEST_CASE("awgn errors") {
  CHECK_THROWS_WITH(add_awgn(AudioBuffer{std::vector<double>(100, 0.0), 16000}, NoiseSpec{5.0, 1}),
                    doctest::Contains("power"));
  CHECK_THROWS(add_awgn(AudioBuffer{std::vector<double>(100, 1.0), 16000},
                        NoiseSpec{std::numeric_limits<double>::infinity(), 1}));
}
