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

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

// Helpers shared by the unit tests. Nothing here calls into the library, so
// the reference values they produce are independent of the code under test.

namespace testing {

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

// Plain DFT in long double: X[k] = sum_n x[n] e^{-j 2 pi k n / K}, with the
// frame zero-padded to K.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double>& x, std::size_t K) {
  const long double pi = 3.141592653589793238462643383279502884L;
  std::vector<std::complex<double>> out(K);
  for (std::size_t k = 0; k < K; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t n = 0; n < x.size(); ++n) {
      const long double a = -2.0L * pi * static_cast<long double>((k * n) % K) / static_cast<long double>(K);
      re += x[n] * std::cos(a);
      im += x[n] * std::sin(a);
    }
    out[k] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

inline std::vector<double> sine(std::size_t n, double freq_hz, double rate, double amp = 1.0) {
  const double pi = 3.14159265358979323846;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = amp * std::sin(2.0 * pi * freq_hz * static_cast<double>(i) / rate);
  return v;
}

// Relative error of `analytic` against central differences of
// loss_at(offset), floored at 1e-6 in the denominator. Several steps are
// tried and the best agreement counts: a ReLU or pooling switch inside one
// step's bracket spoils that estimate, but a wrong gradient matches none.
template <typename LossAt>
double gradient_error(double analytic, LossAt loss_at) {
  double best = 1e300;
  for (double h : {1e-4, 1e-5, 1e-6}) {
    const double numeric = (loss_at(h) - loss_at(-h)) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    best = std::min(best, std::abs(analytic - numeric) / denom);
  }
  return best;
}

// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("qcse_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
