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

namespace qcse::detail {

// Real-to-complex forward DFT of length n backed by FFTW. Plans are created
// once per length (FFTW_ESTIMATE, so the algorithm choice is reproducible)
// and shared; execute() is safe to call concurrently.
class RealFft {
 public:
  explicit RealFft(std::size_t n);

  std::size_t size() const { return n_; }
  // in: n reals; out: n/2 + 1 bins, X[k] = sum_t in[t] e^{-j 2 pi k t / n}.
  void execute(std::span<const double> in, std::span<std::complex<double>> out) const;

 private:
  std::size_t n_;
  void* plan_;  // fftw_plan, owned by the process-wide cache
};

}  // namespace qcse::detail
