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

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace qcse {

// Every random decision in the toolkit is driven by std::mt19937_64, whose
// output sequence is fixed by the C++ standard. Conversions to uniform and
// Gaussian variates are done here rather than through the <random>
// distributions, whose algorithms are implementation-defined.
//
//   uniform():  (u64 >> 11) * 2^-53                      in [0, 1)
//   normal():   Box-Muller on (1 - uniform(), uniform()),  both outputs used
//   below(n):   rejection sampling on masked low bits,     in [0, n)
//
// Sub-seeds come from derive_seed(), a SplitMix64 chain over
// (master, stream, index), so one master seed fixes an entire experiment.

enum class SeedStream : std::uint64_t {
  synth = 1,
  noise = 2,
  init = 3,
  shuffle = 4,
  split = 5,
};

std::uint64_t splitmix64(std::uint64_t x);

// splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index)
std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                          std::uint64_t index);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Fisher-Yates from the back, using Rng::below; identical on every platform.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace qcse
