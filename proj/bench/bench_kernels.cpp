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


// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS set to compare
// scaling; the outputs of each pair are identical by construction.

#include <benchmark/benchmark.h>

#include <vector>

#include "qcse/corpus.hpp"
#include "qcse/features.hpp"
#include "qcse/model.hpp"
#include "qcse/random.hpp"

using namespace qcse;

namespace {

AudioBuffer speech(double seconds) {
  SynthConfig c;
  c.duration_s = seconds;
  c.seed = 3;
  return synth_normal(c);
}

void BM_SpectrogramSerial(benchmark::State& state) {
  const AudioBuffer a = speech(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spectrogram_serial(a, FrameConfig{}, ChirpConfig{}));
}

void BM_SpectrogramParallel(benchmark::State& state) {
  const AudioBuffer a = speech(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(spectrogram(a, FrameConfig{}, ChirpConfig{}));
}

struct GradFixture {
  ModelParams<float> params = init_params<float>(ModelConfig{}, 1);
  std::vector<float> frames;
  std::vector<std::uint8_t> labels;

  explicit GradFixture(std::size_t batch) : frames(batch * 128), labels(batch) {
    Rng rng(2);
    for (float& v : frames) v = static_cast<float>(rng.normal());
    for (std::size_t i = 0; i < batch; ++i) labels[i] = static_cast<std::uint8_t>(i % 2);
  }
  Batch<float> batch() const { return {frames, labels}; }
};

void BM_GradSerial(benchmark::State& state) {
  GradFixture fx(64);
  ModelParams<float> grad;
  Workspace<float> ws(fx.params.config, 64);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad<float>(fx.params, fx.batch(), grad, ws));
}

void BM_GradChunked(benchmark::State& state) {
  GradFixture fx(64);
  ModelParams<float> grad;
  std::vector<GradChunk<float>> chunks(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad_chunked<float>(fx.params, fx.batch(), chunks, grad));
}

}  // namespace

BENCHMARK(BM_SpectrogramSerial)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpectrogramParallel)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradChunked)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
