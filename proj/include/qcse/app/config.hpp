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
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "qcse/chirp.hpp"
#include "qcse/corpus.hpp"
#include "qcse/model.hpp"
#include "qcse/signal_io.hpp"
#include "qcse/train.hpp"

namespace qcse::app {

// Every pipeline parameter in one document. The master seed replaces the
// seed fields of the synth and train sections.
struct RunConfig {
  std::uint64_t seed = 0;
  FrameConfig frame;
  ChirpConfig chirp;
  std::optional<double> snr_db;  // empty = clean
  SynthConfig synth;
  ModelConfig model;
  TrainConfig train;

  // Checks every section plus the couplings between them (frame fits the
  // FFT, model input = fft_size / 8, sample rates agree).
  void validate() const;

  SynthConfig synth_config() const;
  TrainConfig train_config() const;
};

nlohmann::json to_json(const RunConfig& cfg);

// Overlays the keys present in `doc` on `base`. Unknown keys are errors.
RunConfig overlay(const RunConfig& base, const nlohmann::json& doc);

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base = {});

// Writes <dir>/run_config.json.
void echo_config(const std::filesystem::path& dir, const RunConfig& cfg);

inline constexpr const char* kConfigFileName = "run_config.json";

}  // namespace qcse::app
