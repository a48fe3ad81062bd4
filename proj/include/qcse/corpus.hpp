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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qcse/features.hpp"
#include "qcse/label.hpp"
#include "qcse/signal_io.hpp"

namespace qcse {

// ---------------------------------------------------------------------------
// Manifests

enum class Split { train, test };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct ManifestEntry {
  std::string path;  // as written; relative paths resolve against the manifest directory
  Label label = Label::normal;
  Split split = Split::train;
};

// CSV with the header `path,label,split`. Blank lines are skipped; paths may
// not contain commas.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::filesystem::path resolve_entry(const std::filesystem::path& manifest_path, const ManifestEntry& e);

// ---------------------------------------------------------------------------
// Feature files
//
//   "QCSE" | u8 version (1) | u8 kind (0 QSE, 1 QCSE) | f64 radius |
//   u32 n_frames | u32 n_bins | n_frames * n_bins f32, row-major
//
// All fields little-endian. Values are narrowed to single precision on
// write; anything read back re-encodes to the same bytes.

inline constexpr std::uint8_t kFeatureFileVersion = 1;

std::vector<std::uint8_t> encode_features(const FeatureMatrix& f);
FeatureMatrix decode_features(std::vector<std::uint8_t> bytes, const std::string& source);
void write_features(const std::filesystem::path& path, const FeatureMatrix& f);
FeatureMatrix read_features(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic parallel corpus
//
// Normal utterances: a jittered impulse train at a seeded pitch, a one-pole
// glottal roll-off, then a cascade of peaking formant stages. Whispered
// utterances: white Gaussian noise through the same cascade with formants
// moved up, widened, and attenuated. Each formant stage is
//   y = x + (10^(gain_db/20) - 1) * bandpass(x)
// with a constant-peak-gain two-pole resonator, so gain_db is the height of
// the formant above the flat floor.

struct Formant {
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
  double gain_db = 0.0;
};

struct SynthConfig {
  int sample_rate = kDefaultSampleRate;
  double duration_s = 1.0;
  double pitch_min_hz = 90.0;
  double pitch_max_hz = 220.0;
  std::vector<Formant> formants{{700.0, 80.0, 20.0}, {1220.0, 100.0, 15.0}, {2600.0, 120.0, 10.0}};
  double whisper_shift = 1.15;        // formant centre multiplier
  double whisper_widening = 1.8;      // bandwidth multiplier
  double whisper_gain_db = -6.0;      // added to every formant gain
  double pitch_jitter = 0.03;         // per-period, uniform +/-
  double amplitude_jitter = 0.10;     // per-pulse, uniform +/-
  double glottal_rolloff = 0.9;       // one-pole coefficient on the pulse train
  double peak = 0.5;
  std::uint64_t seed = 0;

  std::size_t n_samples() const;
  void validate() const;
};

// The pitch synth_normal uses for cfg.seed.
double draw_pitch(const SynthConfig& cfg);

AudioBuffer synth_normal(const SynthConfig& cfg);
AudioBuffer synth_whisper(const SynthConfig& cfg);

// Writes <out>/{train,test}/{normal,whisper}_NNNN.wav plus <out>/manifest.csv
// and returns the manifest path. Pair p (train pairs first) uses seed
// derive_seed(cfg.seed, synth, p) for both its normal and whispered member.
// Generation runs in parallel over pairs.
std::filesystem::path build_synthetic_corpus(std::size_t n_per_class_train,
                                             std::size_t n_per_class_test, const SynthConfig& cfg,
                                             const std::filesystem::path& out_dir);

// In-memory version used by the experiment driver; same seeds and ordering
// as the files written above (train pairs, then test pairs; normal first).
struct SynthUtterance {
  AudioBuffer audio;
  Label label = Label::normal;
  Split split = Split::train;
  std::size_t pair = 0;
};
std::vector<SynthUtterance> synthesize_corpus(std::size_t n_per_class_train,
                                              std::size_t n_per_class_test, const SynthConfig& cfg);

}  // namespace qcse
