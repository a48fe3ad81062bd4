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

#include "qcse/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qcse/binary_io.hpp"
#include "qcse/random.hpp"

namespace qcse {

namespace {

constexpr std::string_view kFeatureMagic = "QCSE";

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Cascade of peaking stages, applied in place.
void formant_cascade(std::vector<double>& x, const std::vector<Formant>& formants, int rate) {
  for (const Formant& f : formants) {
    const double r = std::exp(-std::numbers::pi * f.bandwidth_hz / rate);
    const double theta = 2.0 * std::numbers::pi * f.center_hz / rate;
    const double a1 = -2.0 * r * std::cos(theta);
    const double a2 = r * r;
    const double b0 = (1.0 - r * r) / 2.0;  // numerator b0 (1 - z^-2)
    const double lift = std::pow(10.0, f.gain_db / 20.0) - 1.0;
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (double& v : x) {
      const double bp = b0 * (v - x2) - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = bp;
      v += lift * bp;
    }
  }
}

void normalize_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m == 0.0) return;
  const double g = peak / m;
  for (double& v : x) v *= g;
}

std::string item_name(Label label, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%04zu.wav", std::string(to_string(label)).c_str(), index);
  return buf;
}

}  // namespace

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + std::string(s) + "'");
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<ManifestEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!have_header) {
      if (fields != std::vector<std::string>{"path", "label", "split"}) {
        throw std::runtime_error(where + ": missing header 'path,label,split'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw std::runtime_error(where + ": expected 3 fields, found " + std::to_string(fields.size()));
    }
    if (fields[0].empty()) throw std::runtime_error(where + ": empty path");
    ManifestEntry e;
    e.path = fields[0];
    try {
      e.label = parse_label(fields[1]);
      e.split = parse_split(fields[2]);
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error(where + ": " + err.what());
    }
    entries.push_back(std::move(e));
  }
  if (!have_header) throw std::runtime_error(path.string() + ": empty manifest");
  return entries;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
  out << "path,label,split\n";
  for (const ManifestEntry& e : entries) {
    if (e.path.empty() || e.path.find(',') != std::string::npos) {
      throw std::invalid_argument("manifest paths must be non-empty and comma-free: '" + e.path + "'");
    }
    out << e.path << ',' << to_string(e.label) << ',' << to_string(e.split) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::filesystem::path resolve_entry(const std::filesystem::path& manifest_path, const ManifestEntry& e) {
  const std::filesystem::path p(e.path);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

std::vector<std::uint8_t> encode_features(const FeatureMatrix& f) {
  if (f.data.size() != f.n_frames * f.n_bins) throw std::invalid_argument("encode_features: shape mismatch");
  ByteWriter w;
  w.put_bytes(kFeatureMagic);
  w.put_u8(kFeatureFileVersion);
  w.put_u8(static_cast<std::uint8_t>(f.kind));
  w.put_f64(f.radius);
  w.put_u32(static_cast<std::uint32_t>(f.n_frames));
  w.put_u32(static_cast<std::uint32_t>(f.n_bins));
  for (double v : f.data) w.put_f32(static_cast<float>(v));
  return w.bytes();
}

FeatureMatrix decode_features(std::vector<std::uint8_t> bytes, const std::string& source) {
  ByteReader r(std::move(bytes), source);
  if (r.get_bytes(4, "magic") != kFeatureMagic) {
    throw FormatError(source + ": bad magic (expected \"QCSE\", not a feature file)");
  }
  const std::uint8_t version = r.get_u8("version");
  if (version != kFeatureFileVersion) {
    throw FormatError(source + ": unsupported feature file version " + std::to_string(version) +
                      " (expected " + std::to_string(kFeatureFileVersion) + ")");
  }
  const std::uint8_t kind = r.get_u8("feature_kind");
  if (kind > 1) throw FormatError(source + ": unknown feature kind " + std::to_string(kind));
  FeatureMatrix f;
  f.kind = static_cast<FeatureKind>(kind);
  f.radius = r.get_f64("radius");
  f.n_frames = r.get_u32("n_frames");
  f.n_bins = r.get_u32("n_bins");
  const std::size_t count = f.n_frames * f.n_bins;
  r.require(count * 4, "feature payload");
  f.data.resize(count);
  for (double& v : f.data) v = r.get_f32("feature payload");
  if (r.remaining() != 0) {
    throw FormatError(source + ": " + std::to_string(r.remaining()) + " trailing bytes after payload");
  }
  return f;
}

void write_features(const std::filesystem::path& path, const FeatureMatrix& f) {
  write_binary_file(path, encode_features(f));
}

FeatureMatrix read_features(const std::filesystem::path& path) {
  return decode_features(read_binary_file(path), path.string());
}

std::size_t SynthConfig::n_samples() const {
  return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
}

void SynthConfig::validate() const {
  if (sample_rate <= 0 || !(duration_s > 0.0)) {
    throw std::invalid_argument("synth: sample rate and duration must be positive");
  }
  if (!(pitch_min_hz > 0.0 && pitch_min_hz <= pitch_max_hz)) {
    throw std::invalid_argument("synth: invalid pitch range");
  }
  if (formants.empty()) throw std::invalid_argument("synth: no formants");
  double lowest = formants.front().center_hz;
  for (const Formant& f : formants) {
    lowest = std::min(lowest, f.center_hz);
    if (!(f.bandwidth_hz > 0.0) || !(f.center_hz > 0.0) ||
        f.center_hz * whisper_shift >= sample_rate / 2.0) {
      throw std::invalid_argument("synth: formant outside (0, Nyquist) or non-positive bandwidth");
    }
  }
  if (!(pitch_max_hz < lowest)) throw std::invalid_argument("synth: pitch must lie below the first formant");
  if (!(whisper_shift > 1.0)) throw std::invalid_argument("synth: whisper formant shift must exceed 1");
  if (!(whisper_widening > 1.0)) throw std::invalid_argument("synth: whisper bandwidth widening must exceed 1");
  if (!(pitch_jitter >= 0.0 && pitch_jitter < 0.5) || !(amplitude_jitter >= 0.0 && amplitude_jitter < 1.0)) {
    throw std::invalid_argument("synth: jitter out of range");
  }
  if (!(glottal_rolloff >= 0.0 && glottal_rolloff < 1.0)) {
    throw std::invalid_argument("synth: glottal roll-off must be in [0, 1)");
  }
  if (!(peak > 0.0 && peak <= 1.0)) throw std::invalid_argument("synth: peak must be in (0, 1]");
}

double draw_pitch(const SynthConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, SeedStream::synth, 0));
  return rng.uniform(cfg.pitch_min_hz, cfg.pitch_max_hz);
}

AudioBuffer synth_normal(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, SeedStream::synth, 0));
  const double pitch = rng.uniform(cfg.pitch_min_hz, cfg.pitch_max_hz);
  const double period = cfg.sample_rate / pitch;
  const std::size_t n = cfg.n_samples();

  std::vector<double> x(n, 0.0);
  // Pulses at fractional positions, split linearly across neighbouring samples.
  double t = rng.uniform(0.0, period);
  while (t < static_cast<double>(n)) {
    const double amp = 1.0 + rng.uniform(-cfg.amplitude_jitter, cfg.amplitude_jitter);
    const auto i = static_cast<std::size_t>(t);
    const double frac = t - static_cast<double>(i);
    x[i] += amp * (1.0 - frac);
    if (i + 1 < n) x[i + 1] += amp * frac;
    t += period * (1.0 + rng.uniform(-cfg.pitch_jitter, cfg.pitch_jitter));
  }
  for (std::size_t i = 1; i < n; ++i) x[i] += cfg.glottal_rolloff * x[i - 1];

  formant_cascade(x, cfg.formants, cfg.sample_rate);
  normalize_peak(x, cfg.peak);
  return AudioBuffer{std::move(x), cfg.sample_rate};
}

AudioBuffer synth_whisper(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, SeedStream::synth, 1));
  std::vector<double> x(cfg.n_samples());
  for (double& v : x) v = rng.normal();

  std::vector<Formant> shifted = cfg.formants;
  for (Formant& f : shifted) {
    f.center_hz *= cfg.whisper_shift;
    f.bandwidth_hz *= cfg.whisper_widening;
    f.gain_db += cfg.whisper_gain_db;
  }
  formant_cascade(x, shifted, cfg.sample_rate);
  normalize_peak(x, cfg.peak);
  return AudioBuffer{std::move(x), cfg.sample_rate};
}

std::vector<SynthUtterance> synthesize_corpus(std::size_t n_per_class_train,
                                              std::size_t n_per_class_test, const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t pairs = n_per_class_train + n_per_class_test;
  std::vector<SynthUtterance> out(2 * pairs);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t pi = 0; pi < static_cast<std::ptrdiff_t>(pairs); ++pi) {
    const auto p = static_cast<std::size_t>(pi);
    SynthConfig item = cfg;
    item.seed = derive_seed(cfg.seed, SeedStream::synth, p);
    const Split split = p < n_per_class_train ? Split::train : Split::test;
    out[2 * p] = SynthUtterance{synth_normal(item), Label::normal, split, p};
    out[2 * p + 1] = SynthUtterance{synth_whisper(item), Label::whisper, split, p};
  }
  return out;
}

std::filesystem::path build_synthetic_corpus(std::size_t n_per_class_train,
                                             std::size_t n_per_class_test, const SynthConfig& cfg,
                                             const std::filesystem::path& out_dir) {
  if (n_per_class_train == 0 || n_per_class_test == 0) {
    throw std::invalid_argument("synthetic corpus needs at least one utterance per class and split");
  }
  cfg.validate();
  std::filesystem::create_directories(out_dir / "train");
  std::filesystem::create_directories(out_dir / "test");

  const std::size_t pairs = n_per_class_train + n_per_class_test;
  std::vector<ManifestEntry> entries(2 * pairs);
  std::vector<std::string> errors(pairs);

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t pi = 0; pi < static_cast<std::ptrdiff_t>(pairs); ++pi) {
    const auto p = static_cast<std::size_t>(pi);
    const Split split = p < n_per_class_train ? Split::train : Split::test;
    const std::size_t index = split == Split::train ? p : p - n_per_class_train;
    SynthConfig item = cfg;
    item.seed = derive_seed(cfg.seed, SeedStream::synth, p);
    try {
      for (Label label : {Label::normal, Label::whisper}) {
        const std::string rel = std::string(to_string(split)) + "/" + item_name(label, index);
        const AudioBuffer audio = label == Label::normal ? synth_normal(item) : synth_whisper(item);
        write_wav(out_dir / rel, audio);
        entries[2 * p + class_index(label)] = ManifestEntry{rel, label, split};
      }
    } catch (const std::exception& e) {
      errors[p] = e.what();
    }
  }
  for (const std::string& e : errors) {
    if (!e.empty()) throw std::runtime_error("synthetic corpus generation failed: " + e);
  }

  const std::filesystem::path manifest = out_dir / "manifest.csv";
  write_manifest(manifest, entries);
  return manifest;
}

}  // namespace qcse
