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


#include "qcse/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace qcse::app {

using nlohmann::json;

namespace {

// Reads the keys of one JSON object into existing fields, rejecting any key
// nobody asked for once finish() runs.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw std::invalid_argument(path_ + ": expected an object");
  }

  template <typename T>
  void read(const char* key, T& field) {
    seen_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    try {
      field = it->get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument(path_ + "." + key + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void read_enum(const char* key, T& field, Parse parse) {
    seen_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    if (!it->is_string()) throw std::invalid_argument(path_ + "." + key + ": expected a string");
    try {
      field = parse(it->get<std::string>());
    } catch (const std::exception& e) {
      throw std::invalid_argument(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw std::invalid_argument(path_ + ": unknown key '" + key + "'");
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

void read_conv(Section& parent, const char* key, ConvLayerConfig& c) {
  const json* node = parent.child(key);
  if (!node) return;
  Section s(*node, parent.path(key));
  s.read("filters", c.filters);
  s.read("kernel", c.kernel);
  s.finish();
}

}  // namespace

void RunConfig::validate() const {
  frame.validate();
  chirp.validate_for(frame.frame_len);
  synth_config().validate();
  model.validate();
  train.validate();
  if (model.input_bins != chirp.fft_size / 8) {
    throw std::invalid_argument("model.input_bins (" + std::to_string(model.input_bins) +
                                ") must equal chirp.fft_size / 8 (" +
                                std::to_string(chirp.fft_size / 8) + ")");
  }
  if (synth.sample_rate != frame.sample_rate) {
    throw std::invalid_argument("synth.sample_rate and frame.sample_rate differ");
  }
  if (snr_db && !std::isfinite(*snr_db)) throw std::invalid_argument("snr_db must be finite");
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig s = synth;
  s.seed = seed;
  return s;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

json to_json(const RunConfig& c) {
  json formants = json::array();
  for (const Formant& f : c.synth.formants) {
    formants.push_back({{"center_hz", f.center_hz}, {"bandwidth_hz", f.bandwidth_hz}, {"gain_db", f.gain_db}});
  }
  json doc;
  doc["seed"] = c.seed;
  doc["frame"] = {{"frame_len", c.frame.frame_len},
                  {"hop", c.frame.hop},
                  {"window", std::string(to_string(c.frame.window))},
                  {"sample_rate", c.frame.sample_rate},
                  {"remove_dc", c.frame.remove_dc},
                  {"pre_emphasis", c.frame.pre_emphasis},
                  {"pre_emphasis_coeff", c.frame.pre_emphasis_coeff}};
  doc["chirp"] = {{"radius", c.chirp.radius}, {"fft_size", c.chirp.fft_size}};
  doc["noise"] = {{"snr_db", c.snr_db ? json(*c.snr_db) : json(nullptr)}};
  doc["synth"] = {{"sample_rate", c.synth.sample_rate},
                  {"duration_s", c.synth.duration_s},
                  {"pitch_min_hz", c.synth.pitch_min_hz},
                  {"pitch_max_hz", c.synth.pitch_max_hz},
                  {"formants", formants},
                  {"whisper_shift", c.synth.whisper_shift},
                  {"whisper_widening", c.synth.whisper_widening},
                  {"whisper_gain_db", c.synth.whisper_gain_db},
                  {"pitch_jitter", c.synth.pitch_jitter},
                  {"amplitude_jitter", c.synth.amplitude_jitter},
                  {"glottal_rolloff", c.synth.glottal_rolloff},
                  {"peak", c.synth.peak}};
  doc["model"] = {{"input_bins", c.model.input_bins},
                  {"conv1", {{"filters", c.model.conv1.filters}, {"kernel", c.model.conv1.kernel}}},
                  {"conv2", {{"filters", c.model.conv2.filters}, {"kernel", c.model.conv2.kernel}}},
                  {"pool_size", c.model.pool_size},
                  {"padding", std::string(to_string(c.model.padding))},
                  {"dense_hidden", c.model.dense_hidden},
                  {"classes", c.model.classes}};
  doc["train"] = {{"learning_rate", c.train.learning_rate},
                  {"batch_size", c.train.batch_size},
                  {"max_epochs", c.train.max_epochs},
                  {"patience", c.train.patience},
                  {"optimizer", std::string(to_string(c.train.optimizer))},
                  {"momentum", c.train.momentum},
                  {"validation_fraction", c.train.validation_fraction},
                  {"grad_chunks", c.train.grad_chunks}};
  return doc;
}

RunConfig overlay(const RunConfig& base, const json& doc) {
  RunConfig c = base;
  Section root(doc, "config");
  root.read("seed", c.seed);

  if (const json* n = root.child("frame")) {
    Section s(*n, "frame");
    s.read("frame_len", c.frame.frame_len);
    s.read("hop", c.frame.hop);
    s.read_enum("window", c.frame.window, parse_window);
    s.read("sample_rate", c.frame.sample_rate);
    s.read("remove_dc", c.frame.remove_dc);
    s.read("pre_emphasis", c.frame.pre_emphasis);
    s.read("pre_emphasis_coeff", c.frame.pre_emphasis_coeff);
    s.finish();
  }
  if (const json* n = root.child("chirp")) {
    Section s(*n, "chirp");
    s.read("radius", c.chirp.radius);
    s.read("fft_size", c.chirp.fft_size);
    s.finish();
  }
  if (const json* n = root.child("noise")) {
    Section s(*n, "noise");
    if (const json* v = s.child("snr_db")) {
      if (v->is_null()) {
        c.snr_db.reset();
      } else if (v->is_number()) {
        c.snr_db = v->get<double>();
      } else {
        throw std::invalid_argument("noise.snr_db: expected a number or null");
      }
    }
    s.finish();
  }
  if (const json* n = root.child("synth")) {
    Section s(*n, "synth");
    s.read("sample_rate", c.synth.sample_rate);
    s.read("duration_s", c.synth.duration_s);
    s.read("pitch_min_hz", c.synth.pitch_min_hz);
    s.read("pitch_max_hz", c.synth.pitch_max_hz);
    if (const json* f = s.child("formants")) {
      if (!f->is_array()) throw std::invalid_argument("synth.formants: expected an array");
      c.synth.formants.clear();
      for (std::size_t i = 0; i < f->size(); ++i) {
        Formant fm;
        Section fs((*f)[i], "synth.formants[" + std::to_string(i) + "]");
        fs.read("center_hz", fm.center_hz);
        fs.read("bandwidth_hz", fm.bandwidth_hz);
        fs.read("gain_db", fm.gain_db);
        fs.finish();
        c.synth.formants.push_back(fm);
      }
    }
    s.read("whisper_shift", c.synth.whisper_shift);
    s.read("whisper_widening", c.synth.whisper_widening);
    s.read("whisper_gain_db", c.synth.whisper_gain_db);
    s.read("pitch_jitter", c.synth.pitch_jitter);
    s.read("amplitude_jitter", c.synth.amplitude_jitter);
    s.read("glottal_rolloff", c.synth.glottal_rolloff);
    s.read("peak", c.synth.peak);
    s.finish();
  }
  if (const json* n = root.child("model")) {
    Section s(*n, "model");
    s.read("input_bins", c.model.input_bins);
    read_conv(s, "conv1", c.model.conv1);
    read_conv(s, "conv2", c.model.conv2);
    s.read("pool_size", c.model.pool_size);
    s.read_enum("padding", c.model.padding, parse_padding);
    s.read("dense_hidden", c.model.dense_hidden);
    s.read("classes", c.model.classes);
    s.finish();
  }
  if (const json* n = root.child("train")) {
    Section s(*n, "train");
    s.read("learning_rate", c.train.learning_rate);
    s.read("batch_size", c.train.batch_size);
    s.read("max_epochs", c.train.max_epochs);
    s.read("patience", c.train.patience);
    s.read_enum("optimizer", c.train.optimizer, parse_optimizer);
    s.read("momentum", c.train.momentum);
    s.read("validation_fraction", c.train.validation_fraction);
    s.read("grad_chunks", c.train.grad_chunks);
    s.finish();
  }
  root.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  try {
    return overlay(base, doc);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void echo_config(const std::filesystem::path& dir, const RunConfig& cfg) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path p = dir / kConfigFileName;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << to_json(cfg).dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace qcse::app
