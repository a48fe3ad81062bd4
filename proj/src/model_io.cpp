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

#include "qcse/model_io.hpp"

#include <cmath>

#include "qcse/binary_io.hpp"

namespace qcse {

namespace {
constexpr std::string_view kModelMagic = "QCM1";
}

std::vector<std::uint8_t> encode_model(const TrainedModel& model) {
  const ModelParams<float>& p = model.params;
  const ModelConfig& c = p.config;
  if (p.values.size() != param_count(c)) throw std::invalid_argument("encode_model: parameter count mismatch");
  if (model.norm.n_bins() != c.input_bins || model.norm.stddev.size() != c.input_bins) {
    throw std::invalid_argument("encode_model: normalization does not match input_bins");
  }
  ByteWriter w;
  w.put_bytes(kModelMagic);
  for (std::uint32_t v : {c.input_bins, c.conv1.filters, c.conv1.kernel, c.conv2.filters,
                          c.conv2.kernel, c.pool_size, static_cast<std::uint32_t>(c.padding),
                          c.dense_hidden, c.classes}) {
    w.put_u32(v);
  }
  w.put_u32(static_cast<std::uint32_t>(model.norm.n_bins()));
  for (double m : model.norm.mean) w.put_f64(m);
  for (double s : model.norm.stddev) w.put_f64(s);
  for (float v : p.values) w.put_f32(v);
  return w.bytes();
}

TrainedModel decode_model(std::vector<std::uint8_t> bytes, const std::string& source) {
  ByteReader r(std::move(bytes), source);
  const std::string magic = r.get_bytes(4, "magic");
  if (magic != kModelMagic) {
    throw FormatError(source + ": bad magic (expected \"QCM1\", not a model file)");
  }
  ModelConfig c;
  c.input_bins = r.get_u32("input_bins");
  c.conv1.filters = r.get_u32("conv1.filters");
  c.conv1.kernel = r.get_u32("conv1.kernel");
  c.conv2.filters = r.get_u32("conv2.filters");
  c.conv2.kernel = r.get_u32("conv2.kernel");
  c.pool_size = r.get_u32("pool_size");
  const std::uint32_t padding = r.get_u32("padding");
  if (padding > 1) throw FormatError(source + ": unknown padding code " + std::to_string(padding));
  c.padding = static_cast<Padding>(padding);
  c.dense_hidden = r.get_u32("dense_hidden");
  c.classes = r.get_u32("classes");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(source + ": invalid model configuration: " + e.what());
  }

  TrainedModel model;
  const std::uint32_t bins = r.get_u32("norm.n_bins");
  if (bins != c.input_bins) {
    throw FormatError(source + ": normalization has " + std::to_string(bins) +
                      " bins, model input has " + std::to_string(c.input_bins));
  }
  const std::size_t n_params = param_count(c);
  r.require(std::size_t{bins} * 16 + n_params * 4, "normalization and parameters");
  model.norm.mean.resize(bins);
  model.norm.stddev.resize(bins);
  for (double& m : model.norm.mean) m = r.get_f64("norm.mean");
  for (double& s : model.norm.stddev) s = r.get_f64("norm.stddev");

  model.params = ModelParams<float>::zeros(c);
  for (float& v : model.params.values) v = r.get_f32("parameters");
  if (r.remaining() != 0) {
    throw FormatError(source + ": " + std::to_string(r.remaining()) + " trailing bytes after parameters");
  }
  for (float v : model.params.values) {
    if (!std::isfinite(v)) throw FormatError(source + ": non-finite parameter value");
  }
  return model;
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  write_binary_file(path, encode_model(model));
}

TrainedModel load_model(const std::filesystem::path& path) {
  return decode_model(read_binary_file(path), path.string());
}

}  // namespace qcse
