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
#include <vector>

#include "qcse/features.hpp"
#include "qcse/model.hpp"

namespace qcse {

// What a model file holds: the network and the normalization it was trained with.
struct TrainedModel {
  ModelParams<float> params;
  NormStats norm;
};

// Model file layout, little-endian throughout:
//
//   "QCM1"
//   ModelConfig   9 x u32: input_bins, conv1.filters, conv1.kernel,
//                 conv2.filters, conv2.kernel, pool_size, padding
//                 (0 valid, 1 same), dense_hidden, classes
//   NormStats     u32 n_bins, n_bins x f64 mean, n_bins x f64 stddev
//   parameters    every tensor in TensorId order as f32
std::vector<std::uint8_t> encode_model(const TrainedModel& model);
TrainedModel decode_model(std::vector<std::uint8_t> bytes, const std::string& source);

void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace qcse
