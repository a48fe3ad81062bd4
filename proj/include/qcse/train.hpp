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
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcse/features.hpp"
#include "qcse/label.hpp"
#include "qcse/model.hpp"

namespace qcse {

enum class Optimizer { sgd_momentum, adaptive_moment };

std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view s);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;  // frames
  std::size_t max_epochs = 50;
  std::size_t patience = 3;     // epochs without validation-loss improvement
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::adaptive_moment;
  double momentum = 0.9;        // sgd_momentum only
  double validation_fraction = 0.1;
  // 1 = serial; >1 splits each batch into that many pieces processed with
  // OpenMP. Results depend on this value, not on the thread count.
  std::size_t grad_chunks = 1;

  void validate() const;
};

// A normalized utterance; every frame inherits the utterance label.
struct LabeledUtterance {
  FeatureMatrix features;
  Label label = Label::normal;
};

// Frames of many utterances packed as float32 network input.
struct FrameSet {
  std::size_t bins = 0;
  std::vector<float> frames;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
};

FrameSet pack_frames(std::span<const LabeledUtterance> utterances);

struct Checkpoint {
  ModelParams<float> params;
  std::size_t epoch = 0;
  double validation_loss = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;  // frame level
  bool improved = false;
};

struct TrainResult {
  ModelParams<float> best;               // == checkpoints.front().params
  std::vector<Checkpoint> checkpoints;   // ascending validation loss, at most two
  std::vector<EpochRecord> log;
  std::string stop_reason;
};

// Stops once `patience` consecutive epochs fail to lower the best loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  // Returns true when `loss` is a strict improvement.
  bool observe(double loss);
  bool should_stop() const { return bad_epochs_ >= patience_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t bad_epochs_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

// Retains the `keep` lowest-loss snapshots, sorted ascending. Ties keep the
// earlier epoch first.
class CheckpointKeeper {
 public:
  explicit CheckpointKeeper(std::size_t keep = 2) : keep_(keep) {}

  void offer(const ModelParams<float>& params, std::size_t epoch, double loss);
  const std::vector<Checkpoint>& checkpoints() const { return kept_; }
  std::vector<Checkpoint> release() { return std::move(kept_); }

 private:
  std::size_t keep_;
  std::vector<Checkpoint> kept_;
};

struct ValidationSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Stratified per class: round(fraction * n_class) utterances of each class,
// at least one when the class has two or more, chosen by a seeded shuffle.
// Both index lists come back in ascending order.
ValidationSplit split_validation(std::span<const Label> labels, double fraction, std::uint64_t seed);

// Mean cross-entropy and frame accuracy over a packed set.
struct SetLoss {
  double loss = 0.0;
  double accuracy = 0.0;
};
SetLoss evaluate_frames(const ModelParams<float>& params, const FrameSet& set);

// Trains from a fresh initialization. Frames are reshuffled every epoch;
// validation loss drives early stopping and checkpoint retention.
TrainResult train(std::span<const LabeledUtterance> train_set,
                  std::span<const LabeledUtterance> validation_set, const ModelConfig& mcfg,
                  const TrainConfig& tcfg);

// Holds out validation_fraction of `data` (stratified) and trains on the rest.
TrainResult train(std::span<const LabeledUtterance> data, const ModelConfig& mcfg,
                  const TrainConfig& tcfg);

}  // namespace qcse
