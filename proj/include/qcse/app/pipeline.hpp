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
#include <span>
#include <string>
#include <vector>

#include "qcse/app/config.hpp"
#include "qcse/corpus.hpp"
#include "qcse/eval.hpp"
#include "qcse/features.hpp"
#include "qcse/model_io.hpp"
#include "qcse/train.hpp"

namespace qcse::app {

// Noise for item `index` of a manifest (or of the in-memory corpus, which
// uses the same order) is seeded with derive_seed(master, noise, index).
std::uint64_t noise_seed(std::uint64_t master, std::size_t index);

// Optional AWGN at cfg.snr_db followed by QSE/QCSE extraction.
FeatureMatrix featurize(const AudioBuffer& audio, const RunConfig& cfg, std::size_t index);

struct LabeledFeatures {
  std::vector<FeatureMatrix> features;
  std::vector<Label> labels;
};

// Normalizes with `norm` and pairs each matrix with its label.
std::vector<LabeledUtterance> normalized(const LabeledFeatures& set, const NormStats& norm);

struct CheckpointEval {
  std::vector<MetricsReport> reports;  // one per checkpoint, in checkpoint order
  std::size_t best = 0;                // highest accuracy; ties keep the earlier
};

// Utterance-level evaluation of each model on `test` (unnormalized
// features; each model applies its own stored normalization).
CheckpointEval evaluate_checkpoints(std::span<const TrainedModel> models, const LabeledFeatures& test,
                                    const RunConfig& cfg, const std::string& dataset);

// The CSV has one pair of rows per checkpoint; the text table additionally
// marks the best-of-two row.
std::string render_checkpoint_table(const CheckpointEval& e);

struct ExperimentResult {
  TrainResult training;
  std::vector<TrainedModel> models;  // ascending validation loss
  CheckpointEval eval;

  // Accuracy of the lowest-validation-loss checkpoint, and of the best of two.
  double primary_accuracy() const { return eval.reports.front().accuracy; }
  double best_accuracy() const { return eval.reports[eval.best].accuracy; }
};

// Splits a synthesized corpus by its split tags and featurizes it. Audio is
// quantized to 16-bit first and features narrowed to single precision, so
// results match the file-based commands.
LabeledFeatures featurize_split(std::span<const SynthUtterance> corpus, Split split,
                                const RunConfig& cfg);

// Train on the train split, evaluate both checkpoints on the test split, with
// noise (if any) at the same SNR in both.
ExperimentResult run_experiment(std::span<const SynthUtterance> corpus, const RunConfig& cfg,
                                const std::string& dataset);

// train_log.csv contents: epoch,train_loss,validation_loss,validation_accuracy,improved
std::string render_train_log(const TrainResult& r);

}  // namespace qcse::app
