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


#include "qcse/app/pipeline.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "qcse/noise.hpp"
#include "qcse/random.hpp"

namespace qcse::app {

std::uint64_t noise_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, SeedStream::noise, index);
}

FeatureMatrix featurize(const AudioBuffer& audio, const RunConfig& cfg, std::size_t index) {
  if (!cfg.snr_db) return extract(audio, cfg.frame, cfg.chirp);
  const AudioBuffer noisy = add_awgn(audio, NoiseSpec{*cfg.snr_db, noise_seed(cfg.seed, index)});
  return extract(noisy, cfg.frame, cfg.chirp);
}

std::vector<LabeledUtterance> normalized(const LabeledFeatures& set, const NormStats& norm) {
  std::vector<LabeledUtterance> out;
  out.reserve(set.features.size());
  for (std::size_t i = 0; i < set.features.size(); ++i) {
    out.push_back(LabeledUtterance{apply_norm(set.features[i], norm), set.labels[i]});
  }
  return out;
}

CheckpointEval evaluate_checkpoints(std::span<const TrainedModel> models, const LabeledFeatures& test,
                                    const RunConfig& cfg, const std::string& dataset) {
  if (models.empty()) throw std::invalid_argument("no models to evaluate");
  if (test.features.empty()) throw std::invalid_argument("test set is empty");
  CheckpointEval out;
  for (std::size_t m = 0; m < models.size(); ++m) {
    const std::size_t n = test.features.size();
    std::vector<Label> predicted(n);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
      const auto k = static_cast<std::size_t>(i);
      const FeatureMatrix f = apply_norm(test.features[k], models[m].norm);
      predicted[k] = predict_utterance(models[m].params, f).label;
    }
    MetricsReport r = metrics(confusion(predicted, test.labels));
    r.feature = kind_for_radius(cfg.chirp.radius);
    r.radius = cfg.chirp.radius;
    r.snr_db = cfg.snr_db;
    r.dataset = dataset;
    r.note = "checkpoint " + std::to_string(m + 1);
    out.reports.push_back(std::move(r));
    if (out.reports[m].accuracy > out.reports[out.best].accuracy) out.best = m;
  }
  return out;
}

std::string render_checkpoint_table(const CheckpointEval& e) {
  std::vector<MetricsReport> marked = e.reports;
  if (marked.size() > 1) marked[e.best].note += "  <- best-of-two";
  return render_report(marked);
}

LabeledFeatures featurize_split(std::span<const SynthUtterance> corpus, Split split,
                                const RunConfig& cfg) {
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].split == split) picked.push_back(i);
  }
  LabeledFeatures out;
  out.features.resize(picked.size());
  out.labels.resize(picked.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(picked.size()); ++j) {
    const auto k = static_cast<std::size_t>(j);
    const std::size_t i = picked[k];
    out.features[k] = featurize(quantize_pcm16(corpus[i].audio), cfg, i);
    for (double& v : out.features[k].data) v = static_cast<float>(v);  // feature files hold f32
    out.labels[k] = corpus[i].label;
  }
  return out;
}

ExperimentResult run_experiment(std::span<const SynthUtterance> corpus, const RunConfig& cfg,
                                const std::string& dataset) {
  cfg.validate();
  const LabeledFeatures train_set = featurize_split(corpus, Split::train, cfg);
  const LabeledFeatures test_set = featurize_split(corpus, Split::test, cfg);

  const NormStats norm = fit_norm(train_set.features);
  const std::vector<LabeledUtterance> data = normalized(train_set, norm);

  ExperimentResult out;
  out.training = train(data, cfg.model, cfg.train_config());
  for (const Checkpoint& c : out.training.checkpoints) out.models.push_back(TrainedModel{c.params, norm});
  out.eval = evaluate_checkpoints(out.models, test_set, cfg, dataset);
  return out;
}

std::string render_train_log(const TrainResult& r) {
  std::ostringstream out;
  out << "epoch,train_loss,validation_loss,validation_accuracy,improved\n";
  char line[160];
  for (const EpochRecord& e : r.log) {
    std::snprintf(line, sizeof line, "%zu,%.9g,%.9g,%.6f,%d\n", e.epoch, e.train_loss,
                  e.validation_loss, e.validation_accuracy, e.improved ? 1 : 0);
    out << line;
  }
  return out.str();
}

}  // namespace qcse::app
