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

#include "qcse/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qcse/random.hpp"

namespace qcse {

namespace {

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& cfg, std::size_t n)
      : cfg_(cfg), first_(n, 0.0f), second_(cfg.optimizer == Optimizer::adaptive_moment ? n : 0, 0.0f) {}

  void step(std::vector<float>& params, const std::vector<float>& grad) {
    ++t_;
    const auto lr = static_cast<float>(cfg_.learning_rate);
    float* p = params.data();
    const float* g = grad.data();
    float* m = first_.data();
    const std::size_t n = params.size();

    if (cfg_.optimizer == Optimizer::sgd_momentum) {
      const auto mu = static_cast<float>(cfg_.momentum);
#pragma omp simd
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = mu * m[i] + g[i];
        p[i] -= lr * m[i];
      }
      return;
    }

    constexpr float kBeta1 = 0.9f, kBeta2 = 0.999f, kEps = 1e-8f;
    const auto c1 = static_cast<float>(1.0 / (1.0 - std::pow(0.9, static_cast<double>(t_))));
    const auto c2 = static_cast<float>(1.0 / (1.0 - std::pow(0.999, static_cast<double>(t_))));
    float* v = second_.data();
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = kBeta1 * m[i] + (1.0f - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0f - kBeta2) * g[i] * g[i];
      p[i] -= lr * (m[i] * c1) / (std::sqrt(v[i] * c2) + kEps);
    }
  }

 private:
  const TrainConfig& cfg_;
  std::size_t t_ = 0;
  std::vector<float> first_;
  std::vector<float> second_;
};

void require_both_classes(std::span<const LabeledUtterance> set, const char* what) {
  bool seen[kNumClasses] = {false, false};
  for (const LabeledUtterance& u : set) seen[class_index(u.label)] = true;
  if (!seen[0] || !seen[1]) {
    throw std::invalid_argument(std::string(what) + " must contain both normal and whisper utterances");
  }
}

}  // namespace

std::string_view to_string(Optimizer o) {
  return o == Optimizer::sgd_momentum ? "sgd_momentum" : "adaptive_moment";
}

Optimizer parse_optimizer(std::string_view s) {
  if (s == "sgd_momentum") return Optimizer::sgd_momentum;
  if (s == "adaptive_moment" || s == "adam") return Optimizer::adaptive_moment;
  throw std::invalid_argument("unknown optimizer '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || batch_size == 0 || max_epochs == 0 || patience == 0 ||
      grad_chunks == 0) {
    throw std::invalid_argument("training parameters must be positive");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation_fraction must be in (0, 1)");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
}

FrameSet pack_frames(std::span<const LabeledUtterance> utterances) {
  FrameSet set;
  if (utterances.empty()) return set;
  set.bins = utterances.front().features.n_bins;
  std::size_t total = 0;
  for (const LabeledUtterance& u : utterances) {
    if (u.features.n_bins != set.bins) throw std::invalid_argument("pack_frames: inconsistent bin counts");
    total += u.features.n_frames;
  }
  set.frames.reserve(total * set.bins);
  set.labels.reserve(total);
  for (const LabeledUtterance& u : utterances) {
    for (double v : u.features.data) set.frames.push_back(static_cast<float>(v));
    set.labels.insert(set.labels.end(), u.features.n_frames, static_cast<std::uint8_t>(u.label));
  }
  return set;
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience == 0) throw std::invalid_argument("patience must be at least 1");
}

bool EarlyStopping::observe(double loss) {
  if (loss < best_) {
    best_ = loss;
    bad_epochs_ = 0;
    return true;
  }
  ++bad_epochs_;
  return false;
}

void CheckpointKeeper::offer(const ModelParams<float>& params, std::size_t epoch, double loss) {
  if (!std::isfinite(loss)) throw std::invalid_argument("checkpoint loss must be finite");
  if (kept_.size() == keep_ && !(loss < kept_.back().validation_loss)) return;
  Checkpoint cp{params, epoch, loss};
  auto pos = std::upper_bound(kept_.begin(), kept_.end(), loss,
                              [](double l, const Checkpoint& c) { return l < c.validation_loss; });
  kept_.insert(pos, std::move(cp));
  if (kept_.size() > keep_) kept_.pop_back();
}

ValidationSplit split_validation(std::span<const Label> labels, double fraction, std::uint64_t seed) {
  ValidationSplit split;
  Rng rng(seed);
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (class_index(labels[i]) == c) members.push_back(i);
    }
    std::size_t n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(members.size())));
    if (members.size() >= 2) n_val = std::clamp<std::size_t>(n_val, 1, members.size() - 1);
    else n_val = 0;
    shuffle(std::span<std::size_t>(members), rng);
    split.validation.insert(split.validation.end(), members.begin(),
                            members.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_val),
                       members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

SetLoss evaluate_frames(const ModelParams<float>& params, const FrameSet& set) {
  if (set.size() == 0) throw std::invalid_argument("evaluate_frames: empty set");
  const std::size_t classes = params.config.classes;
  constexpr std::size_t kChunk = 256;
  Workspace<float> ws(params.config, kChunk);
  std::vector<float> probs(kChunk * classes);
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < set.size(); start += kChunk) {
    const std::size_t count = std::min(kChunk, set.size() - start);
    forward_batch<float>(params, {set.frames.data() + start * set.bins, count * set.bins}, count,
                         {probs.data(), count * classes}, ws);
    for (std::size_t i = 0; i < count; ++i) {
      const float* p = probs.data() + i * classes;
      const std::size_t y = set.labels[start + i];
      loss -= std::log(std::max(static_cast<double>(p[y]), 1e-300));
      const std::size_t predicted = p[1] > p[0] ? 1 : 0;
      correct += predicted == y;
    }
  }
  return {loss / static_cast<double>(set.size()),
          static_cast<double>(correct) / static_cast<double>(set.size())};
}

TrainResult train(std::span<const LabeledUtterance> train_set,
                  std::span<const LabeledUtterance> validation_set, const ModelConfig& mcfg,
                  const TrainConfig& tcfg) {
  mcfg.validate();
  tcfg.validate();
  require_both_classes(train_set, "training data");
  if (validation_set.empty()) throw std::invalid_argument("validation set is empty");

  const FrameSet train_frames = pack_frames(train_set);
  const FrameSet val_frames = pack_frames(validation_set);
  if (train_frames.bins != mcfg.input_bins || val_frames.bins != mcfg.input_bins) {
    throw std::invalid_argument("feature bins do not match the model input size " +
                                std::to_string(mcfg.input_bins));
  }
  if (train_frames.size() == 0 || val_frames.size() == 0) {
    throw std::invalid_argument("training or validation set has no frames");
  }

  ModelParams<float> params = init_params<float>(mcfg, derive_seed(tcfg.seed, SeedStream::init, 0));
  ModelParams<float> grad = ModelParams<float>::zeros(mcfg);
  OptimizerState opt(tcfg, params.values.size());
  Rng shuffle_rng(derive_seed(tcfg.seed, SeedStream::shuffle, 0));

  const std::size_t bins = mcfg.input_bins;
  const std::size_t batch_cap = tcfg.batch_size;
  std::vector<GradChunk<float>> chunks(tcfg.grad_chunks);
  Workspace<float> ws(mcfg, batch_cap);
  std::vector<float> batch_frames(batch_cap * bins);
  std::vector<std::uint8_t> batch_labels(batch_cap);

  std::vector<std::size_t> order(train_frames.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  EarlyStopping stopper(tcfg.patience);
  CheckpointKeeper keeper(2);
  TrainResult result;
  result.stop_reason = "reached max_epochs";

  for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t seen = 0;

    for (std::size_t start = 0; start < order.size(); start += batch_cap) {
      const std::size_t count = std::min(batch_cap, order.size() - start);
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = order[start + i];
        std::copy_n(train_frames.frames.begin() + static_cast<std::ptrdiff_t>(src * bins), bins,
                    batch_frames.begin() + static_cast<std::ptrdiff_t>(i * bins));
        batch_labels[i] = train_frames.labels[src];
      }
      const Batch<float> batch{{batch_frames.data(), count * bins}, {batch_labels.data(), count}};
      const double loss = tcfg.grad_chunks == 1
                              ? loss_and_grad(params, batch, grad, ws)
                              : loss_and_grad_chunked(params, batch, std::span(chunks), grad);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("training diverged: loss is " + std::to_string(loss) + " at epoch " +
                                 std::to_string(epoch) + ", batch starting at frame " +
                                 std::to_string(start) + "; try a lower learning rate");
      }
      epoch_loss += loss * static_cast<double>(count);
      seen += count;
      opt.step(params.values, grad.values);
    }

    const SetLoss val = evaluate_frames(params, val_frames);
    if (!std::isfinite(val.loss)) {
      throw std::runtime_error("training diverged: validation loss is not finite at epoch " +
                               std::to_string(epoch));
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = epoch_loss / static_cast<double>(seen);
    rec.validation_loss = val.loss;
    rec.validation_accuracy = val.accuracy;
    rec.improved = stopper.observe(val.loss);
    result.log.push_back(rec);
    keeper.offer(params, epoch, val.loss);

    if (stopper.should_stop()) {
      result.stop_reason = "validation loss did not improve for " + std::to_string(tcfg.patience) +
                           " epochs";
      break;
    }
  }

  result.checkpoints = keeper.release();
  result.best = result.checkpoints.front().params;
  return result;
}

TrainResult train(std::span<const LabeledUtterance> data, const ModelConfig& mcfg,
                  const TrainConfig& tcfg) {
  tcfg.validate();
  require_both_classes(data, "training data");
  std::vector<Label> labels;
  labels.reserve(data.size());
  for (const LabeledUtterance& u : data) labels.push_back(u.label);
  const ValidationSplit split =
      split_validation(labels, tcfg.validation_fraction, derive_seed(tcfg.seed, SeedStream::split, 0));

  std::vector<LabeledUtterance> train_part, val_part;
  for (std::size_t i : split.train) train_part.push_back(data[i]);
  for (std::size_t i : split.validation) val_part.push_back(data[i]);
  return train(train_part, val_part, mcfg, tcfg);
}

}  // namespace qcse
