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


#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "qcse/train.hpp"
#include "support.hpp"

using namespace qcse;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.input_bins = 16;
  c.conv1 = {4, 5};
  c.conv2 = {4, 3};
  c.dense_hidden = 16;
  return c;
}

// Normal frames carry energy only in bins [0, 8), whispered frames only in
// [8, 16): disjoint supports, so a linear read-out separates them.
std::vector<LabeledUtterance> separable_set(std::size_t per_class, std::uint64_t seed) {
  std::vector<LabeledUtterance> out;
  for (std::size_t i = 0; i < 2 * per_class; ++i) {
    const Label label = i % 2 ? Label::whisper : Label::normal;
    FeatureMatrix f{6, 16, FeatureKind::qcse, 1.01, std::vector<double>(6 * 16, 0.0)};
    const auto r = testing::random_vector(6 * 8, seed + i, 0.5, 1.5);
    for (std::size_t t = 0; t < 6; ++t) {
      for (std::size_t k = 0; k < 8; ++k) f.row(t)[(label == Label::normal ? 0 : 8) + k] = r[t * 8 + k];
    }
    out.push_back(LabeledUtterance{f, label});
  }
  return out;
}

}  // namespace

TEST_CASE("early stopping counts epochs without strict improvement") {
  EarlyStopping s(3);
  CHECK(s.observe(1.0));
  CHECK_FALSE(s.should_stop());
  CHECK_FALSE(s.observe(1.1));
  CHECK_FALSE(s.observe(1.2));
  CHECK_FALSE(s.should_stop());
  CHECK_FALSE(s.observe(1.3));
  CHECK(s.should_stop());

  EarlyStopping t(2);
  t.observe(1.0);
  t.observe(1.0);  // equal is not an improvement
  CHECK(t.observe(0.5));
  CHECK_FALSE(t.should_stop());
  CHECK(t.best() == 0.5);
  CHECK_THROWS(EarlyStopping(0));
}

TEST_CASE("checkpoint keeper holds the two lowest losses in order") {
  const auto p = ModelParams<float>::zeros(small_config());
  CheckpointKeeper k(2);
  k.offer(p, 1, 0.9);
  k.offer(p, 2, 0.5);
  k.offer(p, 3, 0.7);
  k.offer(p, 4, 0.8);
  k.offer(p, 5, 0.5);
  const auto& c = k.checkpoints();
  REQUIRE(c.size() == 2);
  CHECK(c[0].epoch == 2);
  CHECK(c[1].epoch == 5);
  CHECK(c[0].validation_loss <= c[1].validation_loss);
}

TEST_CASE("validation split is stratified and seeded") {
  std::vector<Label> labels;
  for (int i = 0; i < 40; ++i) labels.push_back(i < 30 ? Label::normal : Label::whisper);
  const ValidationSplit s = split_validation(labels, 0.1, 7);
  CHECK(s.validation.size() == 4);
  CHECK(s.train.size() == 36);
  std::size_t val_whisper = 0;
  for (std::size_t i : s.validation) val_whisper += labels[i] == Label::whisper;
  CHECK(val_whisper == 1);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  CHECK(all.size() == 40);
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));

  const ValidationSplit again = split_validation(labels, 0.1, 7);
  CHECK(again.validation == s.validation);
  CHECK(split_validation(labels, 0.1, 8).validation != s.validation);
}

TEST_CASE("packing keeps utterance labels per frame") {
  const auto set = separable_set(2, 1);
  const FrameSet fs = pack_frames(set);
  CHECK(fs.size() == 24);
  CHECK(fs.bins == 16);
  CHECK(fs.labels[0] == 0);
  CHECK(fs.labels[6] == 1);
  CHECK(fs.frames[6 * 16 + 8] == static_cast<float>(set[1].features.row(0)[8]));
}

TEST_CASE("separable features are learned within 20 epochs") {
  const auto train_set = separable_set(20, 100);
  const auto val_set = separable_set(4, 500);
  TrainConfig tc;
  tc.max_epochs = 20;
  tc.batch_size = 16;
  tc.seed = 3;
  const TrainResult r = train(train_set, val_set, small_config(), tc);
  REQUIRE_FALSE(r.log.empty());
  CHECK(r.log.size() <= 20);
  const SetLoss fit = evaluate_frames(r.best, pack_frames(train_set));
  CHECK(fit.accuracy >= 0.99);
  REQUIRE(r.checkpoints.size() == 2);
  CHECK(r.checkpoints[0].validation_loss <= r.checkpoints[1].validation_loss);
  CHECK(r.best.values == r.checkpoints[0].params.values);
  for (const EpochRecord& e : r.log) CHECK(std::isfinite(e.train_loss));
}

TEST_CASE("training is bit-reproducible for a seed") {
  const auto data = separable_set(10, 200);
  TrainConfig tc;
  tc.max_epochs = 3;
  tc.seed = 11;
  const TrainResult a = train(data, small_config(), tc);
  const TrainResult b = train(data, small_config(), tc);
  CHECK(a.best.values == b.best.values);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].validation_loss == b.log[i].validation_loss);
  tc.seed = 12;
  CHECK(train(data, small_config(), tc).best.values != a.best.values);
}

TEST_CASE("gradient chunking changes nothing but the reduction order") {
  const auto data = separable_set(10, 300);
  TrainConfig tc;
  tc.max_epochs = 2;
  tc.seed = 5;
  tc.grad_chunks = 3;
  const TrainResult a = train(data, small_config(), tc);
  const TrainResult b = train(data, small_config(), tc);
  CHECK(a.best.values == b.best.values);
}

TEST_CASE("sgd with momentum also trains") {
  const auto train_set = separable_set(20, 700);
  const auto val_set = separable_set(4, 900);
  TrainConfig tc;
  tc.optimizer = Optimizer::sgd_momentum;
  tc.learning_rate = 0.01;
  tc.max_epochs = 20;
  tc.batch_size = 16;
  const TrainResult r = train(train_set, val_set, small_config(), tc);
  CHECK(evaluate_frames(r.best, pack_frames(train_set)).accuracy >= 0.99);
}

TEST_CASE("training input errors") {
  auto one_class = separable_set(5, 1);
  one_class.erase(std::remove_if(one_class.begin(), one_class.end(),
                                 [](const LabeledUtterance& u) { return u.label == Label::whisper; }),
                  one_class.end());
  CHECK_THROWS_WITH(train(one_class, small_config(), TrainConfig{}), doctest::Contains("both"));

  auto data = separable_set(5, 1);
  CHECK_THROWS_WITH(train(data, ModelConfig{}, TrainConfig{}), doctest::Contains("bins"));

  TrainConfig bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS(bad.validate());
  bad = TrainConfig{};
  bad.validation_fraction = 1.0;
  CHECK_THROWS(bad.validate());
  CHECK(parse_optimizer("adam") == Optimizer::adaptive_moment);
  CHECK_THROWS(parse_optimizer("rmsprop"));
}

TEST_CASE("divergence is reported instead of producing NaN weights") {
  auto data = separable_set(10, 1);
  for (auto& u : data) {
    for (double& v : u.features.data) v *= 1e30;
  }
  TrainConfig tc;
  tc.learning_rate = 1e30;
  tc.max_epochs = 3;
  CHECK_THROWS_WITH(train(data, small_config(), tc), doctest::Contains("diverged"));
}
