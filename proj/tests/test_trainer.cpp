// Copyright 2026 The templner Authors.
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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "templner/error.hpp"
#include "templner/pairs.hpp"
#include "templner/synthetic.hpp"
#include "templner/trainer.hpp"

using namespace templner;
using templner::testing::toks;

namespace {

std::vector<TrainingPair> memorizable(std::size_t n) {
  const auto lang = default_synthetic_language();
  const auto corpus = generate_synthetic_corpus(lang, 40, 5);
  auto r = build_training_pairs(corpus, builtin_templates()[0], lang.label_words(), {.seed = 5});
  r.pairs.resize(std::min(n, r.pairs.size()));
  return r.pairs;
}

TinySeq2Seq fresh(const std::vector<TrainingPair>& pairs, std::uint64_t seed) {
  return TinySeq2Seq(Vocab::from_pairs(pairs), {.embed_dim = 16, .hidden_dim = 32, .seed = seed});
}

std::string bytes(const TinySeq2Seq& m) {
  std::ostringstream out;
  m.save(out);
  return out.str();
}

}  // namespace

TEST_CASE("warmup ramps linearly") {
  TrainConfig c;
  c.learning_rate = 1e-3;
  c.warmup_steps = 4;
  CHECK(warmup_learning_rate(c, 0) == doctest::Approx(2.5e-4));
  CHECK(warmup_learning_rate(c, 3) == doctest::Approx(1e-3));
  CHECK(warmup_learning_rate(c, 100) == 1e-3);
  c.warmup_steps = 0;
  CHECK(warmup_learning_rate(c, 0) == 1e-3);
}

TEST_CASE("reference presets") {
  auto bart = TrainConfig::bart_reference();
  CHECK(bart.learning_rate == 2e-5);
  CHECK(bart.batch_size == 64);
  CHECK(bart.warmup_steps > 0);
  auto bert = TrainConfig::bert_reference();
  CHECK(bert.learning_rate == 1e-5);
  CHECK(bert.batch_size == 32);
  CHECK(bart.adam.beta1 == 0.9);
  CHECK(bart.adam.beta2 == 0.999);
  CHECK(bart.adam.epsilon == 1e-8);
}

TEST_CASE("invalid training configs are rejected") {
  auto pairs = memorizable(4);
  auto model = fresh(pairs, 1);
  TrainConfig c;
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(fit(model, pairs, c), ValueError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(fit(model, pairs, c), ValueError);
  CHECK_THROWS_AS(fit(model, std::vector<TrainingPair>{}, TrainConfig{}), ValueError);
}

TEST_CASE("zero epochs leave the model untouched") {
  auto pairs = memorizable(8);
  auto model = fresh(pairs, 2);
  const auto before = bytes(model);
  TrainConfig c;
  c.epochs = 0;
  auto stats = fit(model, pairs, c);
  CHECK(stats.epoch_loss.empty());
  CHECK(stats.steps == 0);
  CHECK(bytes(model) == before);
}

TEST_CASE("training is deterministic for a fixed seed") {
  auto pairs = memorizable(20);
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 4;
  c.seed = 11;
  auto a = fresh(pairs, 3);
  auto b = fresh(pairs, 3);
  auto sa = fit(a, pairs, c);
  auto sb = fit(b, pairs, c);
  CHECK(bytes(a) == bytes(b));
  CHECK(sa.epoch_loss == sb.epoch_loss);
  CHECK(a.steps_trained() == 15);

  c.seed = 12;
  auto d = fresh(pairs, 3);
  fit(d, pairs, c);
  CHECK(bytes(d) != bytes(a));
}

TEST_CASE("a small pair set is memorized with a mostly monotone loss") {
  auto pairs = memorizable(50);
  REQUIRE(pairs.size() == 50);
  auto model = fresh(pairs, 4);
  TrainConfig c;
  c.epochs = 200;
  c.batch_size = 50;
  c.warmup_steps = 4;
  c.learning_rate = 5e-3;
  c.seed = 4;
  const double initial = model.loss(pairs);
  auto stats = fit(model, pairs, c);
  REQUIRE(stats.epoch_loss.size() == 200);
  const double final_loss = model.loss(pairs);
  MESSAGE("memorization: initial " << initial << ", final " << final_loss);
  CHECK(final_loss < 0.1 * initial);

  // Warmup spans the first 4 epochs.
  std::size_t violations = 0, comparisons = 0;
  for (std::size_t e = 5; e < stats.epoch_loss.size(); ++e, ++comparisons)
    if (stats.epoch_loss[e] > stats.epoch_loss[e - 1]) ++violations;
  MESSAGE("monotonicity: " << violations << " increases in " << comparisons << " epochs");
  CHECK(violations <= comparisons / 20);
}

TEST_CASE("fine_tune") {
  auto pairs = memorizable(12);
  auto model = fresh(pairs, 5);
  TrainConfig c;
  c.epochs = 2;
  CHECK_THROWS_AS(fine_tune(model, pairs, c), ValueError);
  fit(model, pairs, c);

  const auto trained = bytes(model);
  TrainConfig none = c;
  none.epochs = 0;
  fine_tune(model, pairs, none);
  CHECK(bytes(model) == trained);

  // A label word that is already in the vocabulary needs no resize.
  const int vocab_before = model.vocab().size();
  std::vector<TrainingPair> relabeled = pairs;
  for (auto& p : relabeled)
    for (auto& t : p.target)
      if (t == "location") t = "person";
  auto stats = fine_tune(model, relabeled, c);
  CHECK(model.vocab().size() == vocab_before);
  CHECK(stats.steps > 0);
}

TEST_CASE("non-finite loss aborts training") {
  auto pairs = memorizable(6);
  auto model = fresh(pairs, 6);
  model.params().lm_b(0, 0) = std::nan("");
  TrainConfig c;
  c.epochs = 1;
  CHECK_THROWS_AS(fit(model, pairs, c), TrainingError);
}
