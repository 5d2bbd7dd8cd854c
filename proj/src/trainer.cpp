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

#include "templner/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "templner/error.hpp"

namespace templner {

using Matrix = nn::Matrix<double>;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValueError("learning_rate must be > 0");
  if (batch_size < 1) throw ValueError("batch_size must be >= 1");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.epsilon > 0.0))
    throw ValueError("invalid Adam hyperparameters");
  if (clip_norm < 0.0) throw ValueError("clip_norm must be >= 0");
}

TrainConfig TrainConfig::bart_reference() {
  TrainConfig c;
  c.learning_rate = 2e-5;
  c.batch_size = 64;
  c.warmup_steps = 500;
  return c;
}

TrainConfig TrainConfig::bert_reference() {
  TrainConfig c;
  c.learning_rate = 1e-5;
  c.batch_size = 32;
  c.warmup_steps = 0;
  return c;
}

AdamOptimizer::AdamOptimizer(const Seq2SeqParams& shape, AdamConfig config)
    : config_(config), m_(shape), v_(shape) {
  m_.set_zero();
  v_.set_zero();
}

void AdamOptimizer::step(Seq2SeqParams& params, Seq2SeqParams& grad, double learning_rate) {
  ++t_;
  const double correction1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  std::vector<Matrix*> g, m, v;
  grad.for_each([&](const std::string&, Matrix& x) { g.push_back(&x); });
  m_.for_each([&](const std::string&, Matrix& x) { m.push_back(&x); });
  v_.for_each([&](const std::string&, Matrix& x) { v.push_back(&x); });
  std::size_t k = 0;
  params.for_each([&](const std::string&, Matrix& p) {
    Matrix& gk = *g[k];
    Matrix& mk = *m[k];
    Matrix& vk = *v[k];
    mk = config_.beta1 * mk + (1.0 - config_.beta1) * gk;
    vk = config_.beta2 * vk + (1.0 - config_.beta2) * gk.cwiseAbs2();
    p.array() -= learning_rate * (mk.array() / correction1) /
                 ((vk.array() / correction2).sqrt() + config_.epsilon);
    ++k;
  });
}

double warmup_learning_rate(const TrainConfig& config, std::size_t step) {
  if (config.warmup_steps == 0 || step >= config.warmup_steps) return config.learning_rate;
  return config.learning_rate * static_cast<double>(step + 1) / static_cast<double>(config.warmup_steps);
}

namespace {

double global_norm(const Seq2SeqParams& grad) {
  double sq = 0.0;
  grad.for_each([&](const std::string&, const Matrix& m) { sq += m.squaredNorm(); });
  return std::sqrt(sq);
}

TrainStats run_training(TinySeq2Seq& model, std::span<const TrainingPair> pairs, const TrainConfig& config,
                        const EpochCallback& on_epoch) {
  config.validate();
  if (pairs.empty()) throw ValueError("training requires at least one pair");
  if (!model.initialized()) throw ValueError("model is not initialized");

  const auto started = std::chrono::steady_clock::now();
  TrainStats stats;
  if (config.epochs == 0) return stats;

  AdamOptimizer optimizer(model.params(), config.adam);
  Seq2SeqParams grad = model.params();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainingPair> batch;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(pairs[order[i]]);

      grad.set_zero();
      const double loss = model.loss_and_gradient(batch, config.normalization, grad);
      if (!std::isfinite(loss))
        throw TrainingError("loss diverged (" + std::to_string(loss) + ") at epoch " + std::to_string(epoch + 1) +
                            ", step " + std::to_string(stats.steps + 1));
      if (config.clip_norm > 0.0) {
        const double norm = global_norm(grad);
        if (norm > config.clip_norm)
          grad.for_each([&](const std::string&, Matrix& m) { m *= config.clip_norm / norm; });
      }
      optimizer.step(model.params(), grad, warmup_learning_rate(config, stats.steps));
      ++stats.steps;
      loss_sum += loss;
      ++batches;
    }
    stats.epoch_loss.push_back(loss_sum / static_cast<double>(batches));
    if (on_epoch) on_epoch(epoch, stats.epoch_loss.back());
  }
  model.add_steps_trained(stats.steps);
  stats.final_loss = stats.epoch_loss.back();
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return stats;
}

}  // namespace

TrainStats fit(TinySeq2Seq& model, std::span<const TrainingPair> pairs, const TrainConfig& config,
               const EpochCallback& on_epoch) {
  return run_training(model, pairs, config, on_epoch);
}

TrainStats fine_tune(TinySeq2Seq& model, std::span<const TrainingPair> pairs, const TrainConfig& config,
                     const EpochCallback& on_epoch) {
  if (model.steps_trained() == 0) throw ValueError("fine_tune expects a model that has already been trained");
  return run_training(model, pairs, config, on_epoch);
}

}  // namespace templner
