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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "templner/pairs.hpp"
#include "templner/seq2seq.hpp"

namespace templner {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  // The learning rate ramps linearly from lr/warmup_steps to lr over this
  // many optimizer steps, then stays constant.
  std::size_t warmup_steps = 100;
  std::size_t epochs = 10;
  std::uint64_t seed = 0;
  AdamConfig adam;
  // Global gradient-norm clip; 0 disables.
  double clip_norm = 5.0;
  LossNormalization normalization = LossNormalization::kTokenMean;

  void validate() const;

  /// Reference settings for fine-tuning a pre-trained BART scorer (Adam,
  /// lr 2e-5, batch 64, warmup). The 500 warmup steps are a placeholder.
  static TrainConfig bart_reference();
  /// Reference settings of the BERT sequence-labeling baseline (lr 1e-5,
  /// batch 32, decay 0.05 per iteration); recorded for completeness only.
  static TrainConfig bert_reference();
};

struct TrainStats {
  std::vector<double> epoch_loss;  // mean of the batch losses in each epoch
  double final_loss = 0.0;
  double wall_seconds = 0.0;
  std::size_t steps = 0;
};

class AdamOptimizer {
 public:
  AdamOptimizer(const Seq2SeqParams& shape, AdamConfig config);

  // Applies one update with the given learning rate.
  void step(Seq2SeqParams& params, Seq2SeqParams& grad, double learning_rate);
  std::size_t steps() const { return t_; }

 private:
  AdamConfig config_;
  Seq2SeqParams m_, v_;
  std::size_t t_ = 0;
};

double warmup_learning_rate(const TrainConfig& config, std::size_t step);

/// Optional per-epoch observer (epoch index, mean loss).
using EpochCallback = std::function<void(std::size_t, double)>;

/// Trains `model` in place from its current parameters. Pairs are reshuffled
/// every epoch from `config.seed`; throws TrainingError when the loss stops
/// being finite.
TrainStats fit(TinySeq2Seq& model, std::span<const TrainingPair> pairs, const TrainConfig& config,
               const EpochCallback& on_epoch = {});

/// Same mechanics as fit, for a model that has already been trained. The
/// output layer spans the whole vocabulary, so new label words need no
/// architecture change as long as they are in the vocabulary.
TrainStats fine_tune(TinySeq2Seq& model, std::span<const TrainingPair> pairs, const TrainConfig& config,
                     const EpochCallback& on_epoch = {});

}  // namespace templner
