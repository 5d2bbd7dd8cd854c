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

#include <span>
#include <string>
#include <vector>

#include "templner/corpus.hpp"

namespace templner {

/// Teacher-forced log-probabilities of a target given a source.
struct TargetScore {
  std::vector<double> token_logprobs;
  double total = 0.0;
};

/// Sums the per-token values left to right; `total` is always produced by
/// this function so additivity holds bit-for-bit.
TargetScore make_target_score(std::vector<double> token_logprobs);

/// Contract for anything that can score a filled template against a
/// sentence: log p(t_c | t_<c, X) for every target position. Implementations
/// must be deterministic for fixed state and safe to call concurrently.
class GenerativeScorer {
 public:
  virtual ~GenerativeScorer() = default;

  /// An empty target scores 0 with no per-token entries.
  TargetScore score_target(std::span<const std::string> source, std::span<const std::string> target) const;

  /// Scores several targets against one source. Entries with an empty target
  /// score 0.
  std::vector<TargetScore> score_targets(std::span<const std::string> source, std::span<const Tokens> targets) const;

  virtual std::string describe() const = 0;

 protected:
  // Called with nonempty targets only.
  virtual std::vector<TargetScore> score_nonempty(std::span<const std::string> source,
                                                  std::span<const Tokens> targets) const = 0;
};

}  // namespace templner
