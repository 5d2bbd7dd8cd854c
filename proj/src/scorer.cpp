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

#include "templner/scorer.hpp"

namespace templner {

TargetScore make_target_score(std::vector<double> token_logprobs) {
  TargetScore score;
  score.token_logprobs = std::move(token_logprobs);
  for (double v : score.token_logprobs) score.total += v;
  return score;
}

TargetScore GenerativeScorer::score_target(std::span<const std::string> source,
                                           std::span<const std::string> target) const {
  if (target.empty()) return {};
  Tokens one(target.begin(), target.end());
  return score_nonempty(source, std::span<const Tokens>(&one, 1)).front();
}

std::vector<TargetScore> GenerativeScorer::score_targets(std::span<const std::string> source,
                                                         std::span<const Tokens> targets) const {
  std::vector<Tokens> nonempty;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i].empty()) continue;
    nonempty.push_back(targets[i]);
    where.push_back(i);
  }
  std::vector<TargetScore> out(targets.size());
  if (nonempty.empty()) return out;
  auto scored = score_nonempty(source, nonempty);
  for (std::size_t k = 0; k < where.size(); ++k) out[where[k]] = std::move(scored[k]);
  return out;
}

}  // namespace templner
