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

#include <map>
#include <random>
#include <string>
#include <vector>

#include "templner/corpus.hpp"
#include "templner/scorer.hpp"

namespace templner::testing {

inline Tokens toks(const std::string& text) { return split_tokens(text); }

inline LabeledSentence sentence(const std::string& tokens, const std::string& tags) {
  return LabeledSentence(split_tokens(tokens), split_tokens(tags));
}

// Random strict-BIO sequence of the given length over `labels`.
inline std::vector<std::string> random_bio(std::mt19937_64& rng, std::size_t length,
                                           const std::vector<std::string>& labels) {
  std::vector<std::string> tags;
  std::string open;
  for (std::size_t i = 0; i < length; ++i) {
    const auto roll = rng() % 3;
    if (roll == 0 || (roll == 2 && open.empty())) {
      if (rng() % 2) {
        tags.push_back("O");
        open.clear();
        continue;
      }
      open = labels[rng() % labels.size()];
      tags.push_back("B-" + open);
    } else if (roll == 1) {
      tags.push_back("O");
      open.clear();
    } else {
      tags.push_back("I-" + open);
    }
  }
  return tags;
}

// Scores a target by looking its joined text up in a table; anything else
// gets `fallback`.
class TableScorer : public GenerativeScorer {
 public:
  explicit TableScorer(std::map<std::string, double> table, double fallback = -100.0)
      : table_(std::move(table)), fallback_(fallback) {}

  std::string describe() const override { return "table"; }

 protected:
  std::vector<TargetScore> score_nonempty(std::span<const std::string>,
                                          std::span<const Tokens> targets) const override {
    std::vector<TargetScore> out;
    for (const auto& t : targets) {
      auto it = table_.find(join_tokens(t));
      const double total = it == table_.end() ? fallback_ : it->second;
      // The whole score sits on the first token so totals compare exactly.
      std::vector<double> per(t.size(), 0.0);
      per[0] = total;
      out.push_back(make_target_score(std::move(per)));
    }
    return out;
  }

 private:
  std::map<std::string, double> table_;
  double fallback_;
};

}  // namespace templner::testing
