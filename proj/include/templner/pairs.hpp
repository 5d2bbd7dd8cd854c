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
#include <iosfwd>
#include <string>
#include <vector>

#include "templner/corpus.hpp"
#include "templner/templates.hpp"

namespace templner {

enum class Polarity { kPositive, kNegative };

struct TrainingPair {
  Tokens source;
  Tokens target;
  Polarity polarity = Polarity::kPositive;

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

struct PairOptions {
  double neg_ratio = 1.5;
  std::size_t max_span_len = 8;
  std::uint64_t seed = 0;
};

struct PairBuildResult {
  std::vector<TrainingPair> pairs;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t requested_negatives = 0;
  // Requested negatives that could not be drawn because the eligible pool ran out.
  std::size_t shortfall = 0;
  // Set when the corpus has no gold mentions but negatives were requested.
  std::string warning;
};

/// round-half-up of ratio * positives.
std::size_t negative_count(double neg_ratio, std::size_t positives);

/// One positive pair per gold mention plus round(neg_ratio * P) negatives
/// drawn uniformly without replacement from every span of length
/// <= max_span_len whose coordinates differ from all gold spans of its
/// sentence. Output order is shuffled by seed.
PairBuildResult build_training_pairs(const Corpus& corpus, const TemplateSpec& spec, const LabelWordMap& words,
                                     const PairOptions& options);

/// Line format: source tokens TAB target tokens TAB positive|negative.
void write_pairs(std::ostream& out, const std::vector<TrainingPair>& pairs);
std::vector<TrainingPair> read_pairs(std::istream& in);
void write_pairs_file(const std::string& path, const std::vector<TrainingPair>& pairs);
std::vector<TrainingPair> read_pairs_file(const std::string& path);

}  // namespace templner
