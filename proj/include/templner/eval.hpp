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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "templner/corpus.hpp"

namespace templner {

using SentenceSpans = std::vector<EntitySpan>;

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct EvalReport {
  Counts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::map<std::string, EvalReport> per_type;
  // Filled by evaluate_with_buckets: "high", "mid", "low".
  std::map<std::string, EvalReport> buckets;

  static EvalReport from_counts(const Counts& counts);
};

/// Micro-averaged entity-level scores: a prediction is a true positive iff
/// its start, end and label all match a gold entity.
EvalReport evaluate(std::span<const SentenceSpans> predicted, std::span<const SentenceSpans> gold);

/// Per-label reports; their counts sum to the overall counts.
std::map<std::string, EvalReport> per_type_report(std::span<const SentenceSpans> predicted,
                                                  std::span<const SentenceSpans> gold);

enum class BucketMode {
  // Tertiles over entity types: ceil(k/3) most frequent types are "high",
  // floor(k/3) least frequent are "low", the rest "mid".
  kTypeCount,
  // Tertiles over training mention mass: a type whose cumulative mass before
  // it is below 1/3 is "high", at or above 2/3 is "low".
  kMentionMass,
};

struct FrequencyBuckets {
  std::vector<std::string> high, mid, low;
  std::map<std::string, std::size_t> train_frequency;
};

/// Partitions the test corpus's entity types by how often they occur in the
/// training corpus. Ties are broken by label name.
FrequencyBuckets frequency_buckets(const Corpus& train, const Corpus& test, BucketMode mode = BucketMode::kTypeCount);

/// Evaluation restricted, on both sides, to the entity types of one bucket.
EvalReport evaluate_restricted(std::span<const SentenceSpans> predicted, std::span<const SentenceSpans> gold,
                               std::span<const std::string> labels);

EvalReport evaluate_with_buckets(std::span<const SentenceSpans> predicted, std::span<const SentenceSpans> gold,
                                 const FrequencyBuckets& buckets);

std::vector<SentenceSpans> gold_spans(const Corpus& corpus);

std::string format_report(const EvalReport& report);
std::string report_to_json(const EvalReport& report);

}  // namespace templner
