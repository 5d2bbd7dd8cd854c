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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "templner/corpus.hpp"
#include "templner/scorer.hpp"
#include "templner/templates.hpp"

namespace templner {

struct DecodeConfig {
  std::size_t max_span_len = 8;
  TemplateSpec templ;
  LabelWordMap words;
  // Labels to try for every span, in addition to NONE. Defaults to every
  // label of `words` when empty.
  std::vector<std::string> labels;
  // Divide each template score by its token count. Off by default: the
  // ranking uses the raw summed log-probability.
  bool length_normalize = false;
  std::size_t workers = 1;

  std::vector<std::string> candidate_labels() const;
  void validate() const;
};

struct ScoredCandidate {
  EntitySpan span;  // span.label is the argmax label (kNoneLabel for NONE)
  double score = 0.0;
  std::map<std::string, double> per_label_scores;  // includes kNoneLabel
};

/// All (start, end) with 1 <= end - start <= min(max_span_len, n), ordered by
/// start then length.
std::vector<std::pair<std::size_t, std::size_t>> enumerate_spans(std::size_t n, std::size_t max_span_len);

/// Closed form of the enumeration size: sum_{l=1..min(L,n)} (n - l + 1).
std::size_t span_count(std::size_t n, std::size_t max_span_len);

/// Argmax over per-label scores. Exact ties go to NONE, then to the
/// lexicographically smaller label word.
ScoredCandidate pick_label(const EntitySpan& span, std::map<std::string, double> per_label_scores,
                           const LabelWordMap& words);

ScoredCandidate classify_span(const GenerativeScorer& scorer, std::span<const std::string> sentence,
                              const EntitySpan& span, const DecodeConfig& config);

/// Orders candidates by score descending, then earlier start, shorter span,
/// smaller label word.
bool candidate_precedes(const ScoredCandidate& a, const ScoredCandidate& b, const LabelWordMap* words);

/// Drops NONE, then greedily keeps the best candidate that overlaps nothing
/// kept so far. Output is disjoint and sorted by start.
std::vector<ScoredCandidate> resolve_overlaps(std::vector<ScoredCandidate> candidates, const LabelWordMap* words);

struct SentenceDecode {
  std::vector<ScoredCandidate> kept;
  std::vector<ScoredCandidate> candidates;  // every enumerated span, classified
};

SentenceDecode decode_sentence_detailed(const GenerativeScorer& scorer, std::span<const std::string> sentence,
                                        const DecodeConfig& config);
std::vector<EntitySpan> decode_sentence(const GenerativeScorer& scorer, std::span<const std::string> sentence,
                                        const DecodeConfig& config);

/// Decodes every sentence; `config.workers` threads share the scorer. The
/// result does not depend on the worker count.
std::vector<SentenceDecode> decode_corpus(const GenerativeScorer& scorer, std::span<const Tokens> sentences,
                                          const DecodeConfig& config);

struct ScoredEntity {
  EntitySpan span;
  double score = 0.0;
};

/// Entity-level voting. Keeps an exact (span, label) iff more than half of
/// the models predicted it; overlaps among survivors go to more votes, then
/// larger summed score, then earlier start, shorter span, smaller label.
std::vector<EntitySpan> ensemble_decode(std::span<const std::vector<ScoredEntity>> per_model);

}  // namespace templner
