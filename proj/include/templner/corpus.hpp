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
#include <map>
#include <span>
#include <string>
#include <vector>

namespace templner {

using Tokens = std::vector<std::string>;

/// A contiguous entity mention over token indices [start, end).
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string label;

  std::size_t length() const { return end - start; }
  bool overlaps(const EntitySpan& other) const {
    return start < other.end && other.start < end;
  }

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

/// Converts a strict BIO tag sequence to its entity spans, sorted by start.
/// Throws ParseError on an I- tag that does not continue a same-label B-/I-.
std::vector<EntitySpan> spans_from_bio(std::span<const std::string> tags);

/// Inverse of spans_from_bio. Throws ValueError on overlapping or
/// out-of-range spans.
std::vector<std::string> bio_from_spans(std::span<const EntitySpan> spans, std::size_t length);

/// True when `tags` is a valid strict BIO sequence.
bool is_valid_bio(std::span<const std::string> tags);

class LabeledSentence {
 public:
  LabeledSentence() = default;
  // Validates |tokens| == |tags|, nonempty, strict BIO.
  LabeledSentence(Tokens tokens, std::vector<std::string> tags);

  static LabeledSentence from_spans(Tokens tokens, std::span<const EntitySpan> spans);

  const Tokens& tokens() const { return tokens_; }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::vector<EntitySpan>& spans() const { return spans_; }
  std::size_t size() const { return tokens_.size(); }

  Tokens span_tokens(const EntitySpan& span) const;

  friend bool operator==(const LabeledSentence&, const LabeledSentence&) = default;

 private:
  Tokens tokens_;
  std::vector<std::string> tags_;
  std::vector<EntitySpan> spans_;
};

class Corpus {
 public:
  Corpus() = default;
  // Label set inferred from the sentences' tags.
  explicit Corpus(std::vector<LabeledSentence> sentences);
  // Label set declared explicitly; must be a superset of the labels used.
  Corpus(std::vector<LabeledSentence> sentences, std::vector<std::string> label_set);

  const std::vector<LabeledSentence>& sentences() const { return sentences_; }
  // Sorted, unique.
  const std::vector<std::string>& label_set() const { return label_set_; }
  std::size_t size() const { return sentences_.size(); }
  bool empty() const { return sentences_.empty(); }

  std::size_t mention_count() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<LabeledSentence> sentences_;
  std::vector<std::string> label_set_;
};

/// Parses token-per-line text; the last whitespace-separated column is the
/// BIO tag, blank lines separate sentences. `-DOCSTART-` lines are treated
/// as sentence separators.
Corpus parse_conll(std::istream& in);
Corpus parse_conll_string(const std::string& text);
Corpus read_conll_file(const std::string& path);

/// Emits "token SPACE tag" lines with a blank line after each sentence.
void write_conll(std::ostream& out, const Corpus& corpus);
std::string to_conll_string(const Corpus& corpus);
void write_conll_file(const std::string& path, const Corpus& corpus);

struct CorpusStats {
  std::size_t sentence_count = 0;
  std::size_t token_count = 0;
  std::map<std::string, std::size_t> mention_count_per_label;
  std::size_t entity_type_count = 0;

  std::size_t total_mentions() const;
};

CorpusStats corpus_stats(const Corpus& corpus);
std::string format_stats_table(const CorpusStats& stats);
std::string stats_to_json(const CorpusStats& stats);

/// Greedy per-type K-shot sampling. Labels are visited in label_set order;
/// sentences in seed-shuffled order. A sentence is added while its label is
/// under quota, and every mention it carries counts toward its own label.
Corpus sample_few_shot(const Corpus& corpus, std::size_t k, std::uint64_t seed);

struct DownsampleOptions {
  // Sentences without any entity mention are dropped unless this is set.
  bool keep_entity_free = false;
};

struct DownsampleResult {
  Corpus corpus;
  std::map<std::string, std::size_t> achieved;
  // achieved - quota, for labels that went over. Only co-occurrence can
  // cause this and the strict-fit rule never produces it, but the field is
  // reported so callers never have to assume it.
  std::map<std::string, std::size_t> overshoot;
  std::map<std::string, std::size_t> shortfall;
};

/// Keeps seed-shuffled sentences whose mentions all fit within the remaining
/// per-label quotas. Labels absent from `quotas` are unconstrained.
DownsampleResult downsample_in_domain(const Corpus& corpus,
                                      const std::map<std::string, std::size_t>& quotas,
                                      std::uint64_t seed, DownsampleOptions options = {});

std::string join_tokens(std::span<const std::string> tokens, char sep = ' ');
Tokens split_tokens(const std::string& text);

}  // namespace templner
