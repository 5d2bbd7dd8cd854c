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

#include "templner/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "templner/error.hpp"

namespace templner {
namespace {

enum class TagKind { kOutside, kBegin, kInside, kInvalid };

struct ParsedTag {
  TagKind kind = TagKind::kInvalid;
  std::string label;
};

ParsedTag parse_tag(const std::string& tag) {
  if (tag == "O") return {TagKind::kOutside, {}};
  if (tag.size() > 2 && tag[1] == '-') {
    if (tag[0] == 'B') return {TagKind::kBegin, tag.substr(2)};
    if (tag[0] == 'I') return {TagKind::kInside, tag.substr(2)};
  }
  return {};
}

// Returns the index of the first invalid tag, or tags.size() when valid.
std::size_t first_invalid_tag(std::span<const std::string> tags, std::string* why) {
  std::string open;  // label of the entity currently being extended
  for (std::size_t i = 0; i < tags.size(); ++i) {
    ParsedTag t = parse_tag(tags[i]);
    switch (t.kind) {
      case TagKind::kOutside:
        open.clear();
        break;
      case TagKind::kBegin:
        open = t.label;
        break;
      case TagKind::kInside:
        if (open != t.label) {
          if (why) *why = "tag '" + tags[i] + "' does not continue a B-/I-" + t.label;
          return i;
        }
        break;
      case TagKind::kInvalid:
        if (why) *why = "unrecognized tag '" + tags[i] + "' (expected O, B-<label> or I-<label>)";
        return i;
    }
  }
  return tags.size();
}

std::vector<std::string> labels_of(const std::vector<LabeledSentence>& sentences) {
  std::set<std::string> labels;
  for (const auto& s : sentences)
    for (const auto& span : s.spans()) labels.insert(span.label);
  return {labels.begin(), labels.end()};
}

std::map<std::string, std::size_t> count_mentions(const LabeledSentence& s) {
  std::map<std::string, std::size_t> counts;
  for (const auto& span : s.spans()) ++counts[span.label];
  return counts;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

std::vector<EntitySpan> spans_from_bio(std::span<const std::string> tags) {
  std::string why;
  if (std::size_t bad = first_invalid_tag(tags, &why); bad != tags.size())
    throw ParseError(0, "invalid BIO at position " + std::to_string(bad) + ": " + why);

  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    ParsedTag t = parse_tag(tags[i]);
    if (t.kind == TagKind::kBegin) {
      spans.push_back({i, i + 1, t.label});
    } else if (t.kind == TagKind::kInside) {
      spans.back().end = i + 1;
    }
  }
  return spans;
}

bool is_valid_bio(std::span<const std::string> tags) {
  return first_invalid_tag(tags, nullptr) == tags.size();
}

std::vector<std::string> bio_from_spans(std::span<const EntitySpan> spans, std::size_t length) {
  std::vector<std::string> tags(length, "O");
  std::vector<bool> used(length, false);
  for (const auto& span : spans) {
    if (span.start >= span.end || span.end > length)
      throw ValueError("span [" + std::to_string(span.start) + ", " + std::to_string(span.end) +
                       ") out of range for length " + std::to_string(length));
    if (span.label.empty()) throw ValueError("span with empty label");
    for (std::size_t i = span.start; i < span.end; ++i) {
      if (used[i])
        throw ValueError("overlapping spans at token " + std::to_string(i));
      used[i] = true;
      tags[i] = (i == span.start ? "B-" : "I-") + span.label;
    }
  }
  return tags;
}

LabeledSentence::LabeledSentence(Tokens tokens, std::vector<std::string> tags)
    : tokens_(std::move(tokens)), tags_(std::move(tags)) {
  if (tokens_.empty()) throw ValueError("sentence has no tokens");
  if (tokens_.size() != tags_.size())
    throw ValueError("sentence has " + std::to_string(tokens_.size()) + " tokens but " +
                     std::to_string(tags_.size()) + " tags");
  spans_ = spans_from_bio(tags_);
}

LabeledSentence LabeledSentence::from_spans(Tokens tokens, std::span<const EntitySpan> spans) {
  auto tags = bio_from_spans(spans, tokens.size());
  return LabeledSentence(std::move(tokens), std::move(tags));
}

Tokens LabeledSentence::span_tokens(const EntitySpan& span) const {
  if (span.start >= span.end || span.end > tokens_.size())
    throw ValueError("span out of range");
  return Tokens(tokens_.begin() + static_cast<std::ptrdiff_t>(span.start),
                tokens_.begin() + static_cast<std::ptrdiff_t>(span.end));
}

Corpus::Corpus(std::vector<LabeledSentence> sentences)
    : sentences_(std::move(sentences)), label_set_(labels_of(sentences_)) {}

Corpus::Corpus(std::vector<LabeledSentence> sentences, std::vector<std::string> label_set)
    : sentences_(std::move(sentences)) {
  std::set<std::string> declared(label_set.begin(), label_set.end());
  for (const auto& used : labels_of(sentences_))
    if (!declared.count(used))
      throw ValueError("label '" + used + "' is used but not in the declared label set");
  label_set_.assign(declared.begin(), declared.end());
}

std::size_t Corpus::mention_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences_) n += s.spans().size();
  return n;
}

Corpus parse_conll(std::istream& in) {
  std::vector<LabeledSentence> sentences;
  Tokens tokens;
  std::vector<std::string> tags;
  std::size_t sentence_start_line = 0;

  auto flush = [&]() {
    if (tokens.empty()) return;
    std::string why;
    if (std::size_t bad = first_invalid_tag(tags, &why); bad != tags.size())
      throw ParseError(sentence_start_line + bad, why);
    sentences.emplace_back(std::move(tokens), std::move(tags));
    tokens.clear();
    tags.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::vector<std::string> columns;
    for (std::string col; fields >> col;) columns.push_back(std::move(col));

    if (columns.empty() || columns.front() == "-DOCSTART-") {
      flush();
      continue;
    }
    if (columns.size() < 2) throw ParseError(line_no, "missing tag column in '" + line + "'");
    if (tokens.empty()) sentence_start_line = line_no;
    tokens.push_back(columns.front());
    tags.push_back(columns.back());
  }
  flush();
  return Corpus(std::move(sentences));
}

Corpus parse_conll_string(const std::string& text) {
  std::istringstream in(text);
  return parse_conll(in);
}

Corpus read_conll_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_conll(in);
}

void write_conll(std::ostream& out, const Corpus& corpus) {
  for (const auto& s : corpus.sentences()) {
    for (std::size_t i = 0; i < s.size(); ++i) out << s.tokens()[i] << ' ' << s.tags()[i] << '\n';
    out << '\n';
  }
}

std::string to_conll_string(const Corpus& corpus) {
  std::ostringstream out;
  write_conll(out, corpus);
  return out.str();
}

void write_conll_file(const std::string& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_conll(out, corpus);
}

std::size_t CorpusStats::total_mentions() const {
  std::size_t n = 0;
  for (const auto& [label, count] : mention_count_per_label) n += count;
  return n;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.sentence_count = corpus.size();
  for (const auto& label : corpus.label_set()) stats.mention_count_per_label[label] = 0;
  for (const auto& s : corpus.sentences()) {
    stats.token_count += s.size();
    for (const auto& span : s.spans()) ++stats.mention_count_per_label[span.label];
  }
  stats.entity_type_count = static_cast<std::size_t>(
      std::count_if(stats.mention_count_per_label.begin(), stats.mention_count_per_label.end(),
                    [](const auto& kv) { return kv.second > 0; }));
  return stats;
}

std::string format_stats_table(const CorpusStats& stats) {
  std::ostringstream out;
  out << std::left << std::setw(20) << "sentences" << stats.sentence_count << '\n'
      << std::setw(20) << "tokens" << stats.token_count << '\n'
      << std::setw(20) << "mentions" << stats.total_mentions() << '\n'
      << std::setw(20) << "entity types" << stats.entity_type_count << '\n';
  for (const auto& [label, count] : stats.mention_count_per_label)
    out << "  " << std::setw(18) << label << count << '\n';
  return out.str();
}

std::string stats_to_json(const CorpusStats& stats) {
  nlohmann::ordered_json j;
  j["sentence_count"] = stats.sentence_count;
  j["token_count"] = stats.token_count;
  j["mention_count_per_label"] = stats.mention_count_per_label;
  j["entity_type_count"] = stats.entity_type_count;
  return j.dump(2);
}

Corpus sample_few_shot(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
  const auto& sentences = corpus.sentences();
  std::vector<std::map<std::string, std::size_t>> mentions;
  mentions.reserve(sentences.size());
  for (const auto& s : sentences) mentions.push_back(count_mentions(s));

  const auto order = shuffled_indices(sentences.size(), seed);
  std::vector<bool> kept(sentences.size(), false);
  std::map<std::string, std::size_t> counts;
  std::vector<LabeledSentence> out;

  if (k > 0) {
    for (const auto& label : corpus.label_set()) {
      for (std::size_t idx : order) {
        if (counts[label] >= k) break;
        if (kept[idx] || !mentions[idx].count(label)) continue;
        kept[idx] = true;
        out.push_back(sentences[idx]);
        for (const auto& [l, c] : mentions[idx]) counts[l] += c;
      }
    }
  }
  return Corpus(std::move(out), corpus.label_set());
}

DownsampleResult downsample_in_domain(const Corpus& corpus,
                                      const std::map<std::string, std::size_t>& quotas,
                                      std::uint64_t seed, DownsampleOptions options) {
  const auto& labels = corpus.label_set();
  for (const auto& [label, quota] : quotas)
    if (!std::binary_search(labels.begin(), labels.end(), label))
      throw ValueError("quota for unknown label '" + label + "'");

  DownsampleResult result;
  std::vector<LabeledSentence> out;
  std::map<std::string, std::size_t>& achieved = result.achieved;
  for (const auto& [label, quota] : quotas) achieved[label] = 0;

  for (std::size_t idx : shuffled_indices(corpus.size(), seed)) {
    const auto& s = corpus.sentences()[idx];
    if (s.spans().empty()) {
      if (options.keep_entity_free) out.push_back(s);
      continue;
    }
    auto mentions = count_mentions(s);
    bool fits = std::all_of(mentions.begin(), mentions.end(), [&](const auto& kv) {
      auto q = quotas.find(kv.first);
      return q == quotas.end() || achieved[kv.first] + kv.second <= q->second;
    });
    if (!fits) continue;
    out.push_back(s);
    for (const auto& [label, count] : mentions) achieved[label] += count;
  }

  for (const auto& [label, quota] : quotas) {
    if (achieved[label] > quota) result.overshoot[label] = achieved[label] - quota;
    if (achieved[label] < quota) result.shortfall[label] = quota - achieved[label];
  }
  result.corpus = Corpus(std::move(out), labels);
  return result;
}

std::string join_tokens(std::span<const std::string> tokens, char sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(sep);
    out += tokens[i];
  }
  return out;
}

Tokens split_tokens(const std::string& text) {
  std::istringstream in(text);
  Tokens out;
  for (std::string tok; in >> tok;) out.push_back(std::move(tok));
  return out;
}

}  // namespace templner
