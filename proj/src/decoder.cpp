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

#include "templner/decoder.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

#include "templner/error.hpp"

namespace templner {
namespace {

const std::string& tie_word(const std::string& label, const LabelWordMap* words) {
  if (words && words->contains(label)) return words->word(label);
  return label;
}

double template_score(const TargetScore& s, bool length_normalize) {
  if (!length_normalize || s.token_logprobs.empty()) return s.total;
  return s.total / static_cast<double>(s.token_logprobs.size());
}

}  // namespace

std::vector<std::string> DecodeConfig::candidate_labels() const {
  if (!labels.empty()) return labels;
  std::vector<std::string> out;
  for (const auto& [label, word] : words.entries()) out.push_back(label);
  return out;
}

void DecodeConfig::validate() const {
  if (max_span_len < 1) throw ValueError("max_span_len must be >= 1");
  templ.validate();
  for (const auto& label : candidate_labels()) words.word(label);
}

std::vector<std::pair<std::size_t, std::size_t>> enumerate_spans(std::size_t n, std::size_t max_span_len) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  spans.reserve(span_count(n, max_span_len));
  for (std::size_t start = 0; start < n; ++start)
    for (std::size_t len = 1; len <= max_span_len && start + len <= n; ++len) spans.emplace_back(start, start + len);
  return spans;
}

std::size_t span_count(std::size_t n, std::size_t max_span_len) {
  std::size_t total = 0;
  for (std::size_t l = 1; l <= std::min(max_span_len, n); ++l) total += n - l + 1;
  return total;
}

ScoredCandidate pick_label(const EntitySpan& span, std::map<std::string, double> per_label_scores,
                           const LabelWordMap& words) {
  if (per_label_scores.empty()) throw ValueError("no label scores to choose from");
  const std::string* best = nullptr;
  double best_score = 0.0;
  for (const auto& [label, score] : per_label_scores) {
    bool better = false;
    if (!best || score > best_score) {
      better = true;
    } else if (score == best_score && !is_none(*best)) {
      better = is_none(label) || tie_word(label, &words) < tie_word(*best, &words);
    }
    if (better) {
      best = &label;
      best_score = score;
    }
  }
  ScoredCandidate out;
  out.span = {span.start, span.end, *best};
  out.score = best_score;
  out.per_label_scores = std::move(per_label_scores);
  return out;
}

namespace {

// Scores every (span, label) template of one sentence in a single batch.
std::vector<ScoredCandidate> classify_spans(const GenerativeScorer& scorer, std::span<const std::string> sentence,
                                            std::span<const std::pair<std::size_t, std::size_t>> spans,
                                            const DecodeConfig& config) {
  const auto labels = config.candidate_labels();
  std::vector<Tokens> targets;
  targets.reserve(spans.size() * (labels.size() + 1));
  for (const auto& [start, end] : spans) {
    if (start >= end || end > sentence.size()) throw ValueError("span outside the sentence");
    auto text = sentence.subspan(start, end - start);
    for (const auto& label : labels) targets.push_back(fill(config.templ, text, label, config.words).tokens);
    targets.push_back(fill(config.templ, text, kNoneLabel, config.words).tokens);
  }

  std::vector<TargetScore> scores;
  try {
    scores = scorer.score_targets(sentence, targets);
  } catch (const Error& e) {
    throw ScorerError("scoring sentence '" + join_tokens(sentence) + "': " + e.what());
  }

  std::vector<ScoredCandidate> out;
  out.reserve(spans.size());
  std::size_t k = 0;
  for (const auto& [start, end] : spans) {
    std::map<std::string, double> per_label;
    for (const auto& label : labels) per_label[label] = template_score(scores[k++], config.length_normalize);
    per_label[kNoneLabel] = template_score(scores[k++], config.length_normalize);
    out.push_back(pick_label({start, end, kNoneLabel}, std::move(per_label), config.words));
  }
  return out;
}

}  // namespace

ScoredCandidate classify_span(const GenerativeScorer& scorer, std::span<const std::string> sentence,
                              const EntitySpan& span, const DecodeConfig& config) {
  std::pair<std::size_t, std::size_t> one{span.start, span.end};
  return classify_spans(scorer, sentence, std::span(&one, 1), config).front();
}

bool candidate_precedes(const ScoredCandidate& a, const ScoredCandidate& b, const LabelWordMap* words) {
  if (a.score != b.score) return a.score > b.score;
  if (a.span.start != b.span.start) return a.span.start < b.span.start;
  if (a.span.length() != b.span.length()) return a.span.length() < b.span.length();
  return tie_word(a.span.label, words) < tie_word(b.span.label, words);
}

std::vector<ScoredCandidate> resolve_overlaps(std::vector<ScoredCandidate> candidates, const LabelWordMap* words) {
  std::erase_if(candidates, [](const ScoredCandidate& c) { return is_none(c.span.label); });
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const ScoredCandidate& a, const ScoredCandidate& b) { return candidate_precedes(a, b, words); });
  std::vector<ScoredCandidate> kept;
  for (auto& c : candidates) {
    bool clash = std::any_of(kept.begin(), kept.end(), [&](const ScoredCandidate& k) { return k.span.overlaps(c.span); });
    if (!clash) kept.push_back(std::move(c));
  }
  std::sort(kept.begin(), kept.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) { return a.span.start < b.span.start; });
  return kept;
}

SentenceDecode decode_sentence_detailed(const GenerativeScorer& scorer, std::span<const std::string> sentence,
                                        const DecodeConfig& config) {
  SentenceDecode out;
  if (sentence.empty()) return out;
  const auto spans = enumerate_spans(sentence.size(), config.max_span_len);
  out.candidates = classify_spans(scorer, sentence, spans, config);
  out.kept = resolve_overlaps(out.candidates, &config.words);
  return out;
}

std::vector<EntitySpan> decode_sentence(const GenerativeScorer& scorer, std::span<const std::string> sentence,
                                        const DecodeConfig& config) {
  std::vector<EntitySpan> out;
  for (const auto& c : decode_sentence_detailed(scorer, sentence, config).kept) out.push_back(c.span);
  return out;
}

std::vector<SentenceDecode> decode_corpus(const GenerativeScorer& scorer, std::span<const Tokens> sentences,
                                          const DecodeConfig& config) {
  config.validate();
  std::vector<SentenceDecode> out(sentences.size());
  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, sentences.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < sentences.size(); ++i) out[i] = decode_sentence_detailed(scorer, sentences[i], config);
    return out;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < sentences.size(); i += workers)
          out[i] = decode_sentence_detailed(scorer, sentences[i], config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<EntitySpan> ensemble_decode(std::span<const std::vector<ScoredEntity>> per_model) {
  if (per_model.empty()) throw ValueError("ensemble needs at least one model's output");
  struct Tally {
    std::size_t votes = 0;
    double score_sum = 0.0;
  };
  std::map<EntitySpan, Tally> tallies;
  for (const auto& model : per_model) {
    std::set<EntitySpan> seen;  // a model votes at most once per entity
    for (const auto& e : model) {
      if (!seen.insert(e.span).second) continue;
      auto& t = tallies[e.span];
      ++t.votes;
      t.score_sum += e.score;
    }
  }

  std::vector<std::pair<EntitySpan, Tally>> survivors;
  for (const auto& [span, tally] : tallies)
    if (2 * tally.votes > per_model.size()) survivors.emplace_back(span, tally);

  std::stable_sort(survivors.begin(), survivors.end(), [](const auto& a, const auto& b) {
    if (a.second.votes != b.second.votes) return a.second.votes > b.second.votes;
    if (a.second.score_sum != b.second.score_sum) return a.second.score_sum > b.second.score_sum;
    return std::forward_as_tuple(a.first.start, a.first.length(), a.first.label) <
           std::forward_as_tuple(b.first.start, b.first.length(), b.first.label);
  });

  std::vector<EntitySpan> kept;
  for (const auto& [span, tally] : survivors)
    if (std::none_of(kept.begin(), kept.end(), [&](const EntitySpan& k) { return k.overlaps(span); }))
      kept.push_back(span);
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace templner
