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

#include "templner/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "templner/error.hpp"

namespace templner {

std::size_t negative_count(double neg_ratio, std::size_t positives) {
  return static_cast<std::size_t>(std::floor(neg_ratio * static_cast<double>(positives) + 0.5));
}

PairBuildResult build_training_pairs(const Corpus& corpus, const TemplateSpec& spec, const LabelWordMap& words,
                                     const PairOptions& options) {
  if (corpus.empty()) throw ValueError("cannot build pairs from an empty corpus");
  if (!(options.neg_ratio >= 0.0)) throw ValueError("neg_ratio must be >= 0");
  if (options.max_span_len < 1) throw ValueError("max_span_len must be >= 1");

  PairBuildResult result;
  for (const auto& s : corpus.sentences())
    for (const auto& span : s.spans())
      result.pairs.push_back({s.tokens(), fill(spec, s.span_tokens(span), span.label, words).tokens,
                              Polarity::kPositive});
  result.positives = result.pairs.size();

  if (result.positives == 0 && options.neg_ratio > 0.0) {
    result.warning = "corpus has no gold mentions; nothing anchors the negative ratio";
    result.pairs.clear();
    return result;
  }

  struct Candidate {
    std::size_t sentence, start, end;
  };
  std::vector<Candidate> eligible;
  for (std::size_t si = 0; si < corpus.size(); ++si) {
    const auto& s = corpus.sentences()[si];
    std::set<std::pair<std::size_t, std::size_t>> gold;
    for (const auto& span : s.spans()) gold.emplace(span.start, span.end);
    for (std::size_t start = 0; start < s.size(); ++start)
      for (std::size_t len = 1; len <= options.max_span_len && start + len <= s.size(); ++len)
        if (!gold.count({start, start + len})) eligible.push_back({si, start, start + len});
  }

  std::mt19937_64 rng(options.seed);
  result.requested_negatives = negative_count(options.neg_ratio, result.positives);
  const std::size_t take = std::min(result.requested_negatives, eligible.size());
  result.shortfall = result.requested_negatives - take;

  // Partial Fisher-Yates: the first `take` entries become a uniform sample.
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, eligible.size() - 1);
    std::swap(eligible[i], eligible[pick(rng)]);
    const auto& c = eligible[i];
    const auto& s = corpus.sentences()[c.sentence];
    EntitySpan span{c.start, c.end, kNoneLabel};
    result.pairs.push_back({s.tokens(), fill(spec, s.span_tokens(span), kNoneLabel, words).tokens,
                            Polarity::kNegative});
  }
  result.negatives = take;

  std::shuffle(result.pairs.begin(), result.pairs.end(), rng);
  return result;
}

void write_pairs(std::ostream& out, const std::vector<TrainingPair>& pairs) {
  for (const auto& p : pairs)
    out << join_tokens(p.source) << '\t' << join_tokens(p.target) << '\t'
        << (p.polarity == Polarity::kPositive ? "positive" : "negative") << '\n';
}

std::vector<TrainingPair> read_pairs(std::istream& in) {
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    for (std::string f; std::getline(row, f, '\t');) fields.push_back(f);
    if (fields.size() != 3) throw ParseError(line_no, "expected 3 tab-separated fields");
    TrainingPair p{split_tokens(fields[0]), split_tokens(fields[1]), Polarity::kPositive};
    if (fields[2] == "negative")
      p.polarity = Polarity::kNegative;
    else if (fields[2] != "positive")
      throw ParseError(line_no, "unknown polarity '" + fields[2] + "'");
    if (p.source.empty() || p.target.empty()) throw ParseError(line_no, "empty source or target");
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void write_pairs_file(const std::string& path, const std::vector<TrainingPair>& pairs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_pairs(out, pairs);
}

std::vector<TrainingPair> read_pairs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_pairs(in);
}

}  // namespace templner
