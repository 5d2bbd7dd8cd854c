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

#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "templner/error.hpp"
#include "templner/pairs.hpp"
#include "templner/synthetic.hpp"

using namespace templner;
using templner::testing::sentence;
using templner::testing::toks;

namespace {

// Tokens are unique within each sentence, so a span's text pins down its
// coordinates.
Corpus ten_mentions() {
  return Corpus({
      sentence("ACL will be held in Bangkok", "B-ORG O O O O B-LOC"),
      sentence("mr Kato met dr Lee at Lima", "B-PER I-PER O B-PER I-PER B-LOC I-LOC"),
      sentence("acme corp hired Ng", "B-ORG I-ORG O B-PER"),
      sentence("near Oslo and Rome lies nothing", "B-LOC I-LOC O B-LOC O O"),
      sentence("Abe", "B-PER"),
  });
}

std::pair<std::size_t, std::size_t> locate(const Tokens& sentence, const Tokens& span) {
  auto it = std::search(sentence.begin(), sentence.end(), span.begin(), span.end());
  REQUIRE(it != sentence.end());
  const auto start = static_cast<std::size_t>(it - sentence.begin());
  return {start, start + span.size()};
}

}  // namespace

TEST_CASE("negative_count rounds half up") {
  CHECK(negative_count(1.5, 10) == 15);
  CHECK(negative_count(1.5, 1) == 2);
  CHECK(negative_count(1.5, 3) == 5);
  CHECK(negative_count(1.5, 0) == 0);
  CHECK(negative_count(0.0, 7) == 0);
  for (std::size_t p = 1; p <= 200; ++p) CHECK(negative_count(1.5, p) == (3 * p + 1) / 2);
}

TEST_CASE("ten gold mentions give ten positives and fifteen negatives") {
  const auto spec = builtin_templates()[0];
  const auto corpus = ten_mentions();
  const auto words = default_label_words(corpus.label_set());
  auto r = build_training_pairs(corpus, spec, words, {.seed = 3});
  CHECK(r.positives == 10);
  CHECK(r.negatives == 15);
  CHECK(r.shortfall == 0);
  CHECK(r.warning.empty());
  CHECK(r.pairs.size() == 25);
  const auto n_pos = std::count_if(r.pairs.begin(), r.pairs.end(),
                                   [](const TrainingPair& p) { return p.polarity == Polarity::kPositive; });
  CHECK(n_pos == 10);
}

TEST_CASE("positive targets realize their gold mention") {
  const auto spec = builtin_templates()[0];
  const auto corpus = ten_mentions();
  const auto words = default_label_words(corpus.label_set());
  auto r = build_training_pairs(corpus, spec, words, {.seed = 1});

  bool saw_bangkok = false;
  for (const auto& p : r.pairs) {
    if (join_tokens(p.target) == "Bangkok is a location entity") saw_bangkok = true;
    auto m = match_filled(spec, p.target, words);
    REQUIRE(m.has_value());
    const auto [start, end] = locate(p.source, m->span_text);
    const auto it = std::find_if(corpus.sentences().begin(), corpus.sentences().end(),
                                 [&](const LabeledSentence& s) { return s.tokens() == p.source; });
    REQUIRE(it != corpus.sentences().end());
    const auto& gold = it->spans();
    const bool is_gold = std::any_of(gold.begin(), gold.end(), [&](const EntitySpan& g) {
      return g.start == start && g.end == end;
    });
    if (p.polarity == Polarity::kPositive) {
      CHECK(is_gold);
      CHECK(std::find(gold.begin(), gold.end(), EntitySpan{start, end, m->label}) != gold.end());
    } else {
      CHECK_FALSE(is_gold);
      CHECK(is_none(m->label));
      CHECK(end - start <= 8);
    }
  }
  CHECK(saw_bangkok);
}

TEST_CASE("pair building is deterministic and seed-dependent") {
  const auto spec = builtin_templates()[0];
  const auto corpus = ten_mentions();
  const auto words = default_label_words(corpus.label_set());
  auto a = build_training_pairs(corpus, spec, words, {.seed = 5});
  auto b = build_training_pairs(corpus, spec, words, {.seed = 5});
  auto c = build_training_pairs(corpus, spec, words, {.seed = 6});
  CHECK(a.pairs == b.pairs);
  CHECK(a.pairs != c.pairs);
}

TEST_CASE("neg_ratio 0 gives positives only") {
  const auto corpus = ten_mentions();
  auto r = build_training_pairs(corpus, builtin_templates()[0], default_label_words(corpus.label_set()),
                                {.neg_ratio = 0.0});
  CHECK(r.pairs.size() == 10);
  CHECK(r.negatives == 0);
}

TEST_CASE("exhausted negative pool is reported") {
  Corpus c({sentence("Rome", "B-LOC"), sentence("at Oslo", "O B-LOC")});
  // Eligible: "at", "at Oslo" (two spans) against round(1.5 * 2) = 3 requested.
  auto r = build_training_pairs(c, builtin_templates()[0], default_label_words(c.label_set()), {.seed = 0});
  CHECK(r.positives == 2);
  CHECK(r.requested_negatives == 3);
  CHECK(r.negatives == 2);
  CHECK(r.shortfall == 1);
}

TEST_CASE("no gold mentions") {
  Corpus c({sentence("quiet day", "O O")}, {"LOC"});
  const auto words = default_label_words(c.label_set());
  auto r = build_training_pairs(c, builtin_templates()[0], words, {});
  CHECK(r.pairs.empty());
  CHECK_FALSE(r.warning.empty());
  CHECK_THROWS_AS(build_training_pairs(Corpus{}, builtin_templates()[0], words, {}), ValueError);
}

TEST_CASE("negative ratio holds for P = 1..200 with ample spans") {
  const auto lang = default_synthetic_language();
  const auto words = lang.label_words();
  const auto spec = builtin_templates()[0];
  auto big = generate_synthetic_corpus(lang, 600, 17);
  std::vector<LabeledSentence> picked;
  std::size_t p = 0;
  for (const auto& s : big.sentences()) {
    if (s.spans().size() != 1) continue;
    picked.push_back(s);
    ++p;
    auto r = build_training_pairs(Corpus(picked, big.label_set()), spec, words, {.seed = p});
    CHECK(r.positives == p);
    CHECK(r.negatives == negative_count(1.5, p));
    if (p == 200) break;
  }
  CHECK(p == 200);
}

TEST_CASE("pairs file round trip") {
  const auto corpus = ten_mentions();
  auto r = build_training_pairs(corpus, builtin_templates()[2], default_label_words(corpus.label_set()), {});
  std::stringstream io;
  write_pairs(io, r.pairs);
  CHECK(read_pairs(io) == r.pairs);

  std::istringstream bad("a b\tc d\n");
  CHECK_THROWS_AS(read_pairs(bad), ParseError);
  std::istringstream bad_polarity("a b\tc d\tmaybe\n");
  CHECK_THROWS_AS(read_pairs(bad_polarity), ParseError);
}
