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
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "templner/error.hpp"
#include "templner/eval.hpp"

using namespace templner;
using templner::testing::sentence;

namespace {

// Five sentences with hand-counted per-type outcomes:
//   PER: tp 2, fp 1, fn 1    LOC: tp 1, fp 1, fn 2    ORG: tp 0, fp 1, fn 1
std::vector<SentenceSpans> fixture_gold() {
  return {
      {{0, 2, "PER"}, {3, 4, "LOC"}},
      {{1, 2, "PER"}},
      {{0, 1, "LOC"}, {2, 4, "ORG"}},
      {{5, 6, "PER"}},
      {{0, 3, "LOC"}},
  };
}

std::vector<SentenceSpans> fixture_pred() {
  return {
      {{0, 2, "PER"}, {3, 4, "LOC"}},  // two hits
      {{1, 3, "PER"}},                 // boundary miss: fp + fn
      {{0, 1, "ORG"}},                 // wrong label: fp ORG, fn LOC, fn ORG
      {{5, 6, "PER"}},                 // hit
      {{0, 2, "LOC"}},                 // boundary miss
  };
}

}  // namespace

TEST_CASE("evaluate examples") {
  const auto gold = fixture_gold();
  SUBCASE("identity") {
    auto r = evaluate(gold, gold);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
  }
  SUBCASE("tp 2, fp 1, fn 1") {
    std::vector<SentenceSpans> g{{{0, 1, "A"}, {2, 3, "A"}, {4, 5, "A"}}};
    std::vector<SentenceSpans> p{{{0, 1, "A"}, {2, 3, "A"}, {6, 7, "A"}}};
    auto r = evaluate(p, g);
    CHECK(r.counts == Counts{2, 1, 1});
    CHECK(r.precision == doctest::Approx(2.0 / 3.0));
    CHECK(r.recall == doctest::Approx(2.0 / 3.0));
    CHECK(r.f1 == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("empty predictions") {
    std::vector<SentenceSpans> none(gold.size());
    auto r = evaluate(none, gold);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);
  }
  SUBCASE("both empty") {
    std::vector<SentenceSpans> none(3);
    auto r = evaluate(none, none);
    CHECK(r.f1 == 0.0);
  }
  SUBCASE("misaligned input") {
    std::vector<SentenceSpans> shorter(gold.size() - 1);
    CHECK_THROWS_AS(evaluate(shorter, gold), ValueError);
  }
}

TEST_CASE("per-type counts on the hand-counted fixture") {
  auto r = evaluate(fixture_pred(), fixture_gold());
  CHECK(r.per_type.at("PER").counts == Counts{2, 1, 1});
  CHECK(r.per_type.at("LOC").counts == Counts{1, 1, 2});
  CHECK(r.per_type.at("ORG").counts == Counts{0, 1, 1});
  CHECK(r.counts == Counts{3, 3, 4});
  CHECK(r.precision == doctest::Approx(0.5));
  CHECK(r.recall == doctest::Approx(3.0 / 7.0));

  Counts sum;
  for (const auto& [label, sub] : per_type_report(fixture_pred(), fixture_gold())) sum += sub.counts;
  CHECK(sum == r.counts);
}

TEST_CASE("single-label corpus: per-type equals overall") {
  std::vector<SentenceSpans> g{{{0, 1, "A"}}, {{1, 2, "A"}}};
  std::vector<SentenceSpans> p{{{0, 1, "A"}}, {{2, 3, "A"}}};
  auto r = evaluate(p, g);
  REQUIRE(r.per_type.size() == 1);
  CHECK(r.per_type.at("A").counts == r.counts);
  CHECK(r.per_type.at("A").f1 == r.f1);
}

TEST_CASE("symmetry and permutation invariance") {
  auto pred = fixture_pred();
  auto gold = fixture_gold();
  auto r = evaluate(pred, gold);
  auto swapped = evaluate(gold, pred);
  CHECK(swapped.precision == r.recall);
  CHECK(swapped.recall == r.precision);
  CHECK(swapped.f1 == r.f1);

  std::vector<std::size_t> order{3, 0, 4, 2, 1};
  std::vector<SentenceSpans> p2, g2;
  for (auto i : order) {
    p2.push_back(pred[i]);
    g2.push_back(gold[i]);
  }
  CHECK(evaluate(p2, g2).f1 == r.f1);
}

TEST_CASE("frequency buckets") {
  auto corpus_with = [](std::map<std::string, std::size_t> freq) {
    std::vector<LabeledSentence> sentences;
    for (const auto& [label, n] : freq)
      for (std::size_t i = 0; i < n; ++i) sentences.push_back(sentence("x", "B-" + label));
    return Corpus(std::move(sentences));
  };

  SUBCASE("three types, one per bucket") {
    auto train = corpus_with({{"A", 1}, {"B", 100}, {"C", 10}});
    auto b = frequency_buckets(train, train);
    CHECK(b.high == std::vector<std::string>{"B"});
    CHECK(b.mid == std::vector<std::string>{"C"});
    CHECK(b.low == std::vector<std::string>{"A"});
  }
  SUBCASE("four types split 2 / 1 / 1") {
    auto train = corpus_with({{"A", 5}, {"B", 40}, {"C", 10}, {"D", 1}});
    auto b = frequency_buckets(train, train);
    CHECK(b.high == std::vector<std::string>{"B", "C"});
    CHECK(b.mid == std::vector<std::string>{"A"});
    CHECK(b.low == std::vector<std::string>{"D"});
  }
  SUBCASE("equal frequencies fall back to label order") {
    auto train = corpus_with({{"C", 2}, {"A", 2}, {"B", 2}});
    auto b = frequency_buckets(train, train);
    CHECK(b.high == std::vector<std::string>{"A"});
    CHECK(b.mid == std::vector<std::string>{"B"});
    CHECK(b.low == std::vector<std::string>{"C"});
  }
  SUBCASE("test types unseen in training rank last") {
    auto train = corpus_with({{"A", 3}, {"B", 2}});
    auto test = corpus_with({{"A", 1}, {"B", 1}, {"Z", 1}});
    auto b = frequency_buckets(train, test);
    CHECK(b.train_frequency.at("Z") == 0);
    CHECK(b.low == std::vector<std::string>{"Z"});
  }
  SUBCASE("mention mass mode") {
    auto train = corpus_with({{"A", 80}, {"B", 10}, {"C", 6}, {"D", 4}});
    auto b = frequency_buckets(train, train, BucketMode::kMentionMass);
    CHECK(b.high == std::vector<std::string>{"A"});
    CHECK(b.low == std::vector<std::string>{"B", "C", "D"});
    CHECK(b.mid.empty());
  }
  SUBCASE("empty training corpus") {
    CHECK_THROWS_AS(frequency_buckets(Corpus{}, corpus_with({{"A", 1}})), ValueError);
  }
}

TEST_CASE("bucket evaluation restricts both sides") {
  FrequencyBuckets b;
  b.high = {"PER"};
  b.mid = {"LOC"};
  b.low = {"ORG"};
  auto r = evaluate_with_buckets(fixture_pred(), fixture_gold(), b);
  CHECK(r.buckets.at("high").counts == Counts{2, 1, 1});
  CHECK(r.buckets.at("mid").counts == Counts{1, 1, 2});
  CHECK(r.buckets.at("low").counts == Counts{0, 1, 1});

  const auto table = format_report(r);
  CHECK(table.find("[high]") != std::string::npos);
  const auto json = report_to_json(r);
  CHECK(json.find("\"buckets\"") != std::string::npos);
  CHECK(json.find("\"per_type\"") != std::string::npos);
}

TEST_CASE("gold_spans reads corpus tags") {
  Corpus c({sentence("mr Kato", "B-PER I-PER"), sentence("x y", "O O")});
  auto g = gold_spans(c);
  REQUIRE(g.size() == 2);
  CHECK(g[0] == SentenceSpans{{0, 2, "PER"}});
  CHECK(g[1].empty());
}
