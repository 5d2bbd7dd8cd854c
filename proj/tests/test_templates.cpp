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

#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "templner/error.hpp"
#include "templner/templates.hpp"

using namespace templner;
using templner::testing::toks;

namespace {

LabelWordMap conll_words() {
  const std::vector<std::string> labels{"LOC", "MISC", "ORG", "PER"};
  return default_label_words(labels);
}

}  // namespace

TEST_CASE("builtin templates") {
  const auto t = builtin_templates();
  REQUIRE(t.size() == 4);
  CHECK(join_tokens(t[0].entity_pattern) == "{span} is a {type} entity");
  CHECK(join_tokens(t[0].none_pattern) == "{span} is not a named entity");
  CHECK(join_tokens(t[1].entity_pattern) == "The entity type of {span} is {type}");
  CHECK(join_tokens(t[1].none_pattern) == "The entity type of {span} is none entity");
  CHECK(join_tokens(t[2].entity_pattern) == "{span} belongs to {type} category");
  CHECK(join_tokens(t[2].none_pattern) == "{span} belongs to none category");
  CHECK(join_tokens(t[3].entity_pattern) == "{span} should be tagged as {type}");
  CHECK(join_tokens(t[3].none_pattern) == "{span} should tagged as none entity");

  CHECK(*t[0].reference_dev_f1 == 95.27);
  CHECK(*t[1].reference_dev_f1 == 95.15);
  CHECK(*t[2].reference_dev_f1 == 88.42);
  CHECK(*t[3].reference_dev_f1 == 76.80);

  std::set<std::string> names;
  for (const auto& spec : t) names.insert(spec.name);
  CHECK(names.size() == 4);
  CHECK(find_template(t, "is-a-entity").entity_pattern == t[0].entity_pattern);
  CHECK_THROWS_AS(find_template(t, "nope"), ValueError);
}

TEST_CASE("default label words") {
  const auto w = conll_words();
  CHECK(w.word("LOC") == "location");
  CHECK(w.word("PER") == "person");
  CHECK(w.word("ORG") == "organization");
  CHECK(w.word("MISC") == "miscellaneous");

  const std::vector<std::string> custom{"MOVIE_TITLE", "Rating-Avg"};
  const auto c = default_label_words(custom);
  CHECK(c.word("MOVIE_TITLE") == "movie title");
  CHECK(c.word("Rating-Avg") == "rating avg");
  CHECK(c.word_tokens("MOVIE_TITLE") == toks("movie title"));

  const std::vector<std::string> clash{"A_B", "a-b"};
  CHECK_THROWS_AS(default_label_words(clash), ValueError);
  CHECK_THROWS_AS(LabelWordMap({{"X", "thing"}, {"Y", "thing"}}), ValueError);
  CHECK_THROWS_AS(w.word("GPE"), ValueError);
  CHECK_THROWS_AS(w.with_overrides({{"PER", "location"}}), ValueError);
  CHECK(w.with_overrides({{"PER", "human"}}).word("PER") == "human");
}

TEST_CASE("fill splices tokens verbatim") {
  const auto spec = builtin_templates()[0];
  const auto w = conll_words();
  CHECK(join_tokens(fill(spec, toks("Bangkok"), "LOC", w).tokens) == "Bangkok is a location entity");
  CHECK(join_tokens(fill(spec, toks("ACL"), kNoneLabel, w).tokens) == "ACL is not a named entity");
  CHECK(join_tokens(fill(spec, toks("in Bangkok"), "ORG", w).tokens) == "in Bangkok is a organization entity");
  CHECK(join_tokens(fill(builtin_templates()[1], toks("ACL"), "MISC", w).tokens) ==
        "The entity type of ACL is miscellaneous");

  const auto filled = fill(spec, toks("New York"), "LOC", w);
  CHECK(filled.span_text == toks("New York"));
  CHECK(filled.label == "LOC");
  CHECK_THROWS_AS(fill(spec, toks("x"), "GPE", w), ValueError);
}

TEST_CASE("fill is injective on span text and never leaks label words into NONE") {
  const auto w = conll_words();
  const std::vector<Tokens> spans{toks("a"), toks("a b"), toks("b"), toks("is a"), toks("a is"), toks("entity")};
  for (const auto& spec : builtin_templates()) {
    for (const std::string& label : std::vector<std::string>{"LOC", "PER", kNoneLabel}) {
      std::set<Tokens> seen;
      for (const auto& s : spans) seen.insert(fill(spec, s, label, w).tokens);
      CHECK(seen.size() == spans.size());
    }
    const auto none = fill(spec, toks("x"), kNoneLabel, w).tokens;
    for (const auto& [label, word] : w.entries()) CHECK(join_tokens(none).find(word) == std::string::npos);
  }
}

TEST_CASE("match_filled recovers span and label") {
  const auto w = conll_words();
  for (const auto& spec : builtin_templates()) {
    for (const std::string& label : std::vector<std::string>{"LOC", "ORG", "MISC", kNoneLabel}) {
      const auto filled = fill(spec, toks("the big apple"), label, w);
      auto m = match_filled(spec, filled.tokens, w);
      REQUIRE(m.has_value());
      CHECK(m->span_text == toks("the big apple"));
      CHECK(m->label == label);
    }
    CHECK_FALSE(match_filled(spec, toks("nothing like it"), w).has_value());
  }
}

TEST_CASE("template specs are validated") {
  CHECK_THROWS_AS(TemplateSpec::parse("x", "{span} is {type} {type}", "{span} no"), ValueError);
  CHECK_THROWS_AS(TemplateSpec::parse("x", "{span} is {type}", "{span} is {type}"), ValueError);
  CHECK_THROWS_AS(TemplateSpec::parse("x", "is {type}", "{span} no"), ValueError);
  CHECK_NOTHROW(TemplateSpec::parse("x", "{type} : {span}", "none : {span}"));
}

TEST_CASE("template config") {
  const auto cfg = parse_template_config(R"({
    "templates": [{"name": "mine", "entity_pattern": "{span} means {type}",
                   "none_pattern": "{span} means nothing", "reference_dev_f1": 50.5}],
    "label_words": {"LOC": "place"}
  })");
  REQUIRE(cfg.templates.size() == 1);
  CHECK(cfg.templates[0].name == "mine");
  CHECK(*cfg.templates[0].reference_dev_f1 == 50.5);
  CHECK(cfg.label_words.at("LOC") == "place");

  CHECK_THROWS_AS(parse_template_config("{"), ParseError);
  CHECK_THROWS_AS(parse_template_config(R"({"templates":[{"name":"x"}]})"), ParseError);
  CHECK_THROWS_AS(
      parse_template_config(R"({"templates":[{"name":"x","entity_pattern":"a","none_pattern":"{span}"}]})"),
      ValueError);
}
