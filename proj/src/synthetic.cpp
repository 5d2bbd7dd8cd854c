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

#include "templner/synthetic.hpp"

#include <numeric>
#include <random>

#include "templner/error.hpp"

namespace templner {
namespace {

// Raw-engine draws keep the generated corpora identical across standard
// library implementations.
std::size_t draw(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

// Index drawn with probability proportional to its weight.
std::size_t weighted(std::mt19937_64& rng, const std::vector<std::size_t>& weights) {
  std::size_t roll = draw(rng, std::accumulate(weights.begin(), weights.end(), std::size_t{0}));
  std::size_t i = 0;
  while (roll >= weights[i]) roll -= weights[i++];
  return i;
}

std::vector<std::string> syllable_words(const std::string& consonants, const std::string& vowels, std::size_t count,
                                        std::size_t offset, bool capitalize) {
  std::vector<std::string> words;
  const std::size_t c = consonants.size(), v = vowels.size();
  for (std::size_t i = offset; words.size() < count; ++i) {
    std::string w;
    std::size_t k = i;
    for (int syllable = 0; syllable < 2; ++syllable) {
      w.push_back(consonants[k % c]);
      k /= c;
      w.push_back(vowels[k % v]);
      k /= v;
    }
    if (capitalize) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    words.push_back(std::move(w));
  }
  return words;
}

}  // namespace

LabelWordMap SyntheticLanguage::label_words() const {
  std::map<std::string, std::string> entries;
  for (const auto& t : types) entries[t.label] = t.word;
  return LabelWordMap(std::move(entries));
}

std::vector<std::string> SyntheticLanguage::all_tokens() const {
  std::vector<std::string> out = fillers;
  for (const auto& t : types) {
    out.insert(out.end(), t.markers.begin(), t.markers.end());
    for (const auto& part : t.name_parts) out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

SyntheticLanguage default_synthetic_language() {
  SyntheticLanguage lang;
  // Lowercase fillers and capitalized names come from disjoint index ranges,
  // so no filler collides with a name even ignoring case.
  const std::string consonants = "bdfgklmnprstvz", vowels = "aeiou";
  lang.fillers = syllable_words(consonants, vowels, 120, 0, false);
  const auto names = syllable_words(consonants, vowels, 70, 1000, true);
  const auto part = [&](std::size_t from, std::size_t count) {
    return std::vector<std::string>(names.begin() + static_cast<std::ptrdiff_t>(from),
                                    names.begin() + static_cast<std::ptrdiff_t>(from + count));
  };
  lang.types = {
      {"LOC", "location", {"at", "near"}, {part(0, 30)}},
      {"PER", "person", {"mr", "dr"}, {part(30, 20), part(50, 20)}},
  };
  return lang;
}

SyntheticLanguage relabel(const SyntheticLanguage& language,
                          const std::map<std::string, std::pair<std::string, std::string>>& renames) {
  SyntheticLanguage out = language;
  for (auto& t : out.types) {
    auto it = renames.find(t.label);
    if (it == renames.end()) continue;
    t.label = it->second.first;
    t.word = it->second.second;
  }
  return out;
}

Corpus generate_synthetic_corpus(const SyntheticLanguage& language, std::size_t sentences, std::uint64_t seed) {
  if (language.fillers.empty() || language.types.empty())
    throw ValueError("synthetic language needs fillers and entity types");
  for (const auto& t : language.types) {
    bool ok = !t.markers.empty() && !t.name_parts.empty();
    for (const auto& part : t.name_parts) ok = ok && !part.empty();
    if (!ok) throw ValueError("entity type '" + t.label + "' needs markers and non-empty name parts");
  }
  if (language.min_fillers < 1 || language.max_fillers < language.min_fillers)
    throw ValueError("synthetic language has an invalid filler range");

  const auto& weights = language.entity_count_weights;
  if (std::accumulate(weights.begin(), weights.end(), std::size_t{0}) == 0)
    throw ValueError("synthetic language needs a positive entity count weight");
  if (weights.size() > language.min_fillers + 1)
    throw ValueError("synthetic language allows more entities than fillers");

  std::mt19937_64 rng(seed);
  std::vector<LabeledSentence> out;
  out.reserve(sentences);
  for (std::size_t s = 0; s < sentences; ++s) {
    const std::size_t fillers = language.min_fillers + draw(rng, language.max_fillers - language.min_fillers + 1);
    const std::size_t entities = weighted(rng, language.entity_count_weights);

    // Each entity is inserted after a distinct filler position so that a
    // filler always separates two entities.
    std::vector<bool> entity_after(fillers, false);
    for (std::size_t e = 0; e < entities; ++e) {
      std::size_t at = draw(rng, fillers);
      while (entity_after[at]) at = (at + 1) % fillers;
      entity_after[at] = true;
    }

    Tokens tokens;
    std::vector<EntitySpan> spans;
    for (std::size_t f = 0; f < fillers; ++f) {
      tokens.push_back(language.fillers[draw(rng, language.fillers.size())]);
      if (!entity_after[f]) continue;
      const auto& type = language.types[draw(rng, language.types.size())];
      tokens.push_back(type.markers[draw(rng, type.markers.size())]);
      EntitySpan span{tokens.size(), tokens.size() + type.name_parts.size(), type.label};
      for (const auto& part : type.name_parts) tokens.push_back(part[draw(rng, part.size())]);
      spans.push_back(span);
    }
    out.push_back(LabeledSentence::from_spans(std::move(tokens), spans));
  }

  std::vector<std::string> labels;
  for (const auto& t : language.types) labels.push_back(t.label);
  return Corpus(std::move(out), std::move(labels));
}

}  // namespace templner
