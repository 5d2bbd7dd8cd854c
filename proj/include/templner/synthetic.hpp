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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "templner/corpus.hpp"
#include "templner/templates.hpp"

namespace templner {

/// A toy language with unambiguous entity structure: an entity is one of its
/// type's marker words followed by one token from each of the type's name
/// parts, in order. Markers and name tokens belong to a single type and never
/// occur anywhere else.
struct SyntheticLanguage {
  struct EntityType {
    std::string label;
    std::string word;  // label word used in templates
    std::vector<std::string> markers;
    std::vector<std::vector<std::string>> name_parts;
  };

  std::vector<std::string> fillers;
  std::vector<EntityType> types;
  std::size_t min_fillers = 4;
  std::size_t max_fillers = 9;
  // Relative weights of 0, 1, 2, ... entities per sentence.
  std::vector<std::size_t> entity_count_weights{3, 10, 7};

  LabelWordMap label_words() const;
  std::vector<std::string> all_tokens() const;
};

/// 120 filler words; PER ("person", markers mr/dr) is a given name and a
/// family name from 20 each; LOC ("location", markers at/near) is one of 30
/// place names.
SyntheticLanguage default_synthetic_language();

/// Same surface language with entity types renamed: old label -> (new label,
/// new label word).
SyntheticLanguage relabel(const SyntheticLanguage& language,
                          const std::map<std::string, std::pair<std::string, std::string>>& renames);

Corpus generate_synthetic_corpus(const SyntheticLanguage& language, std::size_t sentences, std::uint64_t seed);

}  // namespace templner
