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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "templner/corpus.hpp"

namespace templner {

/// Reserved label for the non-entity template. Corpus labels never take this
/// value because BIO labels cannot be empty.
inline const std::string kNoneLabel = "";

inline bool is_none(const std::string& label) { return label.empty(); }

inline constexpr std::string_view kSpanSlot = "{span}";
inline constexpr std::string_view kTypeSlot = "{type}";

/// One-to-one map from corpus labels to natural-language label words. Label
/// words may span several tokens ("named place").
class LabelWordMap {
 public:
  LabelWordMap() = default;
  // Throws ValueError when two labels map to the same word.
  explicit LabelWordMap(std::map<std::string, std::string> entries);

  const std::map<std::string, std::string>& entries() const { return entries_; }
  bool contains(const std::string& label) const { return entries_.count(label) > 0; }
  // Throws ValueError for an unmapped label.
  const std::string& word(const std::string& label) const;
  Tokens word_tokens(const std::string& label) const;

  // Returns a copy with `overrides` applied on top; re-checks injectivity.
  LabelWordMap with_overrides(const std::map<std::string, std::string>& overrides) const;

 private:
  std::map<std::string, std::string> entries_;
};

/// LOC/PER/ORG/MISC get their conventional words; any other label is
/// lowercased with '_' and '-' turned into spaces.
LabelWordMap default_label_words(std::span<const std::string> label_set);

struct TemplateSpec {
  std::string name;
  Tokens entity_pattern;  // exactly one {span} and one {type}
  Tokens none_pattern;    // exactly one {span}, no {type}
  std::optional<double> reference_dev_f1;

  // Builds a spec from "{span} is a {type} entity" style strings and
  // validates the slot counts.
  static TemplateSpec parse(std::string name, const std::string& entity_pattern,
                            const std::string& none_pattern,
                            std::optional<double> reference_dev_f1 = std::nullopt);
  void validate() const;
};

/// The four statement templates in reference ranking order, each carrying
/// its reference CoNLL03 development F1.
std::vector<TemplateSpec> builtin_templates();

/// Looks a template up by name among `templates`; ValueError when absent.
const TemplateSpec& find_template(std::span<const TemplateSpec> templates, const std::string& name);

struct FilledTemplate {
  Tokens tokens;
  Tokens span_text;
  std::string label;  // kNoneLabel for the non-entity template
};

/// Splices `span_text` (and the label word, unless `label` is NONE) into the
/// template verbatim.
FilledTemplate fill(const TemplateSpec& spec, std::span<const std::string> span_text,
                    const std::string& label, const LabelWordMap& words);

struct TemplateMatch {
  Tokens span_text;
  std::string label;
};

/// Recovers (span, label) from a filled target by pattern matching, or
/// nullopt when the tokens do not realize the template.
std::optional<TemplateMatch> match_filled(const TemplateSpec& spec, std::span<const std::string> target,
                                          const LabelWordMap& words);

struct TemplateConfig {
  std::vector<TemplateSpec> templates;
  std::map<std::string, std::string> label_words;
};

/// Reads a JSON template config:
///   {"templates": [{"name": ..., "entity_pattern": ..., "none_pattern": ...}],
///    "label_words": {"LOC": "location"}}
TemplateConfig load_template_config(const std::string& path);
TemplateConfig parse_template_config(const std::string& json_text);

}  // namespace templner
