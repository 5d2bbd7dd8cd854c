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

#include "templner/templates.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "templner/error.hpp"

namespace templner {
namespace {

std::size_t count_token(std::span<const std::string> pattern, std::string_view token) {
  return static_cast<std::size_t>(std::count(pattern.begin(), pattern.end(), token));
}

std::string normalize_label(const std::string& label) {
  std::string out;
  for (char ch : label) {
    if (ch == '_' || ch == '-')
      out.push_back(' ');
    else
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return join_tokens(split_tokens(out));
}

bool starts_with(std::span<const std::string> seq, std::size_t at, std::span<const std::string> part) {
  if (at + part.size() > seq.size()) return false;
  return std::equal(part.begin(), part.end(), seq.begin() + static_cast<std::ptrdiff_t>(at));
}

}  // namespace

LabelWordMap::LabelWordMap(std::map<std::string, std::string> entries) : entries_(std::move(entries)) {
  std::map<std::string, std::string> seen;
  for (auto& [label, word] : entries_) {
    if (label.empty()) throw ValueError("empty label in label-word map");
    word = join_tokens(split_tokens(word));
    if (word.empty()) throw ValueError("label '" + label + "' maps to an empty word");
    auto [it, inserted] = seen.emplace(word, label);
    if (!inserted)
      throw ValueError("labels '" + it->second + "' and '" + label + "' both map to '" + word + "'");
  }
}

const std::string& LabelWordMap::word(const std::string& label) const {
  auto it = entries_.find(label);
  if (it == entries_.end()) throw ValueError("no label word for label '" + label + "'");
  return it->second;
}

Tokens LabelWordMap::word_tokens(const std::string& label) const { return split_tokens(word(label)); }

LabelWordMap LabelWordMap::with_overrides(const std::map<std::string, std::string>& overrides) const {
  auto merged = entries_;
  for (const auto& [label, word] : overrides) merged[label] = word;
  return LabelWordMap(std::move(merged));
}

LabelWordMap default_label_words(std::span<const std::string> label_set) {
  static const std::map<std::string, std::string> known = {
      {"LOC", "location"}, {"PER", "person"}, {"ORG", "organization"}, {"MISC", "miscellaneous"}};
  std::map<std::string, std::string> entries;
  for (const auto& label : label_set) {
    auto it = known.find(label);
    entries[label] = it != known.end() ? it->second : normalize_label(label);
  }
  return LabelWordMap(std::move(entries));
}

TemplateSpec TemplateSpec::parse(std::string name, const std::string& entity_pattern,
                                 const std::string& none_pattern, std::optional<double> reference_dev_f1) {
  TemplateSpec spec{std::move(name), split_tokens(entity_pattern), split_tokens(none_pattern),
                    reference_dev_f1};
  spec.validate();
  return spec;
}

void TemplateSpec::validate() const {
  if (count_token(entity_pattern, kSpanSlot) != 1 || count_token(entity_pattern, kTypeSlot) != 1)
    throw ValueError("template '" + name + "': entity pattern needs exactly one {span} and one {type}");
  if (count_token(none_pattern, kSpanSlot) != 1 || count_token(none_pattern, kTypeSlot) != 0)
    throw ValueError("template '" + name + "': none pattern needs exactly one {span} and no {type}");
}

std::vector<TemplateSpec> builtin_templates() {
  return {
      TemplateSpec::parse("is-a-entity", "{span} is a {type} entity", "{span} is not a named entity", 95.27),
      TemplateSpec::parse("entity-type-of", "The entity type of {span} is {type}",
                          "The entity type of {span} is none entity", 95.15),
      TemplateSpec::parse("belongs-to", "{span} belongs to {type} category", "{span} belongs to none category",
                          88.42),
      TemplateSpec::parse("tagged-as", "{span} should be tagged as {type}", "{span} should tagged as none entity",
                          76.80),
  };
}

const TemplateSpec& find_template(std::span<const TemplateSpec> templates, const std::string& name) {
  for (const auto& t : templates)
    if (t.name == name) return t;
  throw ValueError("unknown template '" + name + "'");
}

FilledTemplate fill(const TemplateSpec& spec, std::span<const std::string> span_text, const std::string& label,
                    const LabelWordMap& words) {
  const bool none = is_none(label);
  const Tokens type_words = none ? Tokens{} : words.word_tokens(label);
  const Tokens& pattern = none ? spec.none_pattern : spec.entity_pattern;

  FilledTemplate out{{}, Tokens(span_text.begin(), span_text.end()), label};
  for (const auto& tok : pattern) {
    if (tok == kSpanSlot)
      out.tokens.insert(out.tokens.end(), span_text.begin(), span_text.end());
    else if (tok == kTypeSlot)
      out.tokens.insert(out.tokens.end(), type_words.begin(), type_words.end());
    else
      out.tokens.push_back(tok);
  }
  return out;
}

std::optional<TemplateMatch> match_filled(const TemplateSpec& spec, std::span<const std::string> target,
                                          const LabelWordMap& words) {
  // Try the none pattern first, then each label; the span slot absorbs
  // whatever lies between the fixed prefix and suffix around it.
  auto try_pattern = [&](const Tokens& pattern, const Tokens& type_words) -> std::optional<Tokens> {
    Tokens prefix, suffix;
    bool after = false;
    for (const auto& tok : pattern) {
      Tokens& side = after ? suffix : prefix;
      if (tok == kSpanSlot)
        after = true;
      else if (tok == kTypeSlot)
        side.insert(side.end(), type_words.begin(), type_words.end());
      else
        side.push_back(tok);
    }
    if (target.size() <= prefix.size() + suffix.size()) return std::nullopt;
    if (!starts_with(target, 0, prefix) || !starts_with(target, target.size() - suffix.size(), suffix))
      return std::nullopt;
    return Tokens(target.begin() + static_cast<std::ptrdiff_t>(prefix.size()),
                  target.end() - static_cast<std::ptrdiff_t>(suffix.size()));
  };

  if (auto span = try_pattern(spec.none_pattern, {})) return TemplateMatch{*span, kNoneLabel};
  for (const auto& [label, word] : words.entries())
    if (auto span = try_pattern(spec.entity_pattern, split_tokens(word))) return TemplateMatch{*span, label};
  return std::nullopt;
}

TemplateConfig parse_template_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("template config: ") + e.what());
  }
  TemplateConfig config;
  try {
    for (const auto& entry : j.value("templates", nlohmann::json::array())) {
      std::optional<double> f1;
      if (entry.contains("reference_dev_f1")) f1 = entry.at("reference_dev_f1").get<double>();
      config.templates.push_back(TemplateSpec::parse(entry.at("name").get<std::string>(),
                                                     entry.at("entity_pattern").get<std::string>(),
                                                     entry.at("none_pattern").get<std::string>(), f1));
    }
    if (j.contains("label_words"))
      config.label_words = j.at("label_words").get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("template config: ") + e.what());
  }
  return config;
}

TemplateConfig load_template_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_template_config(text.str());
}

}  // namespace templner
