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

// templner command-line driver.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "templner/corpus.hpp"
#include "templner/decoder.hpp"
#include "templner/error.hpp"
#include "templner/eval.hpp"
#include "templner/external_scorer.hpp"
#include "templner/manifest.hpp"
#include "templner/pairs.hpp"
#include "templner/seq2seq.hpp"
#include "templner/synthetic.hpp"
#include "templner/templates.hpp"
#include "templner/trainer.hpp"

using namespace templner;

namespace {

constexpr const char* kEndpointEnv = "TEMPLNER_SCORER_ENDPOINT";
constexpr std::uint64_t kDefaultSeed = 13;

// ---------------------------------------------------------------------------
// Config file: one "key = value" per line, '#' starts a comment. Keys are
// long option names without the leading dashes.

std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "config: expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "config: empty key");
    entries.emplace_back(std::move(key), std::move(value));
  }
  return entries;
}

// Rewrites argv so that precedence is flags > environment > config file >
// defaults: config entries and the endpoint variable become leading options
// and every option keeps its last value.
std::vector<std::string> expand_arguments(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.empty() || args[0].starts_with("-")) return args;

  std::optional<std::string> config;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].starts_with("--config=")) config = args[i].substr(9);
  }
  std::vector<std::string> injected;
  if (config)
    for (const auto& [key, value] : read_flat_config(*config)) injected.push_back("--" + key + "=" + value);
  if (const char* endpoint = std::getenv(kEndpointEnv); endpoint && *endpoint &&
      (args[0] == "decode"))
    injected.push_back(std::string("--scorer-endpoint=") + endpoint);
  args.insert(args.begin() + 1, injected.begin(), injected.end());
  return args;
}

// ---------------------------------------------------------------------------
// Shared helpers

std::map<std::string, std::string> parse_assignments(const std::vector<std::string>& items, const std::string& what) {
  std::map<std::string, std::string> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ValueError(what + " '" + item + "' is not KEY=VALUE");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

// Effective option values of a subcommand, for the manifest.
std::map<std::string, std::string> effective_config(const CLI::App& sub) {
  std::map<std::string, std::string> out;
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name.empty()) continue;
    std::string value;
    if (opt->count() > 0 && opt->get_multi_option_policy() == CLI::MultiOptionPolicy::TakeAll) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else if (opt->count() > 0) {
      value = opt->results().back();
    } else {
      value = opt->get_default_str();
    }
    out[name] = value;
  }
  return out;
}

struct TemplateOptions {
  std::string name = "is-a-entity";
  std::string config_path;
  std::vector<std::string> label_words;

  void add_to(CLI::App* sub) {
    sub->add_option("--template", name, "template name")->capture_default_str();
    sub->add_option("--templates-config", config_path, "JSON file with extra templates and label words");
    sub->add_option("--label-word", label_words, "LABEL=WORD override (repeatable)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  }

  TemplateSpec spec(std::map<std::string, std::string>* config_words) const {
    std::vector<TemplateSpec> all = builtin_templates();
    if (!config_path.empty()) {
      auto cfg = load_template_config(config_path);
      all.insert(all.end(), cfg.templates.begin(), cfg.templates.end());
      if (config_words) *config_words = cfg.label_words;
    }
    return find_template(all, name);
  }

  LabelWordMap words(const std::vector<std::string>& labels) const {
    std::map<std::string, std::string> overrides;
    spec(&overrides);
    for (const auto& [k, v] : parse_assignments(label_words, "label word")) overrides[k] = v;
    std::vector<std::string> all = labels;
    for (const auto& [k, v] : overrides) all.push_back(k);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return default_label_words(all).with_overrides(overrides);
  }
};

struct TrainOptions {
  TrainConfig config;
  std::string preset = "desk";
  std::string normalization = "token-mean";

  void add_to(CLI::App* sub) {
    sub->add_option("--preset", preset, "desk | bart | bert starting values")
        ->check(CLI::IsMember({"desk", "bart", "bert"}))
        ->capture_default_str();
    sub->add_option("--lr", config.learning_rate, "learning rate")->capture_default_str();
    sub->add_option("--batch-size", config.batch_size, "pairs per step")->capture_default_str();
    sub->add_option("--warmup", config.warmup_steps, "linear warmup steps")->capture_default_str();
    sub->add_option("--epochs", config.epochs, "passes over the pairs")->capture_default_str();
    sub->add_option("--clip-norm", config.clip_norm, "global gradient-norm clip (0 = off)")->capture_default_str();
    sub->add_option("--normalization", normalization, "token-mean | sum")
        ->check(CLI::IsMember({"token-mean", "sum"}))
        ->capture_default_str();
  }

  TrainConfig resolve(const CLI::App& sub, std::uint64_t seed) const {
    TrainConfig base = preset == "bart" ? TrainConfig::bart_reference()
                       : preset == "bert" ? TrainConfig::bert_reference()
                                          : TrainConfig{};
    auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
    TrainConfig out = base;
    if (given("--lr")) out.learning_rate = config.learning_rate;
    if (given("--batch-size")) out.batch_size = config.batch_size;
    if (given("--warmup")) out.warmup_steps = config.warmup_steps;
    if (given("--epochs")) out.epochs = config.epochs;
    if (given("--clip-norm")) out.clip_norm = config.clip_norm;
    out.normalization = normalization == "sum" ? LossNormalization::kSum : LossNormalization::kTokenMean;
    out.seed = seed;
    return out;
  }
};

void report_training(const TrainStats& stats) {
  for (std::size_t e = 0; e < stats.epoch_loss.size(); ++e)
    std::cerr << "epoch " << (e + 1) << " loss " << stats.epoch_loss[e] << '\n';
  std::cerr << "steps " << stats.steps << ", " << stats.wall_seconds << " s\n";
}

std::vector<Tokens> sentence_tokens(const Corpus& corpus) {
  std::vector<Tokens> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus.sentences()) out.push_back(s.tokens());
  return out;
}

Corpus with_predictions(const Corpus& input, const std::vector<std::vector<EntitySpan>>& predicted,
                        const std::vector<std::string>& labels) {
  std::vector<LabeledSentence> out;
  out.reserve(input.size());
  for (std::size_t i = 0; i < input.size(); ++i)
    out.push_back(LabeledSentence::from_spans(input.sentences()[i].tokens(), predicted[i]));
  std::vector<std::string> label_set = labels;
  for (const auto& l : input.label_set()) label_set.push_back(l);
  std::sort(label_set.begin(), label_set.end());
  label_set.erase(std::unique(label_set.begin(), label_set.end()), label_set.end());
  return Corpus(std::move(out), std::move(label_set));
}

// One JSON object per kept entity.
std::string candidate_report(const std::vector<SentenceDecode>& decoded) {
  std::ostringstream out;
  for (std::size_t i = 0; i < decoded.size(); ++i)
    for (const auto& c : decoded[i].kept) {
      nlohmann::ordered_json j;
      j["sentence"] = i;
      j["start"] = c.span.start;
      j["end"] = c.span.end;
      j["label"] = c.span.label;
      j["score"] = c.score;
      out << j.dump() << '\n';
    }
  return out.str();
}

std::vector<std::vector<ScoredEntity>> read_candidate_report(const std::string& path, std::size_t sentences) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::vector<ScoredEntity>> out(sentences);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      const auto i = j.at("sentence").get<std::size_t>();
      if (i >= sentences) throw ParseError(line_no, path + ": sentence index " + std::to_string(i) + " out of range");
      out[i].push_back({{j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>(),
                         j.at("label").get<std::string>()},
                        j.at("score").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, path + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"templner: template-based named entity recognition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::string config_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value file; flags override it");
  };
  std::uint64_t seed = kDefaultSeed;

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "corpus statistics");
  std::vector<std::string> stats_inputs;
  bool stats_json = false;
  std::string stats_out;
  stats_cmd->add_option("--input", stats_inputs, "CoNLL file(s)")->required()->check(CLI::ExistingFile)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  stats_cmd->add_flag("--json", stats_json, "machine-readable output");
  stats_cmd->add_option("--out", stats_out, "write the report here instead of stdout");
  add_config(stats_cmd);

  // sample
  auto* sample_cmd = app.add_subcommand("sample", "few-shot or quota-based sub-corpus");
  std::string sample_input, sample_out, sample_quotas;
  std::size_t sample_k = 0;
  bool keep_entity_free = false;
  sample_cmd->add_option("--input", sample_input, "CoNLL file")->required()->check(CLI::ExistingFile);
  sample_cmd->add_option("--out", sample_out, "output CoNLL file")->required();
  auto* k_opt = sample_cmd->add_option("--k", sample_k, "mentions per entity type");
  auto* quota_opt = sample_cmd->add_option("--quotas", sample_quotas, "LABEL=N,... per-label mention quotas");
  k_opt->excludes(quota_opt);
  sample_cmd->add_flag("--keep-entity-free", keep_entity_free, "with --quotas, keep sentences without entities");
  sample_cmd->add_option("--seed", seed, "shuffle seed")->capture_default_str();
  add_config(sample_cmd);

  // pairs
  auto* pairs_cmd = app.add_subcommand("pairs", "build (sentence, template) training pairs");
  std::string pairs_input, pairs_out;
  PairOptions pair_options;
  TemplateOptions pairs_templ;
  pairs_cmd->add_option("--input", pairs_input, "CoNLL file")->required()->check(CLI::ExistingFile);
  pairs_cmd->add_option("--out", pairs_out, "pairs file")->required();
  pairs_cmd->add_option("--neg-ratio", pair_options.neg_ratio, "negatives per positive")->capture_default_str();
  pairs_cmd->add_option("--max-span-len", pair_options.max_span_len, "longest negative span")->capture_default_str();
  pairs_cmd->add_option("--seed", seed, "sampling seed")->capture_default_str();
  pairs_templ.add_to(pairs_cmd);
  add_config(pairs_cmd);

  // train
  auto* train_cmd = app.add_subcommand("train", "train the built-in scorer from scratch");
  std::string train_pairs, train_out, reserve_words, vocab_corpus;
  ModelConfig model_config;
  bool no_eos = false;
  TrainOptions train_opts;
  train_cmd->add_option("--pairs", train_pairs, "pairs file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_out, "checkpoint")->required();
  train_cmd->add_option("--embed-dim", model_config.embed_dim, "embedding width")->capture_default_str();
  train_cmd->add_option("--hidden-dim", model_config.hidden_dim, "decoder width (even)")->capture_default_str();
  train_cmd->add_flag("--no-eos", no_eos, "do not score an end-of-sequence token");
  train_cmd->add_option("--reserve-words", reserve_words, "comma-separated extra vocabulary");
  train_cmd->add_option("--vocab-corpus", vocab_corpus, "CoNLL file whose tokens join the vocabulary")
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", seed, "initialization and shuffle seed")->capture_default_str();
  train_opts.add_to(train_cmd);
  add_config(train_cmd);

  // finetune
  auto* ft_cmd = app.add_subcommand("finetune", "continue training a checkpoint on new pairs");
  std::string ft_init, ft_pairs, ft_out;
  TrainOptions ft_opts;
  ft_cmd->add_option("--init", ft_init, "starting checkpoint")->required()->check(CLI::ExistingFile);
  ft_cmd->add_option("--pairs", ft_pairs, "pairs file")->required()->check(CLI::ExistingFile);
  ft_cmd->add_option("--out", ft_out, "checkpoint")->required();
  ft_cmd->add_option("--seed", seed, "shuffle seed")->capture_default_str();
  ft_opts.add_to(ft_cmd);
  add_config(ft_cmd);

  // decode
  auto* decode_cmd = app.add_subcommand("decode", "label sentences by ranking filled templates");
  std::string decode_input, decode_out, decode_report, decode_model, decode_endpoint, decode_labels;
  DecodeConfig decode_config;
  TemplateOptions decode_templ;
  int timeout_ms = 60000;
  decode_cmd->add_option("--input", decode_input, "CoNLL file (tags are ignored)")->required()
      ->check(CLI::ExistingFile);
  decode_cmd->add_option("--out", decode_out, "predicted CoNLL file")->required();
  decode_cmd->add_option("--report", decode_report, "JSONL record per kept entity");
  auto* model_opt = decode_cmd->add_option("--model", decode_model, "built-in scorer checkpoint")
                        ->check(CLI::ExistingFile);
  auto* endpoint_opt = decode_cmd->add_option("--scorer-endpoint", decode_endpoint,
                                              std::string("exec:<cmd> or tcp://host:port (env ") + kEndpointEnv +
                                                  ")");
  decode_cmd->add_option("--labels", decode_labels, "comma-separated labels to try (default: input label set)");
  decode_cmd->add_option("--max-span-len", decode_config.max_span_len, "longest span")->capture_default_str();
  decode_cmd->add_flag("--length-normalize", decode_config.length_normalize, "divide scores by template length");
  decode_cmd->add_option("--workers", decode_config.workers, "scoring threads")->capture_default_str();
  decode_cmd->add_option("--timeout-ms", timeout_ms, "external scorer timeout")->capture_default_str();
  decode_templ.add_to(decode_cmd);
  add_config(decode_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "entity-level precision / recall / F1");
  std::string eval_gold, eval_pred, eval_out, buckets_train, bucket_mode = "types";
  bool eval_json = false;
  eval_cmd->add_option("--gold", eval_gold, "gold CoNLL file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--pred", eval_pred, "predicted CoNLL file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--buckets-train", buckets_train, "training corpus for frequency buckets")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--bucket-mode", bucket_mode, "types | mass")
      ->check(CLI::IsMember({"types", "mass"}))
      ->capture_default_str();
  eval_cmd->add_flag("--json", eval_json, "machine-readable output");
  eval_cmd->add_option("--out", eval_out, "write the report here instead of stdout");
  add_config(eval_cmd);

  // ensemble
  auto* ens_cmd = app.add_subcommand("ensemble", "entity-level majority vote over decode reports");
  std::vector<std::string> ens_reports;
  std::string ens_input, ens_out;
  ens_cmd->add_option("--reports", ens_reports, "decode --report files")->required()->check(CLI::ExistingFile)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  ens_cmd->add_option("--input", ens_input, "the CoNLL file the reports were decoded from")->required()
      ->check(CLI::ExistingFile);
  ens_cmd->add_option("--out", ens_out, "predicted CoNLL file")->required();
  add_config(ens_cmd);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic corpus");
  std::string synth_out, synth_domain = "a";
  std::size_t synth_sentences = 500;
  synth_cmd->add_option("--out", synth_out, "CoNLL file")->required();
  synth_cmd->add_option("--sentences", synth_sentences, "sentence count")->capture_default_str();
  synth_cmd->add_option("--domain", synth_domain, "a (PER/LOC) | b (CHARACTER/CITY)")
      ->check(CLI::IsMember({"a", "b"}))
      ->capture_default_str();
  synth_cmd->add_option("--seed", seed, "generator seed")->capture_default_str();
  add_config(synth_cmd);

  const auto args = expand_arguments(argc, argv);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[usage]: " << e.what() << '\n';
    return 2;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunManifest manifest;
  manifest.command = sub->get_name();
  manifest.config = effective_config(*sub);
  if (!config_path.empty()) manifest.add_input("config", config_path);

  if (sub == stats_cmd) {
    std::vector<Corpus> corpora;
    std::string text;
    for (const auto& path : stats_inputs) {
      manifest.add_input("corpus", path);
      auto s = corpus_stats(read_conll_file(path));
      text += stats_json ? stats_to_json(s) + "\n" : path + "\n" + format_stats_table(s);
    }
    if (stats_out.empty()) {
      std::cout << text;
    } else {
      write_text(stats_out, text);
      manifest.write_beside(stats_out);
    }
    return 0;
  }

  if (sub == sample_cmd) {
    if (quota_opt->count() == 0 && k_opt->count() == 0) throw ValueError("sample needs --k or --quotas");
    manifest.add_input("corpus", sample_input);
    manifest.seeds["sample"] = seed;
    Corpus corpus = read_conll_file(sample_input);
    Corpus out;
    if (quota_opt->count() > 0) {
      std::map<std::string, std::size_t> quotas;
      for (const auto& [label, n] : parse_assignments(split_list(sample_quotas), "quota")) {
        try {
          quotas[label] = static_cast<std::size_t>(std::stoull(n));
        } catch (const std::exception&) {
          throw ValueError("quota for '" + label + "' is not a count: '" + n + "'");
        }
      }
      auto r = downsample_in_domain(corpus, quotas, seed, {.keep_entity_free = keep_entity_free});
      for (const auto& [label, n] : r.achieved)
        std::cerr << label << " achieved " << n << " of " << quotas.at(label) << '\n';
      for (const auto& [label, n] : r.overshoot) std::cerr << label << " overshoot " << n << '\n';
      out = std::move(r.corpus);
    } else {
      out = sample_few_shot(corpus, sample_k, seed);
    }
    write_conll_file(sample_out, out);
    manifest.write_beside(sample_out);
    return 0;
  }

  if (sub == pairs_cmd) {
    manifest.add_input("corpus", pairs_input);
    if (!pairs_templ.config_path.empty()) manifest.add_input("templates", pairs_templ.config_path);
    manifest.seeds["pairs"] = seed;
    Corpus corpus = read_conll_file(pairs_input);
    pair_options.seed = seed;
    auto r = build_training_pairs(corpus, pairs_templ.spec(nullptr), pairs_templ.words(corpus.label_set()),
                                  pair_options);
    if (!r.warning.empty()) std::cerr << "warning: " << r.warning << '\n';
    if (r.shortfall > 0) std::cerr << "warning: negative pool exhausted, " << r.shortfall << " short\n";
    std::cerr << r.positives << " positive, " << r.negatives << " negative pairs\n";
    write_pairs_file(pairs_out, r.pairs);
    manifest.write_beside(pairs_out);
    return 0;
  }

  if (sub == train_cmd) {
    manifest.add_input("pairs", train_pairs);
    manifest.seeds["init"] = seed;
    manifest.seeds["shuffle"] = seed;
    const auto pairs = read_pairs_file(train_pairs);
    std::vector<std::string> extra = split_list(reserve_words);
    if (!vocab_corpus.empty()) {
      manifest.add_input("vocab", vocab_corpus);
      for (const auto& s : read_conll_file(vocab_corpus).sentences())
        extra.insert(extra.end(), s.tokens().begin(), s.tokens().end());
    }
    for (const auto& w : std::vector<std::string>(extra)) {
      auto parts = split_tokens(w);
      extra.insert(extra.end(), parts.begin(), parts.end());
    }
    model_config.append_eos = !no_eos;
    model_config.seed = seed;
    TinySeq2Seq model(Vocab::from_pairs(pairs, extra), model_config);
    report_training(fit(model, pairs, train_opts.resolve(*train_cmd, seed)));
    model.save_file(train_out);
    manifest.write_beside(train_out);
    return 0;
  }

  if (sub == ft_cmd) {
    manifest.add_input("init", ft_init);
    manifest.add_input("pairs", ft_pairs);
    manifest.seeds["shuffle"] = seed;
    auto model = TinySeq2Seq::load_file(ft_init);
    const auto pairs = read_pairs_file(ft_pairs);
    std::size_t unknown = 0;
    for (const auto& p : pairs)
      for (const auto& t : p.target)
        if (!model.vocab().contains(t)) ++unknown;
    if (unknown > 0)
      std::cerr << "warning: " << unknown << " target tokens are outside the checkpoint vocabulary\n";
    report_training(fine_tune(model, pairs, ft_opts.resolve(*ft_cmd, seed)));
    model.save_file(ft_out);
    manifest.write_beside(ft_out);
    return 0;
  }

  if (sub == decode_cmd) {
    if ((model_opt->count() > 0) == (endpoint_opt->count() > 0))
      throw ValueError("decode needs exactly one of --model or --scorer-endpoint");
    manifest.add_input("corpus", decode_input);
    if (!decode_templ.config_path.empty()) manifest.add_input("templates", decode_templ.config_path);
    Corpus corpus = read_conll_file(decode_input);

    std::unique_ptr<GenerativeScorer> scorer;
    if (!decode_model.empty()) {
      manifest.add_input("model", decode_model);
      scorer = std::make_unique<TinySeq2Seq>(TinySeq2Seq::load_file(decode_model));
    } else {
      scorer = ExternalScorer::connect(decode_endpoint, std::chrono::milliseconds(timeout_ms));
    }

    std::vector<std::string> labels = decode_labels.empty() ? corpus.label_set() : split_list(decode_labels);
    if (labels.empty()) throw ValueError("no labels to decode: pass --labels or a tagged input");
    decode_config.templ = decode_templ.spec(nullptr);
    decode_config.words = decode_templ.words(labels);
    decode_config.labels = labels;

    const auto decoded = decode_corpus(*scorer, sentence_tokens(corpus), decode_config);
    std::vector<std::vector<EntitySpan>> predicted;
    for (const auto& d : decoded) {
      predicted.emplace_back();
      for (const auto& c : d.kept) predicted.back().push_back(c.span);
    }
    write_conll_file(decode_out, with_predictions(corpus, predicted, labels));
    manifest.write_beside(decode_out);
    if (!decode_report.empty()) {
      write_text(decode_report, candidate_report(decoded));
      manifest.write_beside(decode_report);
    }
    return 0;
  }

  if (sub == eval_cmd) {
    manifest.add_input("gold", eval_gold);
    manifest.add_input("pred", eval_pred);
    Corpus gold = read_conll_file(eval_gold);
    Corpus pred = read_conll_file(eval_pred);
    if (gold.size() != pred.size())
      throw ValueError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                       std::to_string(pred.size()));
    for (std::size_t i = 0; i < gold.size(); ++i)
      if (gold.sentences()[i].tokens() != pred.sentences()[i].tokens())
        throw ValueError("sentence " + std::to_string(i) + " differs between gold and prediction");
    EvalReport report;
    if (!buckets_train.empty()) {
      manifest.add_input("buckets_train", buckets_train);
      auto buckets = frequency_buckets(read_conll_file(buckets_train), gold,
                                       bucket_mode == "mass" ? BucketMode::kMentionMass : BucketMode::kTypeCount);
      report = evaluate_with_buckets(gold_spans(pred), gold_spans(gold), buckets);
    } else {
      report = evaluate(gold_spans(pred), gold_spans(gold));
    }
    const std::string text = eval_json ? report_to_json(report) + "\n" : format_report(report);
    if (eval_out.empty()) {
      std::cout << text;
    } else {
      write_text(eval_out, text);
      manifest.write_beside(eval_out);
    }
    return 0;
  }

  if (sub == ens_cmd) {
    manifest.add_input("corpus", ens_input);
    Corpus corpus = read_conll_file(ens_input);
    std::vector<std::vector<std::vector<ScoredEntity>>> per_model;
    for (const auto& path : ens_reports) {
      manifest.add_input("report", path);
      per_model.push_back(read_candidate_report(path, corpus.size()));
    }
    std::vector<std::vector<EntitySpan>> predicted;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      std::vector<std::vector<ScoredEntity>> votes;
      for (const auto& m : per_model) votes.push_back(m[i]);
      predicted.push_back(ensemble_decode(votes));
      for (const auto& e : predicted.back()) labels.push_back(e.label);
    }
    write_conll_file(ens_out, with_predictions(corpus, predicted, labels));
    manifest.write_beside(ens_out);
    return 0;
  }

  if (sub == synth_cmd) {
    manifest.seeds["synth"] = seed;
    auto lang = default_synthetic_language();
    if (synth_domain == "b") lang = relabel(lang, {{"PER", {"CHARACTER", "character"}}, {"LOC", {"CITY", "city"}}});
    write_conll_file(synth_out, generate_synthetic_corpus(lang, synth_sentences, seed));
    manifest.write_beside(synth_out);
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error[" << e.kind() << "]: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << '\n';
  }
  return 1;
}
