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

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "templner/corpus.hpp"
#include "templner/decoder.hpp"
#include "templner/eval.hpp"
#include "templner/seq2seq.hpp"
#include "templner/synthetic.hpp"

using namespace templner;
namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string output;
};

Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + TEMPLNER_CLI_PATH + " " + args + " 2>&1";
  Result r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof(buf), pipe)) > 0;) r.output.append(buf, n);
  const int raw = ::pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Workdir {
 public:
  Workdir() : dir_(fs::temp_directory_path() / ("templner_cli_" + std::to_string(::getpid()))) {
    fs::create_directories(dir_);
  }
  ~Workdir() { fs::remove_all(dir_); }
  std::string operator/(const std::string& name) const { return (dir_ / name).string(); }

 private:
  fs::path dir_;
};

const std::string kTrainFlags = " --embed-dim 8 --hidden-dim 8 --epochs 2 --batch-size 8 --warmup 4 --lr 0.01";

}  // namespace

TEST_CASE("cli pipeline") {
  Workdir w;
  REQUIRE(run("synth --sentences 60 --seed 3 --out " + (w / "train.conll")).status == 0);
  REQUIRE(run("synth --sentences 10 --seed 4 --out " + (w / "test.conll")).status == 0);
  CHECK(fs::exists(w / "train.conll.manifest.json"));
  REQUIRE(run("pairs --input " + (w / "train.conll") + " --seed 1 --out " + (w / "train.pairs")).status == 0);

  SUBCASE("training twice gives identical checkpoints") {
    REQUIRE(run("train --pairs " + (w / "train.pairs") + kTrainFlags + " --out " + (w / "a.ckpt")).status == 0);
    REQUIRE(run("train --pairs " + (w / "train.pairs") + kTrainFlags + " --out " + (w / "b.ckpt")).status == 0);
    CHECK(slurp(w / "a.ckpt") == slurp(w / "b.ckpt"));
    const auto ma = nlohmann::json::parse(slurp(w / "a.ckpt.manifest.json"));
    const auto mb = nlohmann::json::parse(slurp(w / "b.ckpt.manifest.json"));
    CHECK(ma.at("command") == "train");
    CHECK(ma.at("inputs") == mb.at("inputs"));
    CHECK(ma.at("seeds") == mb.at("seeds"));
    CHECK(ma.at("config").at("epochs") == "2");
  }

  SUBCASE("decode then eval matches in-process evaluation") {
    REQUIRE(run("train --pairs " + (w / "train.pairs") + kTrainFlags + " --out " + (w / "m.ckpt")).status == 0);
    auto decoded = run("decode --model " + (w / "m.ckpt") + " --input " + (w / "test.conll") + " --max-span-len 4" +
                       " --out " + (w / "pred.conll") + " --report " + (w / "pred.jsonl"));
    REQUIRE_MESSAGE(decoded.status == 0, decoded.output);
    CHECK(fs::exists(w / "pred.conll.manifest.json"));
    CHECK(fs::exists(w / "pred.jsonl.manifest.json"));
    auto evaluated = run("eval --json --gold " + (w / "test.conll") + " --pred " + (w / "pred.conll"));
    REQUIRE(evaluated.status == 0);
    const auto cli = nlohmann::json::parse(evaluated.output);

    const auto model = TinySeq2Seq::load_file(w / "m.ckpt");
    const auto gold = read_conll_file(w / "test.conll");
    std::vector<Tokens> sentences;
    for (const auto& s : gold.sentences()) sentences.push_back(s.tokens());
    DecodeConfig config;
    config.templ = builtin_templates()[0];
    config.words = default_label_words(gold.label_set());
    config.labels = gold.label_set();
    config.max_span_len = 4;
    std::vector<SentenceSpans> pred;
    for (const auto& d : decode_corpus(model, sentences, config)) {
      pred.emplace_back();
      for (const auto& c : d.kept) pred.back().push_back(c.span);
    }
    const auto in_process = evaluate(pred, gold_spans(gold));
    CHECK(cli.at("f1").get<double>() == in_process.f1);
    CHECK(cli.at("precision").get<double>() == in_process.precision);
    CHECK(cli.at("recall").get<double>() == in_process.recall);

    auto voted = run("ensemble --input " + (w / "test.conll") + " --out " + (w / "ens.conll") + " --reports " +
                     (w / "pred.jsonl"));
    REQUIRE(voted.status == 0);
    CHECK(slurp(w / "ens.conll") == slurp(w / "pred.conll"));
  }

  SUBCASE("config file, environment and flags") {
    {
      std::ofstream cfg(w / "run.cfg");
      cfg << "# tiny run\nepochs = 1\nembed-dim = 8\nhidden-dim = 8\n";
    }
    REQUIRE(run("train --config " + (w / "run.cfg") + " --pairs " + (w / "train.pairs") + " --out " +
                (w / "c.ckpt"))
                .status == 0);
    auto m = nlohmann::json::parse(slurp(w / "c.ckpt.manifest.json"));
    CHECK(m.at("config").at("epochs") == "1");
    REQUIRE(run("train --config " + (w / "run.cfg") + " --epochs 3 --pairs " + (w / "train.pairs") + " --out " +
                (w / "d.ckpt"))
                .status == 0);
    m = nlohmann::json::parse(slurp(w / "d.ckpt.manifest.json"));
    CHECK(m.at("config").at("epochs") == "3");

    // The config names a missing scorer; the environment overrides it.
    std::ofstream dcfg(w / "decode.cfg");
    dcfg << "scorer-endpoint = exec:/nonexistent/scorer\n";
    dcfg.close();
    const std::string decode = "decode --config " + (w / "decode.cfg") + " --input " + (w / "test.conll") +
                               " --max-span-len 2 --out " + (w / "env.conll");
    auto failed = run(decode);
    CHECK(failed.status != 0);
    CHECK(failed.output.find("error[scorer]") != std::string::npos);
    auto ok = run(decode, std::string("TEMPLNER_SCORER_ENDPOINT='exec:") + TEMPLNER_LOOPBACK_PATH + "'");
    CHECK_MESSAGE(ok.status == 0, ok.output);
  }
}

TEST_CASE("cli errors") {
  Workdir w;
  {
    std::ofstream bad(w / "bad.conll");
    bad << "Bangkok B-LOC\nis\n";
  }
  auto r = run("stats --input " + (w / "bad.conll"));
  CHECK(r.status != 0);
  CHECK(r.output.find("error[parse]") != std::string::npos);
  CHECK(r.output.find("line 2") != std::string::npos);

  {
    std::ofstream ok(w / "ok.conll");
    ok << "Bangkok B-LOC\nis O\n";
  }
  r = run("pairs --template no-such-template --input " + (w / "ok.conll") + " --out " + (w / "p.txt"));
  CHECK(r.status != 0);
  CHECK(r.output.find("error[value]: unknown template 'no-such-template'") != std::string::npos);
  CHECK_FALSE(fs::exists(w / "p.txt.manifest.json"));

  r = run("decode --input " + (w / "ok.conll") + " --out " + (w / "x.conll"));
  CHECK(r.status != 0);
  CHECK(r.output.find("exactly one of --model or --scorer-endpoint") != std::string::npos);

  r = run("train --bogus");
  CHECK(r.status == 2);
  CHECK(r.output.find("error[usage]") != std::string::npos);

  r = run("stats --input " + (w / "ok.conll"));
  CHECK(r.status == 0);
  CHECK(r.output.find("LOC") != std::string::npos);
}
