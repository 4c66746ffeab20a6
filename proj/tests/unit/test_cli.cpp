// Copyright 2026 The dfaguide Authors.
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
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "dfaguide/constraints.hpp"
#include "dfaguide/hmm.hpp"
#include "dfaguide/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Scratch directory with a vocabulary, a corpus and a small trained model
// shared by every test case.
struct Workspace {
  fs::path dir;
  fs::path vocab, corpus, model;

  Workspace() {
    dir = fs::temp_directory_path() / ("dfaguide_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    vocab = dir / "vocab.txt";
    corpus = dir / "corpus.txt";
    model = dir / "model.bin";
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  Run run(const std::string& args) const {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string("'") + DFAGUIDE_CLI_PATH + "' " + args + " 2>'" + err.string() + "'";
    Run r;
    FILE* p = ::popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  std::string stories() const { return std::string(DFAGUIDE_DATA_DIR) + "/stories.txt"; }
};

Workspace& ws() {
  static Workspace w;
  static bool ready = false;
  if (!ready) {
    const Run tok = w.run("tokenize --text '" + w.stories() + "' --vocab-out '" + w.vocab.string() + "' --corpus-out '" +
                          w.corpus.string() + "' --length 16");
    REQUIRE_MESSAGE(tok.code == 0, tok.err);
    const Run tr = w.run("train --corpus '" + w.corpus.string() + "' --vocab '" + w.vocab.string() + "' --out '" +
                         w.model.string() + "' --hidden 12 --iters 15 --restarts 1 --seed 3 --threads 1");
    REQUIRE_MESSAGE(tr.code == 0, tr.err);
    ready = true;
  }
  return w;
}

std::string common(const Workspace& w) { return " --model '" + w.model.string() + "' --vocab '" + w.vocab.string() + "'"; }

fs::path constraints(const Workspace& w, const std::string& name, const std::string& body) {
  const fs::path p = w.dir / name;
  write(p, body);
  return p;
}

}  // namespace

TEST_CASE("tokenize") {
  Workspace& w = ws();
  const Run r = w.run("tokenize --text '" + w.stories() + "' --length 16");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j.at("length") == 16);
  CHECK(j.at("sequences").get<int>() > 100);
  std::ifstream in(w.corpus);
  std::string line;
  std::getline(in, line);
  CHECK(std::count(line.begin(), line.end(), ' ') == 15);
  CHECK(slurp(w.vocab).rfind("<eos>\n<pad>\n<unk>\n", 0) == 0);
}

TEST_CASE("training is reproducible") {
  Workspace& w = ws();
  const fs::path a = w.dir / "a.bin", b = w.dir / "b.bin", c = w.dir / "c.json", rep = w.dir / "report.json";
  const std::string base = "train --corpus '" + w.corpus.string() + "' --vocab '" + w.vocab.string() +
                           "' --hidden 6 --iters 5 --restarts 2 --seed 9";
  REQUIRE(w.run(base + " --threads 1 --out '" + a.string() + "' --report-out '" + rep.string() + "'").code == 0);
  REQUIRE(w.run(base + " --threads 3 --out '" + b.string() + "'").code == 0);
  CHECK(slurp(a) == slurp(b));
  REQUIRE(w.run(base + " --threads 1 --out '" + c.string() + "'").code == 0);
  CHECK(dfaguide::load_hmm(c.string()).fingerprint() == dfaguide::load_hmm(a.string()).fingerprint());
  const json report = json::parse(slurp(rep));
  CHECK(report.at("num_hidden") == 6);
  CHECK(report.at("restart_heldout").size() == 2);

  SUBCASE("from text") {
    const Run r = w.run("train --text '" + w.stories() + "' --vocab '" + w.vocab.string() +
                        "' --length 16 --hidden 4 --iters 3 --restarts 1 --out '" + (w.dir / "t.bin").string() + "'");
    CHECK_MESSAGE(r.code == 0, r.err);
  }
  SUBCASE("malformed corpus") {
    const fs::path bad = w.dir / "bad.txt";
    write(bad, "3 4 5\n3 x 5\n");
    const Run r = w.run("train --corpus '" + bad.string() + "' --vocab-size 10 --out '" + (w.dir / "x.bin").string() + "'");
    CHECK(r.code == 2);
    CHECK(r.err.find("corpus line 2") != std::string::npos);
  }
}

TEST_CASE("generation is deterministic and satisfies the constraints") {
  Workspace& w = ws();
  const fs::path spec = constraints(w, "snow.json", R"({"keyphrases": ["snow"], "word_length": {"min": 5, "max": 9}})");
  const fs::path data = w.dir / "dataset.json", report = w.dir / "gen_report.json";
  const std::string args = "generate" + common(w) + " --constraints '" + spec.string() +
                           "' --length 16 --samples 16 --seed 5 --runs 4";
  const Run a = w.run(args + " --dataset-out '" + data.string() + "' --report '" + report.string() + "'");
  REQUIRE_MESSAGE(a.code == 0, a.err);
  const Run b = w.run(args);
  REQUIRE(b.code == 0);
  CHECK(a.out == b.out);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 4);
  CHECK(a.out.find("snow") != std::string::npos);

  const json rep = json::parse(slurp(report));
  CHECK(rep.at("mode") == "probabilistic");
  CHECK(rep.at("satisfaction_rate") == 1.0);
  CHECK(rep.at("runs").size() == 4);
  CHECK(rep.at("runs")[1].at("seed") == 6);
  CHECK(rep.at("runs")[0].at("us_per_token").get<double>() > 0.0);

  // Recompute the eval metrics without the CLI.
  const json ds = json::parse(slurp(data));
  const auto cspec = dfaguide::spec_from_json(ds.at("constraints").dump());
  const auto hmm = dfaguide::load_hmm(w.model.string());
  double ll = 0.0;
  int ok = 0;
  for (const auto& item : ds.at("items")) {
    const auto toks = item.at("tokens").get<std::vector<std::int32_t>>();
    CHECK(toks.size() == 16);
    ok += dfaguide::oracle::naive_constraint_check(cspec, toks) ? 1 : 0;
    ll += dfaguide::sequence_loglik(hmm, toks);
  }
  CHECK(ok == 4);
  const Run ev = w.run("eval --dataset '" + data.string() + "'" + common(w));
  REQUIRE_MESSAGE(ev.code == 0, ev.err);
  const json m = json::parse(ev.out);
  CHECK(m.at("count") == 4);
  CHECK(m.at("satisfaction_rate") == 1.0);
  CHECK(m.at("dfa_acceptance_rate") == 1.0);
  CHECK(m.at("mean_loglik").get<double>() == doctest::Approx(ll / 4.0).epsilon(1e-9));

  SUBCASE("a different seed changes the output") {
    CHECK(w.run("generate" + common(w) + " --constraints '" + spec.string() + "' --length 16 --samples 16 --seed 6 --runs 4").out !=
          a.out);
  }
  SUBCASE("logical mode is recorded") {
    const fs::path lrep = w.dir / "logical.json";
    const Run r = w.run(args + " --mode logical --report '" + lrep.string() + "'");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const json j = json::parse(slurp(lrep));
    CHECK(j.at("mode") == "logical");
    CHECK(j.at("satisfaction_rate") == 1.0);
  }
  SUBCASE("n-gram base model with a prefix") {
    const Run r = w.run(args + " --base-lm ngram --lm-text '" + w.stories() + "' --prefix 'the dog'");
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(r.out.find("snow") != std::string::npos);
  }
}

TEST_CASE("unsatisfiable constraints exit with code 3 and name the clause") {
  Workspace& w = ws();
  const fs::path spec = constraints(w, "long.json", R"({"keyphrases": ["snow"], "word_length": {"min": 20, "max": 30}})");
  const Run r = w.run("generate" + common(w) + " --constraints '" + spec.string() + "' --length 16");
  CHECK(r.code == 3);
  CHECK(r.err.find("unsatisfiable") != std::string::npos);
  CHECK(r.err.find("word_length") != std::string::npos);
  CHECK(r.out.empty());

  const fs::path contra = constraints(w, "contra.json", R"({"keyphrases": ["snow"], "forbidden": ["snow"]})");
  const Run c = w.run("compile --constraints '" + contra.string() + "' --vocab '" + w.vocab.string() + "'");
  CHECK(c.code == 3);
  const Run g = w.run("generate" + common(w) + " --constraints '" + contra.string() + "'");
  CHECK(g.code == 3);
  CHECK(g.err.find("clause") != std::string::npos);
}

TEST_CASE("input errors exit with code 2") {
  Workspace& w = ws();
  const fs::path unknown = constraints(w, "zebra.json", R"({"keyphrases": ["zebra"]})");
  const Run r = w.run("generate" + common(w) + " --constraints '" + unknown.string() + "'");
  CHECK(r.code == 2);
  CHECK(r.err.find("unknown word 'zebra'") != std::string::npos);

  const fs::path field = constraints(w, "field.json", R"({"colour": "red"})");
  CHECK(w.run("generate" + common(w) + " --constraints '" + field.string() + "'").code == 2);
  const fs::path broken = constraints(w, "broken.json", "{");
  CHECK(w.run("compile --constraints '" + broken.string() + "' --vocab '" + w.vocab.string() + "'").code == 2);
  CHECK(w.run("generate --vocab '" + w.vocab.string() + "'").code == 2);
  CHECK(w.run("generate" + common(w) + " --constraints /nonexistent.json").code == 2);
  CHECK(w.run("bench --sizes 4,x").code == 2);
  CHECK(w.run("frobnicate").code == 2);

  const fs::path empty = w.dir / "empty.json";
  write(empty, R"({"version": 1, "constraints": {"alphabet": {"size": 4}}, "items": []})");
  const Run e = w.run("eval --dataset '" + empty.string() + "'");
  CHECK(e.code == 2);
  CHECK(e.err.find("empty") != std::string::npos);

  const fs::path other_vocab = w.dir / "small_vocab.txt";
  write(other_vocab, "<eos>\n<pad>\n<unk>\nsnow\n");
  const fs::path snow = constraints(w, "s.json", R"({"keyphrases": ["snow"]})");
  const Run m = w.run("generate --model '" + w.model.string() + "' --vocab '" + other_vocab.string() +
                      "' --constraints '" + snow.string() + "'");
  CHECK(m.code == 2);
  CHECK(m.err.find("does not match") != std::string::npos);
}

TEST_CASE("compile, sample, distill and bench") {
  Workspace& w = ws();
  const fs::path spec = constraints(w, "c.json", R"({"ordered_segments": [{"text": "the", "window_after": {"min": 1, "max": 3}}, {"text": "ring"}]})");
  const fs::path dfa = w.dir / "dfa.json", dot = w.dir / "dfa.dot";
  const Run c = w.run("compile --constraints '" + spec.string() + "' --vocab '" + w.vocab.string() + "' --length 12 --dfa-out '" +
                      dfa.string() + "' --dot-out '" + dot.string() + "'");
  REQUIRE_MESSAGE(c.code == 0, c.err);
  const json info = json::parse(c.out);
  CHECK(info.at("horizon") == 12);
  CHECK(info.at("empty_language") == false);
  CHECK(dfaguide::dfa_from_json(slurp(dfa)).num_states() == info.at("states").get<std::size_t>());
  CHECK(slurp(dot).find("digraph") != std::string::npos);

  const std::string sample = "sample --model '" + w.model.string() + "' --num 3 --length 8 --seed 2";
  const Run s1 = w.run(sample), s2 = w.run(sample);
  REQUIRE(s1.code == 0);
  CHECK(s1.out == s2.out);
  CHECK(std::count(s1.out.begin(), s1.out.end(), '\n') == 3);
  const Run st = w.run(sample + " --vocab '" + w.vocab.string() + "'");
  CHECK(st.code == 0);

  const fs::path dm = w.dir / "distilled.bin", drep = w.dir / "distill.json";
  const Run d = w.run("distill --vocab '" + w.vocab.string() + "' --lm-text '" + w.stories() +
                      "' --num-sequences 200 --length 10 --hidden 4 --iters 5 --restarts 1 --out '" + dm.string() +
                      "' --report-out '" + drep.string() + "'");
  REQUIRE_MESSAGE(d.code == 0, d.err);
  CHECK(json::parse(slurp(drep)).at("kl_gap").is_number());
  CHECK(dfaguide::load_hmm(dm.string()).num_hidden() == 4);

  const fs::path pos = w.dir / "pos.csv";
  const Run b = w.run("bench --hidden 8 --vocab-size 6 --horizon 5 --repeats 1 --sizes 2,4 --positions-out '" + pos.string() + "'");
  REQUIRE_MESSAGE(b.code == 0, b.err);
  CHECK(b.out.rfind("dfa_states,", 0) == 0);
  CHECK(std::count(b.out.begin(), b.out.end(), '\n') == 3);
  const std::string positions = slurp(pos);
  CHECK(std::count(positions.begin(), positions.end(), '\n') == 5);
}
