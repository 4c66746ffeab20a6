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

// dfaguide command-line tool. Talks to the library only through the C API.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dfaguide/dfaguide.h"
#include "tokenizer.hpp"

using nlohmann::json;
using dfaguide::text::TextError;
using dfaguide::text::WordTokenizer;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitUnsatisfiable = 3;
constexpr int kExitInternal = 4;

struct CliError {
  int code;
  std::string message;
};

int exit_code(dg_status s) {
  switch (s) {
    case DG_OK: return kExitOk;
    case DG_ERR_INPUT:
    case DG_ERR_IO:
    case DG_ERR_STRUCTURE:
    case DG_ERR_BUDGET: return kExitInput;
    case DG_ERR_UNSATISFIABLE:
    case DG_ERR_DEAD_END: return kExitUnsatisfiable;
    default: return kExitInternal;
  }
}

void check(dg_status s) {
  if (s != DG_OK) throw CliError{exit_code(s), dg_last_error()};
}

[[noreturn]] void input_error(const std::string& message) { throw CliError{kExitInput, message}; }

struct Deleter {
  void operator()(dg_hmm* p) const { dg_hmm_free(p); }
  void operator()(dg_dfa* p) const { dg_dfa_free(p); }
  void operator()(dg_lm* p) const { dg_lm_free(p); }
  void operator()(dg_corpus* p) const { dg_corpus_free(p); }
  void operator()(dg_samples* p) const { dg_samples_free(p); }
  void operator()(char* p) const { dg_string_free(p); }
};
template <typename T>
using Handle = std::unique_ptr<T, Deleter>;

std::string take_string(char* s) {
  Handle<char> owned(s);
  return s ? std::string(s) : std::string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) input_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) input_error("cannot write " + path);
  out << content;
  if (!out) input_error("write failed for " + path);
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    input_error(what + " is not valid JSON: " + e.what());
  }
}

Handle<dg_hmm> load_model(const std::string& path) {
  dg_hmm* h = nullptr;
  check(dg_hmm_load(path.c_str(), &h));
  return Handle<dg_hmm>(h);
}

Handle<dg_corpus> corpus_from(const std::vector<std::vector<std::int32_t>>& seqs, std::size_t length) {
  if (seqs.empty()) input_error("no sentence fits in " + std::to_string(length) + " tokens");
  std::vector<std::int32_t> flat;
  for (const auto& s : seqs) flat.insert(flat.end(), s.begin(), s.end());
  dg_corpus* c = nullptr;
  check(dg_corpus_from_tokens(flat.data(), seqs.size(), length, &c));
  return Handle<dg_corpus>(c);
}

// Base LM options shared by generate and eval.
struct LmOptions {
  std::string kind = "hmm";
  std::string text;
  std::size_t order = 3;
  double add_k = 0.1;
};

void add_lm_options(CLI::App* cmd, LmOptions& o) {
  cmd->add_option("--base-lm", o.kind, "Model the decoder is steered around")
      ->check(CLI::IsMember({"hmm", "ngram"}))
      ->capture_default_str();
  cmd->add_option("--lm-text", o.text, "Training text for --base-lm ngram")->check(CLI::ExistingFile);
  cmd->add_option("--lm-order", o.order, "N-gram order")->capture_default_str();
  cmd->add_option("--lm-add-k", o.add_k, "N-gram add-k smoothing")->capture_default_str();
}

Handle<dg_lm> make_lm(const LmOptions& o, const dg_hmm* hmm, const WordTokenizer& tok, std::size_t length) {
  dg_lm* lm = nullptr;
  if (o.kind == "hmm") {
    check(dg_lm_from_hmm(hmm, &lm));
  } else {
    if (o.text.empty()) input_error("--base-lm ngram needs --lm-text");
    const auto corpus = corpus_from(tok.sentence_corpus(read_file(o.text), length), length);
    check(dg_lm_ngram(corpus.get(), tok.size(), o.order, o.add_k, &lm));
  }
  return Handle<dg_lm>(lm);
}

// Prints the clause diagnosis and returns the unsatisfiable exit code.
[[noreturn]] void unsatisfiable(const std::string& spec_json, std::size_t length) {
  char* out = nullptr;
  check(dg_diagnose_json(spec_json.c_str(), length, &out));
  const json d = json::parse(take_string(out));
  std::string msg = "unsatisfiable constraint";
  if (d.value("satisfiable", false)) {
    msg += ": no accepted sequence has positive probability under the model";
  } else {
    msg += ": clause " + d["clause"].get<std::string>() + ": " + d["message"].get<std::string>();
  }
  throw CliError{kExitUnsatisfiable, msg};
}

struct Compiled {
  std::string spec_json;
  json info;
  Handle<dg_dfa> dfa;
};

Compiled compile_text_spec(const std::string& path, const WordTokenizer& tok, std::size_t length) {
  const json text_spec = parse_json(read_file(path), path);
  Compiled c;
  try {
    c.spec_json = dfaguide::text::text_spec_to_tokens(text_spec, tok, length).dump();
  } catch (const TextError& e) {
    input_error(path + ": " + e.what());
  }
  dg_dfa* dfa = nullptr;
  char* info = nullptr;
  check(dg_compile_json(c.spec_json.c_str(), &dfa, &info));
  c.dfa.reset(dfa);
  c.info = json::parse(take_string(info));
  return c;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v == 0) input_error("--sizes: bad entry '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) input_error("--sizes is empty");
  return out;
}

std::string tokens_line(const std::int32_t* tokens, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + std::to_string(tokens[i]);
  return out;
}

// ---------------------------------------------------------------------------

struct TokenizeArgs {
  std::string text, vocab_out, corpus_out, vocab_in;
  std::size_t length = 16;
  std::size_t max_vocab = 0;
};

int cmd_tokenize(const TokenizeArgs& a) {
  const std::string text = read_file(a.text);
  const WordTokenizer tok = a.vocab_in.empty() ? WordTokenizer::build(text, a.max_vocab) : WordTokenizer::load(a.vocab_in);
  if (!a.vocab_out.empty()) tok.save(a.vocab_out);
  const auto seqs = tok.sentence_corpus(text, a.length);
  if (!a.corpus_out.empty()) check(dg_corpus_write(corpus_from(seqs, a.length).get(), a.corpus_out.c_str()));
  std::cout << json{{"vocab_size", tok.size()}, {"sequences", seqs.size()}, {"length", a.length}}.dump() << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string corpus, text, vocab, out, report_out;
  std::size_t vocab_size = 0;
  std::size_t length = 16;
  dg_train_options opts{};
};

void add_train_options(CLI::App* cmd, dg_train_options& o) {
  cmd->add_option("--hidden", o.num_hidden, "Hidden states")->capture_default_str();
  cmd->add_option("--iters", o.max_iters, "Maximum EM iterations")->capture_default_str();
  cmd->add_option("--tol", o.tol, "Stop when per-token log-likelihood gains less")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--restarts", o.restarts, "EM restarts; best held-out model wins")->capture_default_str();
  cmd->add_option("--heldout", o.heldout_fraction, "Held-out fraction")->capture_default_str();
  cmd->add_option("--threads", o.num_threads, "Worker threads (0 = all cores)")->capture_default_str();
}

int cmd_train(const TrainArgs& a) {
  Handle<dg_corpus> corpus;
  std::size_t vocab_size = a.vocab_size;
  if (!a.vocab.empty()) vocab_size = WordTokenizer::load(a.vocab).size();
  if (!a.text.empty()) {
    if (a.vocab.empty()) input_error("--text needs --vocab");
    corpus = corpus_from(WordTokenizer::load(a.vocab).sentence_corpus(read_file(a.text), a.length), a.length);
  } else {
    if (vocab_size == 0) input_error("--corpus needs --vocab or --vocab-size");
    dg_corpus* c = nullptr;
    check(dg_corpus_read(a.corpus.c_str(), vocab_size, &c));
    corpus.reset(c);
  }
  dg_hmm* h = nullptr;
  char* report = nullptr;
  check(dg_train(corpus.get(), vocab_size, &a.opts, &h, &report));
  Handle<dg_hmm> hmm(h);
  const std::string report_text = take_string(report);
  check(dg_hmm_save(hmm.get(), a.out.c_str()));
  if (!a.report_out.empty()) write_file(a.report_out, report_text + "\n");
  const json r = json::parse(report_text);
  std::cout << json{{"model", a.out},
                    {"heldout_loglik_hmm", r["heldout_loglik_hmm"]},
                    {"iterations", r["iterations"]},
                    {"converged", r["converged"]}}
                   .dump()
            << '\n';
  return kExitOk;
}

struct DistillArgs {
  DistillArgs() { lm.kind = "ngram"; }
  std::string vocab, out, report_out;
  LmOptions lm;
  std::size_t num_sequences = 2000;
  std::size_t length = 16;
  dg_train_options opts{};
};

int cmd_distill(const DistillArgs& a) {
  const WordTokenizer tok = WordTokenizer::load(a.vocab);
  const auto lm = make_lm(a.lm, nullptr, tok, a.length);
  dg_hmm* h = nullptr;
  char* report = nullptr;
  check(dg_distill(lm.get(), a.num_sequences, a.length, WordTokenizer::kEos, WordTokenizer::kPad, &a.opts, &h, &report));
  Handle<dg_hmm> hmm(h);
  const std::string report_text = take_string(report);
  check(dg_hmm_save(hmm.get(), a.out.c_str()));
  if (!a.report_out.empty()) write_file(a.report_out, report_text + "\n");
  const json r = json::parse(report_text);
  std::cout << json{{"model", a.out},
                    {"heldout_loglik_hmm", r["heldout_loglik_hmm"]},
                    {"heldout_loglik_lm", r["heldout_loglik_lm"]},
                    {"kl_gap", r["kl_gap"]}}
                   .dump()
            << '\n';
  return kExitOk;
}

struct SampleArgs {
  std::string model, vocab;
  std::size_t num = 10;
  std::size_t length = 16;
  std::uint64_t seed = 0;
};

int cmd_sample(const SampleArgs& a) {
  const auto hmm = load_model(a.model);
  std::vector<std::int32_t> out(a.num * a.length);
  check(dg_hmm_sample(hmm.get(), a.num, a.length, a.seed, out.data()));
  std::unique_ptr<WordTokenizer> tok;
  if (!a.vocab.empty()) tok = std::make_unique<WordTokenizer>(WordTokenizer::load(a.vocab));
  for (std::size_t i = 0; i < a.num; ++i) {
    const std::int32_t* seq = out.data() + i * a.length;
    if (tok) {
      std::cout << tok->decode(std::vector<std::int32_t>(seq, seq + a.length)) << '\n';
    } else {
      std::cout << tokens_line(seq, a.length) << '\n';
    }
  }
  return kExitOk;
}

struct CompileArgs {
  std::string constraints, vocab, dfa_out, dot_out;
  std::size_t length = 0;
};

int cmd_compile(const CompileArgs& a) {
  const WordTokenizer tok = WordTokenizer::load(a.vocab);
  const Compiled c = compile_text_spec(a.constraints, tok, a.length);
  if (!a.dfa_out.empty()) {
    char* s = nullptr;
    check(dg_dfa_to_json(c.dfa.get(), &s));
    write_file(a.dfa_out, take_string(s) + "\n");
  }
  if (!a.dot_out.empty()) {
    std::vector<const char*> names;
    for (std::size_t i = 0; i < tok.size(); ++i) names.push_back(tok.word(static_cast<std::int32_t>(i)).c_str());
    char* s = nullptr;
    check(dg_dfa_to_dot(c.dfa.get(), names.data(), &s));
    write_file(a.dot_out, take_string(s));
  }
  std::cout << c.info.dump() << '\n';
  if (c.info["empty_language"].get<bool>()) unsatisfiable(c.spec_json, c.info["horizon"].get<std::size_t>());
  return kExitOk;
}

struct GenerateArgs {
  std::string model, vocab, constraints, prefix, dataset_out, report;
  LmOptions lm;
  std::size_t length = 0;
  std::size_t runs = 1;
  std::string mode = "probabilistic";
  bool temperature_on_product = false;
  dg_generate_options opts{};
};

int cmd_generate(GenerateArgs a) {
  const auto started = std::chrono::steady_clock::now();
  const WordTokenizer tok = WordTokenizer::load(a.vocab);
  const auto hmm = load_model(a.model);
  if (dg_hmm_vocab_size(hmm.get()) != tok.size()) {
    input_error("model vocabulary (" + std::to_string(dg_hmm_vocab_size(hmm.get())) + ") does not match " + a.vocab +
                " (" + std::to_string(tok.size()) + ")");
  }
  const Compiled c = compile_text_spec(a.constraints, tok, a.length);
  const auto horizon = c.info["horizon"].get<std::size_t>();
  if (c.info["empty_language"].get<bool>()) unsatisfiable(c.spec_json, horizon);
  const auto lm = make_lm(a.lm, hmm.get(), tok, horizon);
  const auto context = tok.encode(a.prefix);

  a.opts.mode = a.mode == "logical" ? DG_MODE_LOGICAL : DG_MODE_PROBABILISTIC;
  a.opts.temperature_on_product = a.temperature_on_product ? 1 : 0;
  a.opts.horizon = horizon;

  json runs = json::array();
  json items = json::array();
  std::size_t satisfied_runs = 0;
  for (std::size_t r = 0; r < a.runs; ++r) {
    dg_generate_options opts = a.opts;
    opts.seed = a.opts.seed + r;
    dg_samples* raw = nullptr;
    const dg_status s = dg_generate(hmm.get(), c.dfa.get(), lm.get(), &opts, context.data(), context.size(), &raw);
    if (s == DG_ERR_UNSATISFIABLE) unsatisfiable(c.spec_json, horizon);
    check(s);
    Handle<dg_samples> samples(raw);
    const std::size_t best = dg_samples_ranked(samples.get(), 0);
    const std::int32_t* tokens = dg_samples_tokens(samples.get(), best);
    const std::vector<std::int32_t> seq(tokens, tokens + horizon);
    int satisfied = 0;
    check(dg_check_json(c.spec_json.c_str(), seq.data(), seq.size(), &satisfied));
    int accepted = 0;
    check(dg_dfa_accepts(c.dfa.get(), seq.data(), seq.size(), &accepted));
    satisfied_runs += satisfied ? 1 : 0;
    double seconds = 0.0;
    for (std::size_t i = 0; i < dg_samples_count(samples.get()); ++i) seconds += dg_samples_seconds(samples.get(), i);
    const std::string text = tok.decode(seq);
    std::cout << text << '\n';
    runs.push_back({{"seed", opts.seed},
                    {"text", text},
                    {"tokens", seq},
                    {"loglik", dg_samples_loglik(samples.get(), best)},
                    {"satisfied", satisfied != 0},
                    {"dfa_accepted", accepted != 0},
                    {"precompute_seconds", dg_samples_precompute_seconds(samples.get())},
                    {"us_per_token", 1e6 * seconds / static_cast<double>(dg_samples_count(samples.get()) * horizon)}});
    items.push_back({{"tokens", seq}, {"text", text}});
  }
  if (!a.dataset_out.empty()) {
    const json dataset{{"version", 1}, {"constraints", json::parse(c.spec_json)}, {"items", items}};
    write_file(a.dataset_out, dataset.dump() + "\n");
  }
  if (!a.report.empty()) {
    const json report{
        {"version", 1},
        {"mode", a.mode},
        {"base_lm", a.lm.kind == "hmm" ? "hmm" : "ngram" + std::to_string(a.lm.order)},
        {"temperature", a.opts.temperature},
        {"temperature_on_product", a.temperature_on_product},
        {"num_samples", a.opts.num_samples},
        {"horizon", horizon},
        {"dfa", {{"states", c.info["states"]}, {"edges", c.info["edges"]}}},
        {"satisfaction_rate", static_cast<double>(satisfied_runs) / static_cast<double>(a.runs)},
        {"runs", runs},
        {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}};
    write_file(a.report, report.dump(2) + "\n");
  }
  return kExitOk;
}

struct EvalArgs {
  std::string dataset, model, vocab;
  LmOptions lm;
};

int cmd_eval(const EvalArgs& a) {
  const json data = parse_json(read_file(a.dataset), a.dataset);
  if (!data.is_object() || !data.contains("constraints") || !data.contains("items") || !data["items"].is_array()) {
    input_error(a.dataset + ": expected {\"constraints\", \"items\"}");
  }
  if (data["items"].empty()) input_error(a.dataset + ": dataset is empty");
  const std::string spec_json = data["constraints"].dump();
  dg_dfa* raw = nullptr;
  check(dg_compile_json(spec_json.c_str(), &raw, nullptr));
  const Handle<dg_dfa> dfa(raw);

  Handle<dg_hmm> hmm;
  Handle<dg_lm> lm;
  if (!a.model.empty()) {
    if (a.vocab.empty()) input_error("--model needs --vocab");
    hmm = load_model(a.model);
    const WordTokenizer tok = WordTokenizer::load(a.vocab);
    lm = make_lm(a.lm, hmm.get(), tok, data["items"][0]["tokens"].size());
  }

  std::size_t satisfied = 0, accepted = 0;
  double loglik = 0.0;
  for (const auto& item : data["items"]) {
    std::vector<std::int32_t> seq;
    try {
      seq = item.at("tokens").get<std::vector<std::int32_t>>();
    } catch (const json::exception&) {
      input_error(a.dataset + ": every item needs integer \"tokens\"");
    }
    int ok = 0;
    check(dg_check_json(spec_json.c_str(), seq.data(), seq.size(), &ok));
    satisfied += ok ? 1 : 0;
    check(dg_dfa_accepts(dfa.get(), seq.data(), seq.size(), &ok));
    accepted += ok ? 1 : 0;
    if (lm) {
      double ll = 0.0;
      check(dg_lm_loglik(lm.get(), seq.data(), seq.size(), nullptr, 0, &ll));
      loglik += ll;
    }
  }
  const auto n = static_cast<double>(data["items"].size());
  json out{{"count", data["items"].size()},
           {"satisfaction_rate", static_cast<double>(satisfied) / n},
           {"dfa_acceptance_rate", static_cast<double>(accepted) / n}};
  out["mean_loglik"] = lm ? json(loglik / n) : json();
  std::cout << out.dump() << '\n';
  return kExitOk;
}

struct BenchArgs {
  std::size_t hidden = 128, vocab_size = 64, horizon = 32, repeats = 5;
  std::uint64_t seed = 7;
  std::string sizes = "16,32,64,128,256,512,1024";
  std::string out, positions_out;
};

int cmd_bench(const BenchArgs& a) {
  const auto sizes = parse_sizes(a.sizes);
  char* sizes_csv = nullptr;
  char* positions_csv = nullptr;
  check(dg_benchmark(a.hidden, a.vocab_size, a.horizon, a.repeats, a.seed, sizes.data(), sizes.size(), &sizes_csv,
                     &positions_csv));
  const std::string s = take_string(sizes_csv);
  const std::string p = take_string(positions_csv);
  if (a.out.empty()) {
    std::cout << s;
  } else {
    write_file(a.out, s);
  }
  if (!a.positions_out.empty()) write_file(a.positions_out, p);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained text generation guided by an HMM and a DFA"};
  app.set_version_flag("--version", std::string(dg_version()));
  app.require_subcommand(1);

  TokenizeArgs tokenize;
  auto* c_tok = app.add_subcommand("tokenize", "Build a vocabulary and a padded sentence corpus from text");
  c_tok->add_option("--text", tokenize.text, "Plain text input")->required()->check(CLI::ExistingFile);
  c_tok->add_option("--vocab", tokenize.vocab_in, "Reuse an existing vocabulary")->check(CLI::ExistingFile);
  c_tok->add_option("--vocab-out", tokenize.vocab_out, "Write the vocabulary here");
  c_tok->add_option("--corpus-out", tokenize.corpus_out, "Write token ids here");
  c_tok->add_option("--length", tokenize.length, "Tokens per sequence")->capture_default_str();
  c_tok->add_option("--max-vocab", tokenize.max_vocab, "Vocabulary cap including reserved ids (0 = none)");

  TrainArgs train;
  dg_train_options_default(&train.opts);
  auto* c_train = app.add_subcommand("train", "Fit an HMM with Baum-Welch");
  auto* corpus_opt = c_train->add_option("--corpus", train.corpus, "Token id corpus")->check(CLI::ExistingFile);
  auto* text_opt = c_train->add_option("--text", train.text, "Plain text, split into sentences with --vocab")
                       ->check(CLI::ExistingFile);
  corpus_opt->excludes(text_opt);
  c_train->add_option("--vocab", train.vocab, "Vocabulary file")->check(CLI::ExistingFile);
  c_train->add_option("--vocab-size", train.vocab_size, "Vocabulary size when no --vocab is given");
  c_train->add_option("--length", train.length, "Tokens per sequence for --text")->capture_default_str();
  c_train->add_option("--out", train.out, "Model file (.json for JSON)")->required();
  c_train->add_option("--report-out", train.report_out, "Fit report JSON");
  add_train_options(c_train, train.opts);

  DistillArgs dist;
  dg_train_options_default(&dist.opts);
  auto* c_dist = app.add_subcommand("distill", "Sample from an n-gram model and fit an HMM to the samples");
  c_dist->add_option("--vocab", dist.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
  c_dist->add_option("--lm-text", dist.lm.text, "Training text for the n-gram model")
      ->required()
      ->check(CLI::ExistingFile);
  c_dist->add_option("--lm-order", dist.lm.order, "N-gram order")->capture_default_str();
  c_dist->add_option("--num-sequences", dist.num_sequences, "Sampled sequences")->capture_default_str();
  c_dist->add_option("--length", dist.length, "Tokens per sequence")->capture_default_str();
  c_dist->add_option("--out", dist.out, "Model file")->required();
  c_dist->add_option("--report-out", dist.report_out, "Fit report JSON");
  add_train_options(c_dist, dist.opts);

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("sample", "Draw unconstrained samples from an HMM");
  c_sample->add_option("--model", sample.model, "Model file")->required()->check(CLI::ExistingFile);
  c_sample->add_option("--vocab", sample.vocab, "Print text instead of ids")->check(CLI::ExistingFile);
  c_sample->add_option("--num", sample.num, "Number of samples")->capture_default_str();
  c_sample->add_option("--length", sample.length, "Tokens per sample")->capture_default_str();
  c_sample->add_option("--seed", sample.seed, "Random seed")->capture_default_str();

  CompileArgs comp;
  auto* c_comp = app.add_subcommand("compile", "Compile a constraint file into an automaton");
  c_comp->add_option("--constraints", comp.constraints, "Text-level constraint JSON")
      ->required()
      ->check(CLI::ExistingFile);
  c_comp->add_option("--vocab", comp.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
  c_comp->add_option("--length", comp.length, "Override the horizon");
  c_comp->add_option("--dfa-out", comp.dfa_out, "Automaton JSON");
  c_comp->add_option("--dot-out", comp.dot_out, "Graphviz rendering");

  GenerateArgs gen;
  dg_generate_options_default(&gen.opts);
  auto* c_gen = app.add_subcommand("generate", "Constrained generation with K-sample reranking");
  c_gen->add_option("--model", gen.model, "HMM file")->required()->check(CLI::ExistingFile);
  c_gen->add_option("--vocab", gen.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
  c_gen->add_option("--constraints", gen.constraints, "Text-level constraint JSON")
      ->required()
      ->check(CLI::ExistingFile);
  c_gen->add_option("--length", gen.length, "Override the horizon");
  c_gen->add_option("--samples", gen.opts.num_samples, "Samples drawn before reranking (K)")->capture_default_str();
  c_gen->add_option("--temperature", gen.opts.temperature, "Softmax temperature")->capture_default_str();
  c_gen->add_flag("--temperature-on-product", gen.temperature_on_product,
                  "Apply the temperature to LM scores plus guidance");
  c_gen->add_option("--seed", gen.opts.seed, "Random seed; run r uses seed + r")->capture_default_str();
  c_gen->add_option("--threads", gen.opts.num_threads, "Sampling threads")->capture_default_str();
  c_gen->add_option("--mode", gen.mode, "probabilistic or logical")
      ->check(CLI::IsMember({"probabilistic", "logical"}))
      ->capture_default_str();
  c_gen->add_option("--prefix", gen.prefix, "Context for the base LM");
  c_gen->add_option("--runs", gen.runs, "Independent generations")->capture_default_str()->check(CLI::PositiveNumber);
  c_gen->add_option("--dataset-out", gen.dataset_out, "Dataset JSON for eval");
  c_gen->add_option("--report", gen.report, "Report JSON with timing");
  add_lm_options(c_gen, gen.lm);

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Satisfaction and likelihood metrics for a dataset");
  c_eval->add_option("--dataset", ev.dataset, "Dataset JSON")->required()->check(CLI::ExistingFile);
  c_eval->add_option("--model", ev.model, "HMM file for likelihoods")->check(CLI::ExistingFile);
  c_eval->add_option("--vocab", ev.vocab, "Vocabulary file")->check(CLI::ExistingFile);
  add_lm_options(c_eval, ev.lm);

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Per-token guidance time against automaton size");
  c_bench->add_option("--hidden", bench.hidden, "Hidden states")->capture_default_str();
  c_bench->add_option("--vocab-size", bench.vocab_size, "Vocabulary size")->capture_default_str();
  c_bench->add_option("--horizon", bench.horizon, "Sequence length")->capture_default_str();
  c_bench->add_option("--repeats", bench.repeats, "Repetitions per size")->capture_default_str();
  c_bench->add_option("--seed", bench.seed, "Random seed")->capture_default_str();
  c_bench->add_option("--sizes", bench.sizes, "Comma-separated automaton state counts")->capture_default_str();
  c_bench->add_option("--out", bench.out, "CSV by size (default stdout)");
  c_bench->add_option("--positions-out", bench.positions_out, "CSV by position on the largest size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*c_tok) return cmd_tokenize(tokenize);
    if (*c_train) return cmd_train(train);
    if (*c_dist) return cmd_distill(dist);
    if (*c_sample) return cmd_sample(sample);
    if (*c_comp) return cmd_compile(comp);
    if (*c_gen) return cmd_generate(gen);
    if (*c_eval) return cmd_eval(ev);
    if (*c_bench) return cmd_bench(bench);
  } catch (const CliError& e) {
    std::cerr << "dfaguide: " << e.message << '\n';
    return e.code;
  } catch (const TextError& e) {
    std::cerr << "dfaguide: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "dfaguide: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
