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

#include "dfaguide/dfaguide.h"

#include <chrono>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"

#include "dfaguide/constraints.hpp"
#include "dfaguide/distill.hpp"
#include "dfaguide/engine.hpp"
#include "dfaguide/error.hpp"
#include "dfaguide/oracle.hpp"

using namespace dfaguide;

struct dg_hmm {
  std::shared_ptr<const Hmm> hmm;
};
struct dg_dfa {
  Dfa dfa;
};
struct dg_corpus {
  Corpus corpus;
};
struct dg_lm {
  std::shared_ptr<const Hmm> hmm;  // keeps an HMM-backed model alive
  std::unique_ptr<BaseLm> lm;
};
struct dg_samples {
  std::vector<SampleResult> samples;
  std::vector<std::size_t> ranking;
  std::size_t length = 0;
  double precompute_seconds = 0.0;
};

namespace {

thread_local std::string last_error;

template <typename F>
dg_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return DG_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return static_cast<dg_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DG_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw InputError(std::string(what) + " must not be null");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::span<const Token> span_of(const int32_t* tokens, std::size_t n) {
  if (n > 0) require(tokens, "tokens");
  return {tokens, n};
}

EmConfig em_config(const dg_train_options& o) {
  EmConfig em;
  em.num_hidden = o.num_hidden;
  em.max_iters = o.max_iters;
  em.tol = o.tol;
  em.smoothing = o.smoothing;
  em.seed = o.seed;
  em.num_threads = o.num_threads;
  return em;
}

}  // namespace

extern "C" {

const char* dg_version(void) { return "0.1.0"; }
const char* dg_last_error(void) { return last_error.c_str(); }
void dg_string_free(char* s) { std::free(s); }

dg_status dg_hmm_load(const char* path, dg_hmm** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dg_hmm{std::make_shared<const Hmm>(load_hmm(path))};
  });
}

dg_status dg_hmm_save(const dg_hmm* hmm, const char* path) {
  return guarded([&] {
    require(hmm, "hmm");
    require(path, "path");
    save_hmm(*hmm->hmm, path);
  });
}

dg_status dg_hmm_random(size_t num_hidden, size_t vocab_size, uint64_t seed, dg_hmm** out) {
  return guarded([&] {
    require(out, "out");
    Rng rng(seed);
    *out = new dg_hmm{std::make_shared<const Hmm>(Hmm::random(num_hidden, vocab_size, rng))};
  });
}

void dg_hmm_free(dg_hmm* hmm) { delete hmm; }
size_t dg_hmm_num_hidden(const dg_hmm* hmm) { return hmm ? hmm->hmm->num_hidden() : 0; }
size_t dg_hmm_vocab_size(const dg_hmm* hmm) { return hmm ? hmm->hmm->vocab_size() : 0; }
uint64_t dg_hmm_fingerprint(const dg_hmm* hmm) { return hmm ? hmm->hmm->fingerprint() : 0; }

dg_status dg_hmm_sequence_loglik(const dg_hmm* hmm, const int32_t* tokens, size_t n, double* out) {
  return guarded([&] {
    require(hmm, "hmm");
    require(out, "out");
    *out = sequence_loglik(*hmm->hmm, span_of(tokens, n));
  });
}

dg_status dg_hmm_sample(const dg_hmm* hmm, size_t num, size_t length, uint64_t seed, int32_t* out) {
  return guarded([&] {
    require(hmm, "hmm");
    require(out, "out");
    for (std::size_t i = 0; i < num; ++i) {
      Rng rng = Rng::derive(seed, i);
      const auto seq = sample_unconditional(*hmm->hmm, length, rng);
      std::copy(seq.begin(), seq.end(), out + i * length);
    }
  });
}

dg_status dg_corpus_read(const char* path, size_t vocab_size, dg_corpus** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new dg_corpus{read_corpus_file(path, vocab_size)};
  });
}

dg_status dg_corpus_from_tokens(const int32_t* tokens, size_t num, size_t length, dg_corpus** out) {
  return guarded([&] {
    require(out, "out");
    if (length == 0) throw InputError("sequence length must be positive");
    auto c = std::make_unique<dg_corpus>();
    const auto all = span_of(tokens, num * length);
    for (std::size_t i = 0; i < num; ++i) c->corpus.append(all.subspan(i * length, length));
    *out = c.release();
  });
}

dg_status dg_corpus_write(const dg_corpus* corpus, const char* path) {
  return guarded([&] {
    require(corpus, "corpus");
    require(path, "path");
    std::ofstream f(path);
    if (!f) throw IoError(std::string("cannot write ") + path);
    write_corpus(f, corpus->corpus);
    if (!f) throw IoError(std::string("write failed for ") + path);
  });
}

void dg_corpus_free(dg_corpus* corpus) { delete corpus; }
size_t dg_corpus_size(const dg_corpus* corpus) { return corpus ? corpus->corpus.size() : 0; }
size_t dg_corpus_length(const dg_corpus* corpus) { return corpus ? corpus->corpus.length : 0; }
const int32_t* dg_corpus_sequence(const dg_corpus* corpus, size_t index) {
  if (!corpus || index >= corpus->corpus.size()) return nullptr;
  return corpus->corpus.sequence(index).data();
}

void dg_train_options_default(dg_train_options* options) {
  if (!options) return;
  const EmConfig em;
  options->num_hidden = em.num_hidden;
  options->max_iters = em.max_iters;
  options->tol = em.tol;
  options->smoothing = em.smoothing;
  options->seed = em.seed;
  options->num_threads = em.num_threads;
  options->restarts = 3;
  options->heldout_fraction = 0.1;
}

dg_status dg_train(const dg_corpus* corpus, size_t vocab_size, const dg_train_options* options, dg_hmm** out,
                   char** report_json) {
  return guarded([&] {
    require(corpus, "corpus");
    require(options, "options");
    require(out, "out");
    const EmConfig em = em_config(*options);
    const auto [train, heldout] = split_corpus(corpus->corpus, options->heldout_fraction);
    auto result = fit_and_report(train, heldout, vocab_size, em, options->restarts);
    if (report_json) *report_json = copy_string(report_to_json(result.report));
    *out = new dg_hmm{std::make_shared<const Hmm>(std::move(result.hmm))};
  });
}

dg_status dg_distill(const dg_lm* lm, size_t num_sequences, size_t length, int32_t eos, int32_t pad,
                     const dg_train_options* options, dg_hmm** out, char** report_json) {
  return guarded([&] {
    require(lm, "lm");
    require(options, "options");
    require(out, "out");
    DistillConfig config;
    config.num_sequences = num_sequences;
    config.length = length;
    config.heldout_fraction = options->heldout_fraction;
    config.restarts = options->restarts;
    config.em = em_config(*options);
    config.seed = options->seed;
    config.eos = eos;
    config.pad = pad;
    auto result = distill(*lm->lm, config);
    if (report_json) *report_json = copy_string(report_to_json(result.report));
    *out = new dg_hmm{std::make_shared<const Hmm>(std::move(result.hmm))};
  });
}

dg_status dg_compile_json(const char* spec_json, dg_dfa** out, char** info_json) {
  return guarded([&] {
    require(spec_json, "spec_json");
    require(out, "out");
    const auto spec = spec_from_json(spec_json);
    auto result = compile(spec);
    if (info_json) {
      nlohmann::json info{{"states", result.dfa.num_states()},
                          {"edges", result.dfa.num_edges()},
                          {"empty_language", result.empty_language},
                          {"warnings", result.warnings},
                          {"clause_order", result.clause_order},
                          {"horizon", spec.horizon}};
      info["emptied_by"] = result.emptied_by ? nlohmann::json(*result.emptied_by) : nlohmann::json();
      *info_json = copy_string(info.dump());
    }
    *out = new dg_dfa{std::move(result.dfa)};
  });
}

dg_status dg_diagnose_json(const char* spec_json, size_t length, char** out_json) {
  return guarded([&] {
    require(spec_json, "spec_json");
    require(out_json, "out_json");
    const auto d = diagnose_unsatisfiable(spec_from_json(spec_json), length);
    nlohmann::json j{{"satisfiable", !d.has_value()}};
    j["clause"] = d ? nlohmann::json(d->clause) : nlohmann::json();
    j["message"] = d ? nlohmann::json(d->message) : nlohmann::json();
    *out_json = copy_string(j.dump());
  });
}

dg_status dg_check_json(const char* spec_json, const int32_t* tokens, size_t n, int* out_satisfied) {
  return guarded([&] {
    require(spec_json, "spec_json");
    require(out_satisfied, "out_satisfied");
    const auto spec = spec_from_json(spec_json);
    const auto seq = span_of(tokens, n);
    for (Token w : seq) {
      if (w < 0 || static_cast<std::size_t>(w) >= spec.alphabet.size()) throw InputError("token out of range");
    }
    *out_satisfied = oracle::naive_constraint_check(spec, seq) ? 1 : 0;
  });
}

dg_status dg_spec_horizon(const char* spec_json, size_t* out) {
  return guarded([&] {
    require(spec_json, "spec_json");
    require(out, "out");
    *out = spec_from_json(spec_json).horizon;
  });
}

dg_status dg_dfa_from_json(const char* json, dg_dfa** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new dg_dfa{dfa_from_json(json)};
  });
}

dg_status dg_dfa_to_json(const dg_dfa* dfa, char** out) {
  return guarded([&] {
    require(dfa, "dfa");
    require(out, "out");
    *out = copy_string(dfa_to_json(dfa->dfa));
  });
}

dg_status dg_dfa_to_dot(const dg_dfa* dfa, const char* const* token_names, char** out) {
  return guarded([&] {
    require(dfa, "dfa");
    require(out, "out");
    std::vector<std::string> names;
    if (token_names) {
      for (std::size_t w = 0; w < dfa->dfa.alphabet_size(); ++w) names.emplace_back(token_names[w] ? token_names[w] : "");
    }
    *out = copy_string(dfa_to_dot(dfa->dfa, token_names ? &names : nullptr));
  });
}

void dg_dfa_free(dg_dfa* dfa) { delete dfa; }
size_t dg_dfa_num_states(const dg_dfa* dfa) { return dfa ? dfa->dfa.num_states() : 0; }
size_t dg_dfa_num_edges(const dg_dfa* dfa) { return dfa ? dfa->dfa.num_edges() : 0; }
size_t dg_dfa_alphabet_size(const dg_dfa* dfa) { return dfa ? dfa->dfa.alphabet_size() : 0; }

dg_status dg_dfa_accepts(const dg_dfa* dfa, const int32_t* tokens, size_t n, int* out) {
  return guarded([&] {
    require(dfa, "dfa");
    require(out, "out");
    *out = accepts(dfa->dfa, span_of(tokens, n)) ? 1 : 0;
  });
}

dg_status dg_lm_from_hmm(const dg_hmm* hmm, dg_lm** out) {
  return guarded([&] {
    require(hmm, "hmm");
    require(out, "out");
    auto lm = std::make_unique<dg_lm>();
    lm->hmm = hmm->hmm;
    lm->lm = std::make_unique<HmmLm>(*lm->hmm);
    *out = lm.release();
  });
}

dg_status dg_lm_ngram(const dg_corpus* corpus, size_t vocab_size, size_t order, double add_k, dg_lm** out) {
  return guarded([&] {
    require(corpus, "corpus");
    require(out, "out");
    auto ngram = std::make_unique<NgramLm>(vocab_size, order, add_k);
    ngram->train(corpus->corpus);
    auto lm = std::make_unique<dg_lm>();
    lm->lm = std::move(ngram);
    *out = lm.release();
  });
}

dg_status dg_lm_callback(size_t vocab_size, dg_logits_fn fn, void* user_data, dg_lm** out) {
  return guarded([&] {
    require(reinterpret_cast<const void*>(fn), "fn");
    require(out, "out");
    if (vocab_size == 0) throw InputError("vocab_size must be positive");
    auto call = [fn, user_data, vocab_size](std::span<const Token> prefix, std::span<double> logits) {
      if (fn(user_data, prefix.data(), prefix.size(), logits.data(), vocab_size) != 0) {
        throw InputError("base LM callback reported failure");
      }
    };
    auto lm = std::make_unique<dg_lm>();
    lm->lm = std::make_unique<CallbackLm>(vocab_size, call);
    *out = lm.release();
  });
}

void dg_lm_free(dg_lm* lm) { delete lm; }

dg_status dg_lm_loglik(const dg_lm* lm, const int32_t* tokens, size_t n, const int32_t* context, size_t context_len,
                       double* out) {
  return guarded([&] {
    require(lm, "lm");
    require(out, "out");
    *out = lm->lm->loglik(span_of(tokens, n), span_of(context, context_len));
  });
}

void dg_generate_options_default(dg_generate_options* options) {
  if (!options) return;
  options->mode = DG_MODE_PROBABILISTIC;
  options->temperature = 0.7;
  options->temperature_on_product = 0;
  options->num_samples = 128;
  options->horizon = 32;
  options->seed = 0;
  options->num_threads = 1;
}

dg_status dg_generate(const dg_hmm* hmm, const dg_dfa* dfa, const dg_lm* lm, const dg_generate_options* options,
                      const int32_t* context, size_t context_len, dg_samples** out) {
  return guarded([&] {
    require(hmm, "hmm");
    require(dfa, "dfa");
    require(lm, "lm");
    require(options, "options");
    require(out, "out");
    DecodeOptions decode;
    decode.mode = options->mode == DG_MODE_LOGICAL ? DecodeMode::kLogicalMask : DecodeMode::kProbabilistic;
    decode.temperature = options->temperature;
    decode.temperature_on_product = options->temperature_on_product != 0;
    const auto t0 = std::chrono::steady_clock::now();
    const BackwardTable table = precompute_backward(*hmm->hmm, dfa->dfa, options->horizon);
    auto result = std::make_unique<dg_samples>();
    result->precompute_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    auto rr = sample_and_rerank(*hmm->hmm, dfa->dfa, table, *lm->lm, decode, options->num_samples, options->seed,
                                span_of(context, context_len), options->num_threads);
    result->samples = std::move(rr.samples);
    result->ranking = std::move(rr.ranking);
    result->length = options->horizon;
    *out = result.release();
  });
}

void dg_samples_free(dg_samples* samples) { delete samples; }
size_t dg_samples_count(const dg_samples* samples) { return samples ? samples->samples.size() : 0; }
size_t dg_samples_length(const dg_samples* samples) { return samples ? samples->length : 0; }
size_t dg_samples_ranked(const dg_samples* samples, size_t rank) {
  return samples && rank < samples->ranking.size() ? samples->ranking[rank] : 0;
}
const int32_t* dg_samples_tokens(const dg_samples* samples, size_t index) {
  if (!samples || index >= samples->samples.size()) return nullptr;
  return samples->samples[index].tokens.data();
}
double dg_samples_loglik(const dg_samples* samples, size_t index) {
  if (!samples || index >= samples->samples.size()) return 0.0;
  return samples->samples[index].lm_loglik;
}
double dg_samples_seconds(const dg_samples* samples, size_t index) {
  if (!samples || index >= samples->samples.size()) return 0.0;
  return samples->samples[index].seconds;
}
double dg_samples_precompute_seconds(const dg_samples* samples) { return samples ? samples->precompute_seconds : 0.0; }

dg_status dg_benchmark(size_t num_hidden, size_t vocab_size, size_t horizon, size_t repeats, uint64_t seed,
                       const size_t* num_states, size_t count, char** sizes_csv, char** positions_csv) {
  return guarded([&] {
    require(num_states, "num_states");
    if (count == 0) throw InputError("need at least one automaton size");
    BenchmarkConfig config{num_hidden, vocab_size, horizon, repeats, seed};
    Rng rng(seed);
    const Hmm hmm = Hmm::random(num_hidden, vocab_size, rng);
    const auto dfas = counter_family(vocab_size, std::vector<std::size_t>(num_states, num_states + count));
    const auto sizes = benchmark_sizes(hmm, dfas, config);
    const auto positions = benchmark_positions(hmm, dfas.back(), config);
    if (sizes_csv) *sizes_csv = copy_string(timing_csv(sizes));
    if (positions_csv) *positions_csv = copy_string(timing_csv(positions));
  });
}

}  // extern "C"
