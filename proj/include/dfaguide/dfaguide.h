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

/* C interface to the dfaguide constrained-decoding library.
 *
 * All objects are opaque handles created by a dg_*_create/load/... call and
 * released with the matching dg_*_free. Functions return a dg_status; on
 * failure dg_last_error() describes the problem (thread-local, valid until
 * the next call on the same thread). Strings returned through char** out
 * parameters are owned by the caller and released with dg_string_free.
 * Token ids are int32_t. */
#ifndef DFAGUIDE_H_
#define DFAGUIDE_H_

#include <stddef.h>
#include <stdint.h>

#if defined(DFAGUIDE_BUILDING_LIBRARY)
#define DG_API __attribute__((visibility("default")))
#else
#define DG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dg_status {
  DG_OK = 0,
  DG_ERR_INPUT = 2,
  DG_ERR_UNSATISFIABLE = 3,
  DG_ERR_INTERNAL = 4,
  DG_ERR_IO = 5,
  DG_ERR_STRUCTURE = 6,
  DG_ERR_DEAD_END = 7,
  DG_ERR_BUDGET = 8,
  DG_ERR_SESSION_EXHAUSTED = 9
} dg_status;

typedef struct dg_hmm dg_hmm;
typedef struct dg_dfa dg_dfa;
typedef struct dg_lm dg_lm;
typedef struct dg_corpus dg_corpus;
typedef struct dg_samples dg_samples;

DG_API const char* dg_version(void);
DG_API const char* dg_last_error(void);
DG_API void dg_string_free(char* s);

/* ---- HMM ---------------------------------------------------------------- */

/* Binary format, or JSON when the path ends in ".json". */
DG_API dg_status dg_hmm_load(const char* path, dg_hmm** out);
DG_API dg_status dg_hmm_save(const dg_hmm* hmm, const char* path);
DG_API dg_status dg_hmm_random(size_t num_hidden, size_t vocab_size, uint64_t seed, dg_hmm** out);
DG_API void dg_hmm_free(dg_hmm* hmm);
DG_API size_t dg_hmm_num_hidden(const dg_hmm* hmm);
DG_API size_t dg_hmm_vocab_size(const dg_hmm* hmm);
DG_API uint64_t dg_hmm_fingerprint(const dg_hmm* hmm);
DG_API dg_status dg_hmm_sequence_loglik(const dg_hmm* hmm, const int32_t* tokens, size_t n, double* out);
/* Unconditional samples: writes num * length tokens into out. */
DG_API dg_status dg_hmm_sample(const dg_hmm* hmm, size_t num, size_t length, uint64_t seed, int32_t* out);

/* ---- Corpora ------------------------------------------------------------- */

/* One sequence per line, space-separated ids, all the same length. A
 * vocab_size of 0 skips the range check. */
DG_API dg_status dg_corpus_read(const char* path, size_t vocab_size, dg_corpus** out);
DG_API dg_status dg_corpus_from_tokens(const int32_t* tokens, size_t num, size_t length, dg_corpus** out);
DG_API dg_status dg_corpus_write(const dg_corpus* corpus, const char* path);
DG_API void dg_corpus_free(dg_corpus* corpus);
DG_API size_t dg_corpus_size(const dg_corpus* corpus);
DG_API size_t dg_corpus_length(const dg_corpus* corpus);
DG_API const int32_t* dg_corpus_sequence(const dg_corpus* corpus, size_t index);

/* ---- Training -------------------------------------------------------------- */

typedef struct dg_train_options {
  size_t num_hidden;
  size_t max_iters;
  double tol;
  double smoothing;
  uint64_t seed;
  size_t num_threads; /* 0 = hardware concurrency; results do not depend on it */
  size_t restarts;
  double heldout_fraction;
} dg_train_options;

DG_API void dg_train_options_default(dg_train_options* options);
/* Splits off a held-out tail, fits with restarts, keeps the best model.
 * report_json may be NULL. */
DG_API dg_status dg_train(const dg_corpus* corpus, size_t vocab_size, const dg_train_options* options,
                          dg_hmm** out, char** report_json);

/* Samples num_sequences sequences of `length` tokens from lm (everything
 * after the first EOS replaced by PAD when both are >= 0), fits with
 * restarts and reports the held-out gap to lm. */
DG_API dg_status dg_distill(const dg_lm* lm, size_t num_sequences, size_t length, int32_t eos, int32_t pad,
                            const dg_train_options* options, dg_hmm** out, char** report_json);

/* ---- Constraints and automata ------------------------------------------ */

/* Compiles a token-level constraint spec. info_json (may be NULL) receives
 * {"states", "edges", "empty_language", "emptied_by", "warnings",
 * "clause_order", "horizon"}. */
DG_API dg_status dg_compile_json(const char* spec_json, dg_dfa** out, char** info_json);
/* {"satisfiable": bool, "clause": str|null, "message": str|null} for
 * sequences of exactly `length` tokens. */
DG_API dg_status dg_diagnose_json(const char* spec_json, size_t length, char** out_json);
/* Direct clause-by-clause check, independent of the automata. */
DG_API dg_status dg_check_json(const char* spec_json, const int32_t* tokens, size_t n, int* out_satisfied);
DG_API dg_status dg_spec_horizon(const char* spec_json, size_t* out);

DG_API dg_status dg_dfa_from_json(const char* json, dg_dfa** out);
DG_API dg_status dg_dfa_to_json(const dg_dfa* dfa, char** out);
/* token_names may be NULL; otherwise it holds alphabet_size strings. */
DG_API dg_status dg_dfa_to_dot(const dg_dfa* dfa, const char* const* token_names, char** out);
DG_API void dg_dfa_free(dg_dfa* dfa);
DG_API size_t dg_dfa_num_states(const dg_dfa* dfa);
DG_API size_t dg_dfa_num_edges(const dg_dfa* dfa);
DG_API size_t dg_dfa_alphabet_size(const dg_dfa* dfa);
DG_API dg_status dg_dfa_accepts(const dg_dfa* dfa, const int32_t* tokens, size_t n, int* out);

/* ---- Base language models ------------------------------------------------ */

/* Fills vocab_size scores for the next token after prefix[0..len). Returns
 * 0 on success. */
typedef int (*dg_logits_fn)(void* user_data, const int32_t* prefix, size_t len, double* out, size_t vocab_size);

DG_API dg_status dg_lm_from_hmm(const dg_hmm* hmm, dg_lm** out);
DG_API dg_status dg_lm_ngram(const dg_corpus* corpus, size_t vocab_size, size_t order, double add_k, dg_lm** out);
DG_API dg_status dg_lm_callback(size_t vocab_size, dg_logits_fn fn, void* user_data, dg_lm** out);
DG_API void dg_lm_free(dg_lm* lm);
DG_API dg_status dg_lm_loglik(const dg_lm* lm, const int32_t* tokens, size_t n, const int32_t* context,
                              size_t context_len, double* out);

/* ---- Guided generation ---------------------------------------------------- */

typedef enum dg_mode { DG_MODE_PROBABILISTIC = 0, DG_MODE_LOGICAL = 1 } dg_mode;

typedef struct dg_generate_options {
  dg_mode mode;
  double temperature;
  int temperature_on_product;
  size_t num_samples; /* K */
  size_t horizon;     /* n */
  uint64_t seed;
  size_t num_threads;
} dg_generate_options;

DG_API void dg_generate_options_default(dg_generate_options* options);
/* Draws K guided samples and ranks them by base LM log-likelihood. The
 * context conditions the base LM only. Returns DG_ERR_UNSATISFIABLE before
 * sampling when no accepted sequence has positive probability. */
DG_API dg_status dg_generate(const dg_hmm* hmm, const dg_dfa* dfa, const dg_lm* lm, const dg_generate_options* options,
                             const int32_t* context, size_t context_len, dg_samples** out);
DG_API void dg_samples_free(dg_samples* samples);
DG_API size_t dg_samples_count(const dg_samples* samples);
DG_API size_t dg_samples_length(const dg_samples* samples);
/* rank 0 is the best sample. */
DG_API size_t dg_samples_ranked(const dg_samples* samples, size_t rank);
DG_API const int32_t* dg_samples_tokens(const dg_samples* samples, size_t index);
DG_API double dg_samples_loglik(const dg_samples* samples, size_t index);
DG_API double dg_samples_seconds(const dg_samples* samples, size_t index);
/* Wall time of the backward table. */
DG_API double dg_samples_precompute_seconds(const dg_samples* samples);

/* ---- Benchmark -------------------------------------------------------------- */

/* Times per-token guidance on modular-counter automata with the given
 * state counts (edges = 2 * states) and per position on the largest one.
 * Both outputs are CSV with columns
 * dfa_states,dfa_edges,position,mean_us_per_token,std,median_us; position
 * is "all" for averages over positions. */
DG_API dg_status dg_benchmark(size_t num_hidden, size_t vocab_size, size_t horizon, size_t repeats, uint64_t seed,
                              const size_t* num_states, size_t count, char** sizes_csv, char** positions_csv);

#ifdef __cplusplus
}
#endif

#endif /* DFAGUIDE_H_ */
