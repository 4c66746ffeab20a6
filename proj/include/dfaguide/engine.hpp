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

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dfaguide/base_lm.hpp"
#include "dfaguide/dfa.hpp"
#include "dfaguide/hmm.hpp"

namespace dfaguide {

/// log p(sequence of n tokens is accepted | z_t = z, s_t = s) for
/// t = 1..n, where s_t is the automaton state after the t-th token.
///
/// Row 0 holds the same quantity before the first token is emitted:
/// log p(accepted | z_1 = z, s_0 = s). The total acceptance probability of
/// the model is therefore sum_z p(z_1 = z) exp(at(0, initial, z)).
class BackwardTable {
 public:
  BackwardTable(std::size_t horizon, std::size_t num_states, std::size_t num_hidden,
                std::uint64_t hmm_fingerprint, std::uint64_t dfa_fingerprint);

  std::size_t horizon() const { return horizon_; }
  std::size_t num_states() const { return num_states_; }
  std::size_t num_hidden() const { return num_hidden_; }
  std::uint64_t hmm_fingerprint() const { return hmm_fingerprint_; }
  std::uint64_t dfa_fingerprint() const { return dfa_fingerprint_; }

  double at(std::size_t t, StateId s, std::size_t z) const {
    return data_[(t * num_states_ + s) * num_hidden_ + z];
  }
  std::span<const double> row(std::size_t t, StateId s) const {
    return {data_.data() + (t * num_states_ + s) * num_hidden_, num_hidden_};
  }
  std::span<double> mutable_row(std::size_t t, StateId s) {
    return {data_.data() + (t * num_states_ + s) * num_hidden_, num_hidden_};
  }

  /// log of the total acceptance probability from the initial state.
  double log_acceptance(const Hmm& hmm, StateId initial) const;

 private:
  std::size_t horizon_, num_states_, num_hidden_;
  std::uint64_t hmm_fingerprint_, dfa_fingerprint_;
  std::vector<double> data_;
};

/// Fills every row of the table from t = n down to 0. When `row_seconds`
/// is given it receives the wall time of each row (index = t).
BackwardTable precompute_backward(const Hmm& hmm, const Dfa& dfa, std::size_t horizon,
                                  std::vector<double>* row_seconds = nullptr);

/// Per-edge emission masses sum_{w in edge} p(w | z), one row of h values
/// per edge set, in edge_sets(dfa) order.
struct EdgeMasses {
  std::vector<EdgeSet> edges;
  std::vector<std::size_t> first_edge;  // per source state, size k + 1
  std::vector<double> mass;             // edges x h
};
EdgeMasses compute_edge_masses(const Hmm& hmm, const Dfa& dfa);

enum class DecodeMode {
  kProbabilistic,
  /// Keep the base LM's relative probabilities and only drop tokens from
  /// which no accepted completion exists.
  kLogicalMask,
};

struct DecodeOptions {
  DecodeMode mode = DecodeMode::kProbabilistic;
  double temperature = 1.0;
  /// Apply the temperature to the guided product instead of the base LM
  /// factor alone.
  bool temperature_on_product = false;
};

/// Guidance factors below this are treated as zero.
inline constexpr double kLogFloor = -690.7755278982137;  // log(1e-300)

/// Incremental guided decoding over a fixed horizon.
class GenerationSession {
 public:
  /// `context` conditions the base LM only; the HMM and the automaton start
  /// fresh. The referenced objects must outlive the session.
  GenerationSession(const Hmm& hmm, const Dfa& dfa, const BackwardTable& table, const BaseLm& lm,
                    DecodeOptions options = {}, std::span<const Token> context = {});

  std::size_t position() const { return emitted_.size(); }
  std::size_t horizon() const { return table_.horizon(); }
  bool finished() const { return position() >= horizon(); }
  StateId dfa_state() const { return dfa_state_; }
  const std::vector<Token>& emitted() const { return emitted_; }
  /// log p(x_<=t) under the HMM for the emitted tokens (0 before any token).
  double log_evidence() const { return forward_.t == 0 ? 0.0 : forward_.log_evidence; }
  /// Empty before the first token.
  const std::vector<double>& log_alpha() const { return forward_.log_alpha; }

  /// log p(accepted, x_<t, x_t = w) for every candidate w.
  std::vector<double> constraint_marginals() const;
  double constraint_marginal(Token w) const;
  /// log p(accepted | x_<t, x_t = w); -inf when infeasible.
  std::vector<double> guidance() const;
  /// Guided next-token probabilities (sum to 1). Throws DeadEndError when no
  /// token has positive mass.
  std::vector<double> next_token_distribution() const;
  /// Same, from precomputed base LM logits.
  std::vector<double> next_token_distribution(std::span<const double> lm_logits) const;
  std::vector<double> lm_logits() const { return lm_state_->logits(); }

  void advance(Token w);

 private:
  struct Scores {
    std::vector<double> joint;     // log p(accepted, x_<t, x_t = w)
    std::vector<double> evidence;  // log p(x_<t, x_t = w)
  };
  Scores score_candidates() const;
  void check_active() const;

  const Hmm& hmm_;
  const Dfa& dfa_;
  const BackwardTable& table_;
  DecodeOptions options_;
  std::unique_ptr<LmState> lm_state_;
  StateId dfa_state_;
  std::vector<Token> emitted_;
  ForwardState forward_;
};

struct SampleResult {
  std::vector<Token> tokens;
  /// Base LM log-likelihood of the generated tokens given the context.
  double lm_loglik = 0.0;
  double seconds = 0.0;
};

/// Draws one sequence of table.horizon() tokens. Throws UnsatisfiableError
/// before emitting anything when no accepted sequence has positive
/// probability, and InternalError if the result is not accepted.
SampleResult sample_sequence(const Hmm& hmm, const Dfa& dfa, const BackwardTable& table, const BaseLm& lm,
                             const DecodeOptions& options, Rng& rng, std::span<const Token> context = {});

struct RerankResult {
  std::vector<SampleResult> samples;  // in draw order
  std::size_t best = 0;
  /// Indices of samples sorted by decreasing lm_loglik (stable).
  std::vector<std::size_t> ranking;
};

/// K independent draws, sample i using Rng::derive(seed, i), ranked by base
/// LM log-likelihood; ties go to the earlier draw.
RerankResult sample_and_rerank(const Hmm& hmm, const Dfa& dfa, const BackwardTable& table, const BaseLm& lm,
                               const DecodeOptions& options, std::size_t k, std::uint64_t seed,
                               std::span<const Token> context = {}, std::size_t threads = 1);

struct TimingRow {
  std::size_t dfa_states = 0;
  std::size_t dfa_edges = 0;
  /// Decode position, or -1 for an average over all positions.
  long position = -1;
  double mean_us_per_token = 0.0;
  double std_us = 0.0;
  double median_us = 0.0;
};

struct BenchmarkConfig {
  std::size_t num_hidden = 128;
  std::size_t vocab_size = 64;
  std::size_t horizon = 32;
  std::size_t repeats = 5;
  std::uint64_t seed = 7;
};

/// Per-token guidance cost (one backward row plus one decode step) for
/// each automaton, averaged over positions.
std::vector<TimingRow> benchmark_sizes(const Hmm& hmm, const std::vector<Dfa>& dfas, const BenchmarkConfig& config);
/// Per-position cost for a single automaton.
std::vector<TimingRow> benchmark_positions(const Hmm& hmm, const Dfa& dfa, const BenchmarkConfig& config);
std::string timing_csv(const std::vector<TimingRow>& rows);

/// Modular-counter automata with edge counts 2k for k in `num_states`,
/// accepting even counts.
std::vector<Dfa> counter_family(std::size_t vocab_size, const std::vector<std::size_t>& num_states);

}  // namespace dfaguide
