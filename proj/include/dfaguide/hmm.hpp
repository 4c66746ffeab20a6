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
#include <span>
#include <string>
#include <vector>

#include "dfaguide/logmath.hpp"
#include "dfaguide/rng.hpp"

namespace dfaguide {

/// Discrete hidden Markov model over a token vocabulary.
///
/// Parameters are stored in log space (true zeros are -inf). Linear-space
/// copies are cached at construction for the dense kernels; the object is
/// immutable afterwards and may be shared across threads.
class Hmm {
 public:
  /// Validates shapes and row-stochasticity (1e-9 absolute) and throws
  /// InputError on violation.
  Hmm(std::size_t num_hidden, std::size_t vocab_size, std::vector<double> log_initial,
      std::vector<double> log_transition, std::vector<double> log_emission);

  /// Builds from linear-space probabilities; rows are renormalized.
  static Hmm from_probabilities(std::size_t num_hidden, std::size_t vocab_size,
                                std::span<const double> initial,
                                std::span<const double> transition,
                                std::span<const double> emission);
  static Hmm uniform(std::size_t num_hidden, std::size_t vocab_size);
  /// Every distribution drawn from a symmetric Dirichlet(1).
  static Hmm random(std::size_t num_hidden, std::size_t vocab_size, Rng& rng);

  std::size_t num_hidden() const { return num_hidden_; }
  std::size_t vocab_size() const { return vocab_size_; }

  std::span<const double> log_initial() const { return log_initial_; }
  std::span<const double> log_transition_row(std::size_t from) const {
    return {log_transition_.data() + from * num_hidden_, num_hidden_};
  }
  std::span<const double> log_emission_row(std::size_t z) const {
    return {log_emission_.data() + z * vocab_size_, vocab_size_};
  }
  double log_transition(std::size_t from, std::size_t to) const {
    return log_transition_[from * num_hidden_ + to];
  }
  double log_emission(std::size_t z, Token w) const {
    return log_emission_[z * vocab_size_ + static_cast<std::size_t>(w)];
  }

  // Linear caches.
  std::span<const double> initial() const { return initial_; }
  /// Row-major h x h, row = source state.
  std::span<const double> transition() const { return transition_; }
  /// p(w | z) for all z, contiguous per token (vocab x h layout).
  std::span<const double> emission_for_token(Token w) const {
    return {emission_by_token_.data() + static_cast<std::size_t>(w) * num_hidden_, num_hidden_};
  }
  /// sum_w p(w | z); 1 up to rounding.
  std::span<const double> emission_totals() const { return emission_totals_; }

  /// FNV-1a over the canonical binary encoding.
  std::uint64_t fingerprint() const;

  void check_token(Token w) const;

 private:
  void build_caches();

  std::size_t num_hidden_;
  std::size_t vocab_size_;
  std::vector<double> log_initial_;
  std::vector<double> log_transition_;
  std::vector<double> log_emission_;

  std::vector<double> initial_;
  std::vector<double> transition_;
  std::vector<double> emission_by_token_;
  std::vector<double> emission_totals_;
};

/// Forward message after consuming t tokens: log p(x_<=t, z_t).
struct ForwardState {
  std::size_t t = 0;
  std::vector<double> log_alpha;
  double log_evidence = kNegInf;

  /// The consumed tokens have zero probability under the model.
  bool degenerate() const { return log_evidence == kNegInf; }
};

ForwardState forward_init(const Hmm& hmm, Token token);
ForwardState forward_step(const Hmm& hmm, const ForwardState& state, Token token);

/// log sum_{z'} exp(log_alpha[z']) p(z | z'), i.e. log p(x_<=t, z_{t+1}).
std::vector<double> forward_predict(const Hmm& hmm, std::span<const double> log_alpha);

double sequence_loglik(const Hmm& hmm, std::span<const Token> tokens);

std::vector<Token> sample_unconditional(const Hmm& hmm, std::size_t n, Rng& rng);

/// Fixed-length token corpus stored flat.
struct Corpus {
  std::size_t length = 0;
  std::vector<Token> tokens;

  std::size_t size() const { return length == 0 ? 0 : tokens.size() / length; }
  bool empty() const { return size() == 0; }
  std::span<const Token> sequence(std::size_t i) const {
    return {tokens.data() + i * length, length};
  }
  void append(std::span<const Token> seq);
};

struct EmConfig {
  std::size_t num_hidden = 8;
  std::size_t max_iters = 50;
  /// Stop once the per-token log-likelihood improves by less than this.
  double tol = 1e-6;
  /// Add-epsilon on every re-estimated row; 0 disables.
  double smoothing = 1e-10;
  std::uint64_t seed = 0;
  /// 0 picks hardware concurrency. Results do not depend on this value.
  std::size_t num_threads = 0;
};

struct EmResult {
  Hmm hmm;
  /// Per-token training log-likelihood, one entry per set of parameters
  /// visited (initial guess first, final model last).
  std::vector<double> loglik_trace;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Baum-Welch on a fixed-length corpus starting from Dirichlet(1) rows.
EmResult fit_baum_welch(const Corpus& corpus, std::size_t vocab_size, const EmConfig& config);

/// Per-token average log-likelihood of a corpus.
double corpus_loglik_per_token(const Hmm& hmm, const Corpus& corpus);

// Serialization: binary by default, JSON when the path ends in ".json".
void save_hmm(const Hmm& hmm, const std::string& path);
Hmm load_hmm(const std::string& path);
std::string hmm_to_json(const Hmm& hmm);
Hmm hmm_from_json(const std::string& text);
std::string hmm_to_binary(const Hmm& hmm);
Hmm hmm_from_binary(const std::string& bytes);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace dfaguide
