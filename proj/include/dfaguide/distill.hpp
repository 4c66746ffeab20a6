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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dfaguide/base_lm.hpp"
#include "dfaguide/hmm.hpp"

namespace dfaguide {

struct FitReport {
  std::size_t num_hidden = 0;
  std::size_t vocab_size = 0;
  std::size_t train_sequences = 0;
  std::size_t heldout_sequences = 0;
  std::size_t sequence_length = 0;
  /// Per-token log-likelihoods.
  double train_loglik = 0.0;
  double heldout_loglik_hmm = 0.0;
  std::optional<double> heldout_loglik_lm;
  /// heldout_loglik_lm - heldout_loglik_hmm: a sample estimate of the
  /// per-token KL divergence from the base LM to the HMM.
  std::optional<double> gap;
  std::size_t best_restart = 0;
  std::vector<double> restart_heldout;
  std::vector<double> loglik_trace;
  std::size_t iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
};

struct DistillResult {
  Hmm hmm;
  FitReport report;
};

struct DistillConfig {
  std::size_t num_sequences = 5000;
  std::size_t length = 16;
  double heldout_fraction = 0.2;
  std::size_t restarts = 3;
  EmConfig em;
  std::uint64_t seed = 0;
  /// Set both to sample padded corpora (content EOS PAD*).
  Token eos = -1;
  Token pad = -1;
};

/// Fits `restarts` models on `train` (restart r seeded from
/// Rng::derive(config.seed, r)) and keeps the best on `heldout`. When `lm`
/// is given the report also carries its held-out log-likelihood.
DistillResult fit_and_report(const Corpus& train, const Corpus& heldout, std::size_t vocab_size,
                             const EmConfig& em, std::size_t restarts, const BaseLm* lm = nullptr,
                             Token eos = -1, Token pad = -1);

/// Samples a corpus from `lm`, splits off the held-out tail and fits.
DistillResult distill(const BaseLm& lm, const DistillConfig& config);

/// Splits off the last round(fraction * size) sequences (at least one of
/// each side when size >= 2).
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double heldout_fraction);

/// Per-token log-likelihood of `corpus` under `lm`, using the same
/// conventions as sample_corpus: PAD is excluded before EOS and costs
/// nothing after it.
double corpus_lm_loglik(const BaseLm& lm, const Corpus& corpus, Token eos = -1, Token pad = -1);

std::string report_to_json(const FitReport& report);

/// One sequence per line, space-separated token ids; every line must have
/// the same length. Errors name the 1-based line.
Corpus read_corpus(std::istream& in, std::size_t vocab_size = 0);
Corpus read_corpus_file(const std::string& path, std::size_t vocab_size = 0);
void write_corpus(std::ostream& out, const Corpus& corpus);

}  // namespace dfaguide
