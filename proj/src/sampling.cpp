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

#include <algorithm>
#include <chrono>
#include <exception>
#include <numeric>
#include <thread>

#include "dfaguide/engine.hpp"
#include "dfaguide/error.hpp"

namespace dfaguide {

SampleResult sample_sequence(const Hmm& hmm, const Dfa& dfa, const BackwardTable& table, const BaseLm& lm,
                             const DecodeOptions& options, Rng& rng, std::span<const Token> context) {
  const auto start = std::chrono::steady_clock::now();
  GenerationSession session(hmm, dfa, table, lm, options, context);
  if (table.log_acceptance(hmm, dfa.initial()) == kNegInf) {
    throw UnsatisfiableError("no sequence of " + std::to_string(table.horizon()) +
                             " tokens satisfies the constraint with positive probability under the model");
  }
  SampleResult out;
  while (!session.finished()) {
    auto logits = session.lm_logits();
    const auto dist = session.next_token_distribution(logits);
    const auto w = static_cast<Token>(rng.categorical(dist));
    log_normalize(logits);
    out.lm_loglik += logits[static_cast<std::size_t>(w)];
    session.advance(w);
  }
  out.tokens = session.emitted();
  if (!dfa.is_accepting(session.dfa_state())) {
    throw InternalError("guided sample ended outside the accepted language");
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RerankResult sample_and_rerank(const Hmm& hmm, const Dfa& dfa, const BackwardTable& table, const BaseLm& lm,
                               const DecodeOptions& options, std::size_t k, std::uint64_t seed,
                               std::span<const Token> context, std::size_t threads) {
  if (k == 0) throw InputError("number of samples must be at least 1");
  if (table.hmm_fingerprint() != hmm.fingerprint() || table.dfa_fingerprint() != dfa.fingerprint()) {
    throw InputError("backward table was built for a different HMM or automaton");
  }
  RerankResult result;
  result.samples.resize(k);
  std::vector<std::exception_ptr> errors(k);
  auto draw = [&](std::size_t i) {
    try {
      Rng rng = Rng::derive(seed, i);
      result.samples[i] = sample_sequence(hmm, dfa, table, lm, options, rng, context);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, k);
  if (threads == 1) {
    for (std::size_t i = 0; i < k; ++i) draw(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < k; i += threads) draw(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  result.ranking.resize(k);
  std::iota(result.ranking.begin(), result.ranking.end(), 0);
  std::stable_sort(result.ranking.begin(), result.ranking.end(), [&](std::size_t a, std::size_t b) {
    return result.samples[a].lm_loglik > result.samples[b].lm_loglik;
  });
  result.best = result.ranking.front();
  return result;
}

}  // namespace dfaguide
