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
#include <span>
#include <utility>
#include <vector>

#include "dfaguide/constraints.hpp"
#include "dfaguide/dfa.hpp"
#include "dfaguide/hmm.hpp"

namespace dfaguide::oracle {

// Brute-force references for tests. Nothing here calls the forward
// algorithm, the backward table, the automaton walker or the builders: HMM
// probabilities are recomputed from the raw parameters and automata are
// walked by linear scans of their transition lists.

struct EnumerationBudget {
  std::size_t max_vocab = 5;
  std::size_t max_length = 8;
  std::size_t max_hidden = 10;
  double max_sequences = 1e7;

  /// Throws BudgetError when enumerating vocab^length sequences of an HMM
  /// with `hidden` states is over budget.
  void check(std::size_t vocab, std::size_t length, std::size_t hidden) const;
};

/// Linear-space p(x_1..x_n) by a plain forward pass.
double sequence_probability(const Hmm& hmm, std::span<const Token> tokens);

/// Membership by walking the transition lists.
bool dfa_accepts(const Dfa& dfa, std::span<const Token> tokens);

/// sum of p(x) over accepted sequences of length n.
double acceptance_probability(const Hmm& hmm, const Dfa& dfa, std::size_t n, const EnumerationBudget& budget = {});

/// p(accepted | z_t = z, s_t = s) for every z, where t tokens have been
/// emitted (s = automaton state after them). For t = 0 the condition is on
/// z_1 before it emits the first token.
std::vector<double> future_acceptance(const Hmm& hmm, const Dfa& dfa, std::size_t n, std::size_t t, StateId s,
                                      const EnumerationBudget& budget = {});

/// p(accepted, x_<t = prefix, x_t = w) for every w.
std::vector<double> step_joint(const Hmm& hmm, const Dfa& dfa, std::span<const Token> prefix, std::size_t n,
                               const EnumerationBudget& budget = {});

/// p(accepted | x_<t = prefix, x_t = w); 0 where p(prefix, w) = 0.
std::vector<double> step_conditional(const Hmm& hmm, const Dfa& dfa, std::span<const Token> prefix, std::size_t n,
                                     const EnumerationBudget& budget = {});

/// p_hmm(x_t = w | x_<t = prefix, accepted).
std::vector<double> guided_next(const Hmm& hmm, const Dfa& dfa, std::span<const Token> prefix, std::size_t n,
                                const EnumerationBudget& budget = {});

/// Every accepted sequence of length n with positive probability, paired
/// with p(x | accepted), in lexicographic order.
std::vector<std::pair<std::vector<Token>, double>> conditional_distribution(const Hmm& hmm, const Dfa& dfa,
                                                                            std::size_t n,
                                                                            const EnumerationBudget& budget = {});

/// Words before the first EOS: a word starts at a word-start token, or at a
/// continuation token outside a word; boundary and PAD tokens end a word.
std::size_t naive_word_count(const Alphabet& alphabet, std::span<const Token> tokens);

/// Clause-by-clause check of a spec by direct search and counting.
bool naive_constraint_check(const ConstraintSpec& spec, std::span<const Token> tokens);

}  // namespace dfaguide::oracle
