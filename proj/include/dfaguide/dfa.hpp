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

namespace dfaguide {

using StateId = std::uint32_t;

struct Transition {
  Token token;
  StateId dest;
  bool operator==(const Transition&) const = default;
};

/// Outgoing transitions of one state: a handful of listed tokens plus a
/// default destination for every other token of the alphabet.
struct DfaState {
  StateId default_dest = 0;
  /// Sorted by token; never targets default_dest (canonical form).
  std::vector<Transition> exceptions;
  bool operator==(const DfaState&) const = default;
};

/// Total deterministic automaton over tokens [0, alphabet_size).
///
/// The constructor canonicalizes exception lists and validates every id,
/// so any Dfa value is total and deterministic.
class Dfa {
 public:
  Dfa(std::size_t alphabet_size, std::vector<DfaState> states, StateId initial,
      std::vector<bool> accepting);

  static Dfa accept_all(std::size_t alphabet_size);
  static Dfa reject_all(std::size_t alphabet_size);
  /// Accepts only the empty string.
  static Dfa empty_string(std::size_t alphabet_size);

  std::size_t alphabet_size() const { return alphabet_size_; }
  std::size_t num_states() const { return states_.size(); }
  StateId initial() const { return initial_; }
  bool is_accepting(StateId s) const { return accepting_[s]; }
  const std::vector<bool>& accepting() const { return accepting_; }
  const DfaState& state(StateId s) const { return states_[s]; }
  const std::vector<DfaState>& states() const { return states_; }

  StateId next(StateId s, Token w) const;
  StateId run(std::span<const Token> tokens) const { return run_from(initial_, tokens); }
  StateId run_from(StateId s, std::span<const Token> tokens) const;

  /// Non-accepting and every token loops back to itself.
  bool is_dead(StateId s) const;
  /// Number of edge sets (distinct (source, dest) pairs with a non-empty label).
  std::size_t num_edges() const;
  std::size_t out_degree(StateId s) const;

  std::uint64_t fingerprint() const;

  bool operator==(const Dfa&) const = default;

 private:
  std::size_t alphabet_size_;
  std::vector<DfaState> states_;
  StateId initial_;
  std::vector<bool> accepting_;
};

/// Tokens moving `source` to `dest`. When `is_default` is set the set is
/// the alphabet minus `tokens`; otherwise it is exactly `tokens`.
struct EdgeSet {
  StateId source;
  StateId dest;
  bool is_default;
  std::vector<Token> tokens;

  bool contains(Token w) const;
  std::size_t size(std::size_t alphabet_size) const;
};

std::vector<EdgeSet> edge_sets(const Dfa& dfa, StateId source);
std::vector<EdgeSet> edge_sets(const Dfa& dfa);

bool accepts(const Dfa& dfa, std::span<const Token> tokens);

// ---------------------------------------------------------------------------
// Algebra. Product constructions number states in BFS discovery order from
// the initial pair, so equal inputs give structurally equal outputs.

Dfa intersect(const Dfa& a, const Dfa& b);
Dfa union_of(const Dfa& a, const Dfa& b);
Dfa complement(const Dfa& dfa);

/// Concatenation by merging the accept states of `first` with the initial
/// state of `second`. Requires every transition out of an accept state of
/// `first` to enter a dead state; throws StructureError otherwise.
Dfa concat_via_merge(const Dfa& first, const Dfa& second);

/// Drops states unreachable from the initial state, collapses every state
/// that cannot reach an accept state into a single dead state, and
/// renumbers in BFS order.
Dfa prune_dead(const Dfa& dfa);

/// Redirects every transition out of an accept state to a dead state, which
/// keeps only the shortest accepted prefix of each string (prefix-free form
/// required by concat_via_merge).
Dfa terminate_on_accept(const Dfa& dfa);

/// Whether some accepted string has exactly `length` tokens.
bool accepts_some_length(const Dfa& dfa, std::size_t length);
bool language_empty(const Dfa& dfa);

// ---------------------------------------------------------------------------
// Token classes used by the word-counting builders.

enum class TokenClass : std::uint8_t {
  kWordStart,     // always opens a new word (e.g. a whole word, or " snow")
  kContinuation,  // extends the current word, or opens one after a boundary
  kBoundary,      // whitespace or punctuation; closes the current word
  kEos,
  kPad,
};

struct Alphabet {
  std::vector<TokenClass> classes;
  Token eos = 0;
  Token pad = 1;

  std::size_t size() const { return classes.size(); }
  TokenClass of(Token w) const { return classes[static_cast<std::size_t>(w)]; }
  bool is_content(Token w) const {
    const TokenClass c = of(w);
    return c != TokenClass::kEos && c != TokenClass::kPad;
  }

  /// Every non-special token gets `content_class`.
  static Alphabet make(std::size_t size, Token eos, Token pad,
                       TokenClass content_class = TokenClass::kWordStart);
  void validate() const;

  bool operator==(const Alphabet&) const = default;
};

// ---------------------------------------------------------------------------
// Builders.

/// Knuth-Morris-Pratt automaton: accepts strings containing `pattern`.
/// pattern.size() + 1 states; the full-match state is absorbing.
Dfa build_substring_dfa(std::span<const Token> pattern, std::size_t alphabet_size);

/// Aho-Corasick automaton: accepts strings containing at least one pattern.
/// Every pattern-completing trie node is merged into one absorbing accept.
Dfa build_multi_pattern_dfa(const std::vector<std::vector<Token>>& patterns, std::size_t alphabet_size);

/// Accepts when the number of words before the first EOS (or the end of the
/// string) lies in [min_words, max_words]. Tokens after EOS are ignored.
Dfa build_length_window_dfa(std::size_t min_words, std::size_t max_words, const Alphabet& alphabet);

/// Accepts when the content (before EOS) ends with `phrase`.
Dfa build_end_with_dfa(std::span<const Token> phrase, const Alphabet& alphabet);

/// Accepts content of the form g + phrase with g accepted by `body`, followed
/// by EOS and anything (or by the end of the string). `body` is evaluated on
/// g alone.
Dfa build_suffix_dfa(const Dfa& body, std::span<const Token> phrase, const Alphabet& alphabet);

/// Accepts strings g + pattern where pattern occurs in g + pattern only at the
/// end and `body` accepts g. Accept states lead only to a dead state, so the
/// result can be the left operand of concat_via_merge.
Dfa build_gap_until_dfa(const Dfa& body, std::span<const Token> pattern);

/// content* (EOS PAD*)?  where content excludes EOS and PAD.
Dfa build_padding_dfa(const Alphabet& alphabet);

/// k states counting occurrences of `token` modulo k; accepts count = 0.
/// Exactly two edge sets per state, used as a scaling benchmark family.
Dfa build_modular_counter_dfa(std::size_t alphabet_size, Token token, std::size_t k);

// ---------------------------------------------------------------------------
// Serialization.

std::string dfa_to_json(const Dfa& dfa);
Dfa dfa_from_json(const std::string& text);
/// Graphviz rendering; edges carry their token sets, default edges print as
/// "* - {..}".
std::string dfa_to_dot(const Dfa& dfa, const std::vector<std::string>* token_names = nullptr);

}  // namespace dfaguide
