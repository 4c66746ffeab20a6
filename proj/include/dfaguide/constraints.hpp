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
#include <optional>
#include <string>
#include <vector>

#include "dfaguide/dfa.hpp"

namespace dfaguide {

using Phrase = std::vector<Token>;

struct WordWindow {
  std::size_t min = 1;
  std::size_t max = 1;
  bool operator==(const WordWindow&) const = default;
};

struct OrderedSegment {
  Phrase tokens;
  /// Word count allowed between this segment and the next one (or the end
  /// of the content for the last segment). Unset means unconstrained.
  std::optional<WordWindow> window_after;
  bool operator==(const OrderedSegment&) const = default;
};

/// Declarative token-level constraint.
///
/// Without `suffix`, every clause applies to the whole sequence. With a
/// suffix, the content before EOS must be g + suffix and the other clauses
/// are evaluated on g alone (insertion: g is what the model writes).
struct ConstraintSpec {
  Alphabet alphabet;
  /// Every group must be satisfied by at least one of its variants.
  std::vector<std::vector<Phrase>> keyphrase_groups;
  /// Must occur in this order; each match is the first occurrence after the
  /// previous one.
  std::vector<OrderedSegment> ordered_segments;
  std::optional<WordWindow> word_length;
  Phrase end_phrase;
  Phrase suffix;
  std::vector<Phrase> forbidden;
  std::size_t horizon = 32;

  /// No clause at all (suffix included).
  bool empty() const;
  /// Throws InputError naming the offending clause.
  void validate() const;

  bool operator==(const ConstraintSpec&) const = default;
};

struct SizeEstimate {
  std::size_t states = 0;
  std::size_t edges = 0;
};

struct CompileResult {
  Dfa dfa;
  std::vector<std::string> warnings;
  bool empty_language = false;
  /// Clause path (e.g. "keyphrases[1]") after which the language became empty.
  std::optional<std::string> emptied_by;
  /// Clause paths in the order they were intersected.
  std::vector<std::string> clause_order;
};

CompileResult compile(const ConstraintSpec& spec);

/// Product-of-parts upper bounds on the compiled automaton before pruning.
SizeEstimate estimate_size(const ConstraintSpec& spec);

struct Diagnosis {
  std::string clause;
  std::string message;
};

/// First clause (in compile order) after which no accepted sequence of
/// exactly `length` tokens remains; nullopt when the spec is satisfiable at
/// that length.
std::optional<Diagnosis> diagnose_unsatisfiable(const ConstraintSpec& spec, std::size_t length);

// Token-level JSON:
// {"version": 1,
//  "alphabet": {"size": V, "eos": 0, "pad": 1, "default_class": "word_start",
//               "word_start": [...], "continuation": [...], "boundary": [...]},
//  "keyphrases": [[[ids...], ...], ...],
//  "ordered_segments": [{"tokens": [...], "window_after": {"min": a, "max": b}}],
//  "word_length": {"min": a, "max": b}, "end_phrase": [...], "suffix": [...],
//  "forbidden": [[...], ...], "horizon": n}
ConstraintSpec spec_from_json(const std::string& text);
std::string spec_to_json(const ConstraintSpec& spec);
/// Stable key for caching: equal specs give equal keys.
std::string canonical_key(const ConstraintSpec& spec);

}  // namespace dfaguide
