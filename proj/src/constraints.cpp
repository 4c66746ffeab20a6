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

#include "dfaguide/constraints.hpp"

#include <algorithm>
#include <limits>

#include "dfaguide/error.hpp"

namespace dfaguide {
namespace {

struct Clause {
  std::string path;
  Dfa dfa;
};

std::size_t sat_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

std::size_t sat_add(std::size_t a, std::size_t b) {
  return a > std::numeric_limits<std::size_t>::max() - b ? std::numeric_limits<std::size_t>::max() : a + b;
}

void check_phrase(const Phrase& p, const ConstraintSpec& spec, const std::string& path) {
  if (p.empty()) throw InputError(path + ": phrase is empty");
  for (Token w : p) {
    if (w < 0 || static_cast<std::size_t>(w) >= spec.alphabet.size()) {
      throw InputError(path + ": token " + std::to_string(w) + " outside vocabulary");
    }
  }
}

void check_window(const WordWindow& w, const std::string& path) {
  if (w.min < 1 || w.min > w.max) {
    throw InputError(path + ": word window needs 1 <= min <= max (got " + std::to_string(w.min) + ".." +
                     std::to_string(w.max) + ")");
  }
}

// Ordered segments as a chain of prefix-free pieces: each piece ends at the
// first occurrence of its segment after the previous piece.
Dfa build_ordered_chain(const ConstraintSpec& spec) {
  const auto& segs = spec.ordered_segments;
  const std::size_t sigma = spec.alphabet.size();
  std::vector<Dfa> pieces;
  pieces.push_back(terminate_on_accept(build_substring_dfa(segs[0].tokens, sigma)));
  for (std::size_t i = 1; i < segs.size(); ++i) {
    const auto& window = segs[i - 1].window_after;
    if (window) {
      pieces.push_back(build_gap_until_dfa(build_length_window_dfa(window->min, window->max, spec.alphabet),
                                           segs[i].tokens));
    } else {
      pieces.push_back(terminate_on_accept(build_substring_dfa(segs[i].tokens, sigma)));
    }
  }
  const auto& tail = segs.back().window_after;
  Dfa chain = tail ? build_length_window_dfa(tail->min, tail->max, spec.alphabet) : Dfa::accept_all(sigma);
  for (std::size_t i = pieces.size(); i-- > 0;) chain = concat_via_merge(pieces[i], chain);
  return chain;
}

std::vector<Clause> build_clauses(const ConstraintSpec& spec) {
  std::vector<Clause> out;
  const std::size_t sigma = spec.alphabet.size();
  for (std::size_t i = 0; i < spec.keyphrase_groups.size(); ++i) {
    out.push_back({"keyphrases[" + std::to_string(i) + "]", build_multi_pattern_dfa(spec.keyphrase_groups[i], sigma)});
  }
  if (!spec.ordered_segments.empty()) out.push_back({"ordered_segments", build_ordered_chain(spec)});
  if (spec.word_length) {
    out.push_back({"word_length", build_length_window_dfa(spec.word_length->min, spec.word_length->max, spec.alphabet)});
  }
  if (!spec.end_phrase.empty()) out.push_back({"end_phrase", build_end_with_dfa(spec.end_phrase, spec.alphabet)});
  for (std::size_t i = 0; i < spec.forbidden.size(); ++i) {
    out.push_back({"forbidden[" + std::to_string(i) + "]", prune_dead(complement(build_substring_dfa(spec.forbidden[i], sigma)))});
  }
  // Smallest first keeps intermediate products small; stable on ties so the
  // order only depends on the spec.
  std::stable_sort(out.begin(), out.end(), [](const Clause& a, const Clause& b) {
    return std::pair(a.dfa.num_states(), a.dfa.num_edges()) < std::pair(b.dfa.num_states(), b.dfa.num_edges());
  });
  return out;
}

// Wraps the intersection of the body clauses with the suffix and the
// padding rule.
Dfa assemble(const ConstraintSpec& spec, const Dfa& body) {
  Dfa d = spec.suffix.empty() ? body : build_suffix_dfa(body, spec.suffix, spec.alphabet);
  if (!spec.empty()) d = intersect(d, build_padding_dfa(spec.alphabet));
  return d;
}

}  // namespace

bool ConstraintSpec::empty() const {
  return keyphrase_groups.empty() && ordered_segments.empty() && !word_length && end_phrase.empty() &&
         suffix.empty() && forbidden.empty();
}

void ConstraintSpec::validate() const {
  alphabet.validate();
  if (horizon < 1) throw InputError("horizon must be at least 1");
  for (std::size_t g = 0; g < keyphrase_groups.size(); ++g) {
    const std::string path = "keyphrases[" + std::to_string(g) + "]";
    if (keyphrase_groups[g].empty()) throw InputError(path + ": group has no variants");
    for (std::size_t v = 0; v < keyphrase_groups[g].size(); ++v) {
      check_phrase(keyphrase_groups[g][v], *this, path + "[" + std::to_string(v) + "]");
    }
  }
  for (std::size_t i = 0; i < ordered_segments.size(); ++i) {
    const std::string path = "ordered_segments[" + std::to_string(i) + "]";
    check_phrase(ordered_segments[i].tokens, *this, path);
    if (ordered_segments[i].window_after) check_window(*ordered_segments[i].window_after, path + ".window_after");
  }
  if (word_length) check_window(*word_length, "word_length");
  if (!end_phrase.empty()) check_phrase(end_phrase, *this, "end_phrase");
  if (!suffix.empty()) {
    check_phrase(suffix, *this, "suffix");
    for (Token w : suffix) {
      if (!alphabet.is_content(w)) throw InputError("suffix: may not contain EOS or PAD");
    }
  }
  if (!end_phrase.empty()) {
    for (Token w : end_phrase) {
      if (!alphabet.is_content(w)) throw InputError("end_phrase: may not contain EOS or PAD");
    }
  }
  for (std::size_t i = 0; i < forbidden.size(); ++i) {
    check_phrase(forbidden[i], *this, "forbidden[" + std::to_string(i) + "]");
  }
}

CompileResult compile(const ConstraintSpec& spec) {
  spec.validate();
  const std::size_t sigma = spec.alphabet.size();
  auto clauses = build_clauses(spec);
  Dfa body = Dfa::accept_all(sigma);
  std::optional<std::string> emptied_by;
  std::vector<std::string> order;
  for (const auto& c : clauses) {
    body = intersect(body, c.dfa);
    order.push_back(c.path);
    if (!emptied_by && language_empty(body)) emptied_by = c.path;
  }
  if (!spec.suffix.empty()) order.push_back("suffix");
  Dfa final_dfa = assemble(spec, body);
  CompileResult result{final_dfa, {}, false, emptied_by, order};
  if (language_empty(final_dfa)) {
    result.empty_language = true;
    if (!result.emptied_by) result.emptied_by = spec.suffix.empty() ? "well_formed" : "suffix";
    result.warnings.push_back("constraint language is empty; first emptied by " + *result.emptied_by);
  }
  return result;
}

SizeEstimate estimate_size(const ConstraintSpec& spec) {
  spec.validate();
  SizeEstimate body{1, 1};
  std::size_t body_max_out = 1;
  for (const auto& c : build_clauses(spec)) {
    body.states = sat_mul(body.states, c.dfa.num_states());
    body.edges = sat_mul(body.edges, c.dfa.num_edges());
    std::size_t max_out = 0;
    for (StateId s = 0; s < c.dfa.num_states(); ++s) max_out = std::max(max_out, c.dfa.out_degree(s));
    body_max_out = sat_mul(body_max_out, max_out);
  }
  SizeEstimate out = body;
  if (!spec.suffix.empty()) {
    // (pending prefix, body state) pairs plus ended and dead; each pair lists
    // the phrase tokens, the body's exceptions, EOS and the default.
    const std::size_t L = spec.suffix.size();
    out.states = sat_add(sat_mul(L + 1, body.states), 2);
    out.edges = sat_add(sat_mul(sat_mul(L + 1, body.states), sat_add(sat_add(L, body_max_out), 2)), 2);
  }
  if (!spec.empty()) {
    const Dfa pad = build_padding_dfa(spec.alphabet);
    out.states = sat_mul(out.states, pad.num_states());
    out.edges = sat_mul(out.edges, pad.num_edges());
  }
  return out;
}

std::optional<Diagnosis> diagnose_unsatisfiable(const ConstraintSpec& spec, std::size_t length) {
  spec.validate();
  const std::size_t sigma = spec.alphabet.size();
  Dfa body = Dfa::accept_all(sigma);
  if (!accepts_some_length(assemble(spec, body), length)) {
    const std::string clause = spec.suffix.empty() ? "horizon" : "suffix";
    return Diagnosis{clause, "no sequence of length " + std::to_string(length) + " satisfies " + clause};
  }
  for (const auto& c : build_clauses(spec)) {
    body = intersect(body, c.dfa);
    if (!accepts_some_length(assemble(spec, body), length)) {
      std::string msg = language_empty(body) ? "constraint language becomes empty at clause " + c.path
                                             : "no sequence of length " + std::to_string(length) +
                                                   " satisfies the constraints once " + c.path + " is added";
      return Diagnosis{c.path, msg};
    }
  }
  return std::nullopt;
}

}  // namespace dfaguide
