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

#include "dfaguide/oracle.hpp"

#include <cmath>
#include <functional>

#include "dfaguide/error.hpp"

namespace dfaguide::oracle {
namespace {

// Linear-space copies of the raw parameters.
struct Params {
  std::size_t h, v;
  std::vector<double> pi, trans, emit;  // emit is h x v

  explicit Params(const Hmm& hmm) : h(hmm.num_hidden()), v(hmm.vocab_size()) {
    for (std::size_t z = 0; z < h; ++z) pi.push_back(std::exp(hmm.log_initial()[z]));
    for (std::size_t a = 0; a < h; ++a) {
      for (std::size_t b = 0; b < h; ++b) trans.push_back(std::exp(hmm.log_transition(a, b)));
    }
    for (std::size_t z = 0; z < h; ++z) {
      for (std::size_t w = 0; w < v; ++w) emit.push_back(std::exp(hmm.log_emission(z, static_cast<Token>(w))));
    }
  }

  // `pred` is the joint of the prefix and the state about to emit. Returns
  // the joint after emitting w (before transitioning).
  std::vector<double> emit_token(const std::vector<double>& pred, Token w) const {
    std::vector<double> a(h);
    for (std::size_t z = 0; z < h; ++z) a[z] = pred[z] * emit[z * v + static_cast<std::size_t>(w)];
    return a;
  }
  std::vector<double> move(const std::vector<double>& a) const {
    std::vector<double> out(h, 0.0);
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < h; ++j) out[j] += a[i] * trans[i * h + j];
    }
    return out;
  }
};

double total(const std::vector<double>& x) {
  double s = 0.0;
  for (double y : x) s += y;
  return s;
}

StateId walk(const Dfa& dfa, StateId s, Token w) {
  for (const auto& t : dfa.state(s).exceptions) {
    if (t.token == w) return t.dest;
  }
  return dfa.state(s).default_dest;
}

// Sum over all continuations of `remaining` tokens from (pred, s) of the
// probability mass ending in an accept state. `mass` is the probability of
// the path so far.
double accepted_mass(const Params& p, const Dfa& dfa, const std::vector<double>& pred, StateId s,
                     std::size_t remaining, double mass) {
  if (remaining == 0) return dfa.is_accepting(s) ? mass : 0.0;
  if (mass == 0.0) return 0.0;
  double out = 0.0;
  for (std::size_t w = 0; w < p.v; ++w) {
    const auto a = p.emit_token(pred, static_cast<Token>(w));
    const double m = total(a);
    if (m == 0.0) continue;
    out += accepted_mass(p, dfa, p.move(a), walk(dfa, s, static_cast<Token>(w)), remaining - 1, m);
  }
  return out;
}

void check_tokens(std::span<const Token> tokens, std::size_t v) {
  for (Token w : tokens) {
    if (w < 0 || static_cast<std::size_t>(w) >= v) throw InputError("oracle: token out of range");
  }
}

bool contains_at(std::span<const Token> hay, std::size_t pos, const Phrase& needle) {
  if (pos + needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i < needle.size(); ++i) {
    if (hay[pos + i] != needle[i]) return false;
  }
  return true;
}

// Start index of the first occurrence at or after `from`, or npos.
std::size_t find_from(std::span<const Token> hay, const Phrase& needle, std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    if (contains_at(hay, i, needle)) return i;
  }
  return std::string::npos;
}

bool contains(std::span<const Token> hay, const Phrase& needle) { return find_from(hay, needle, 0) != std::string::npos; }

bool in_window(std::size_t count, const WordWindow& w) { return count >= w.min && count <= w.max; }

// The clauses other than the suffix and the padding rule, on x.
bool check_clauses(const ConstraintSpec& spec, std::span<const Token> x) {
  for (const auto& group : spec.keyphrase_groups) {
    bool any = false;
    for (const auto& variant : group) any = any || contains(x, variant);
    if (!any) return false;
  }
  for (const auto& f : spec.forbidden) {
    if (contains(x, f)) return false;
  }
  if (spec.word_length && !in_window(naive_word_count(spec.alphabet, x), *spec.word_length)) return false;
  if (!spec.end_phrase.empty()) {
    std::size_t end = 0;
    while (end < x.size() && x[end] != spec.alphabet.eos) ++end;
    const auto& ph = spec.end_phrase;
    if (end < ph.size() || !contains_at(x, end - ph.size(), ph)) return false;
  }
  const auto& segs = spec.ordered_segments;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::size_t at = find_from(x, segs[i].tokens, pos);
    if (at == std::string::npos) return false;
    if (i > 0 && segs[i - 1].window_after) {
      if (!in_window(naive_word_count(spec.alphabet, x.subspan(pos, at - pos)), *segs[i - 1].window_after)) return false;
    }
    pos = at + segs[i].tokens.size();
  }
  if (!segs.empty() && segs.back().window_after) {
    if (!in_window(naive_word_count(spec.alphabet, x.subspan(pos)), *segs.back().window_after)) return false;
  }
  return true;
}

}  // namespace

void EnumerationBudget::check(std::size_t vocab, std::size_t length, std::size_t hidden) const {
  if (vocab > max_vocab || length > max_length || hidden > max_hidden ||
      std::pow(static_cast<double>(vocab), static_cast<double>(length)) > max_sequences) {
    throw BudgetError("enumeration over budget: vocab " + std::to_string(vocab) + ", length " +
                      std::to_string(length) + ", hidden " + std::to_string(hidden));
  }
}

double sequence_probability(const Hmm& hmm, std::span<const Token> tokens) {
  check_tokens(tokens, hmm.vocab_size());
  const Params p(hmm);
  std::vector<double> pred = p.pi;
  double mass = 1.0;
  for (Token w : tokens) {
    const auto a = p.emit_token(pred, w);
    mass = total(a);
    pred = p.move(a);
  }
  return mass;
}

bool dfa_accepts(const Dfa& dfa, std::span<const Token> tokens) {
  StateId s = dfa.initial();
  for (Token w : tokens) s = walk(dfa, s, w);
  return dfa.is_accepting(s);
}

double acceptance_probability(const Hmm& hmm, const Dfa& dfa, std::size_t n, const EnumerationBudget& budget) {
  budget.check(hmm.vocab_size(), n, hmm.num_hidden());
  const Params p(hmm);
  return accepted_mass(p, dfa, p.pi, dfa.initial(), n, 1.0);
}

std::vector<double> future_acceptance(const Hmm& hmm, const Dfa& dfa, std::size_t n, std::size_t t, StateId s,
                                      const EnumerationBudget& budget) {
  if (t > n) throw InputError("oracle: position beyond horizon");
  budget.check(hmm.vocab_size(), n - t, hmm.num_hidden());
  const Params p(hmm);
  std::vector<double> out(p.h);
  for (std::size_t z = 0; z < p.h; ++z) {
    std::vector<double> point(p.h, 0.0);
    point[z] = 1.0;
    // At t = 0 the conditioned state emits the first token itself.
    const auto pred = t == 0 ? point : p.move(point);
    out[z] = accepted_mass(p, dfa, pred, s, n - t, 1.0);
  }
  return out;
}

std::vector<double> step_joint(const Hmm& hmm, const Dfa& dfa, std::span<const Token> prefix, std::size_t n,
                               const EnumerationBudget& budget) {
  if (prefix.size() >= n) throw InputError("oracle: prefix leaves no position to fill");
  check_tokens(prefix, hmm.vocab_size());
  budget.check(hmm.vocab_size(), n - prefix.size(), hmm.num_hidden());
  const Params p(hmm);
  std::vector<double> pred = p.pi;
  StateId s = dfa.initial();
  for (Token w : prefix) {
    pred = p.move(p.emit_token(pred, w));
    s = walk(dfa, s, w);
  }
  std::vector<double> out(p.v, 0.0);
  const std::size_t rest = n - prefix.size() - 1;
  for (std::size_t w = 0; w < p.v; ++w) {
    const auto a = p.emit_token(pred, static_cast<Token>(w));
    out[w] = accepted_mass(p, dfa, p.move(a), walk(dfa, s, static_cast<Token>(w)), rest, total(a));
  }
  return out;
}

std::vector<double> step_conditional(const Hmm& hmm, const Dfa& dfa, std::span<const Token> prefix, std::size_t n,
                                     const EnumerationBudget& budget) {
  auto joint = step_joint(hmm, dfa, prefix, n, budget);
  std::vector<Token> extended(prefix.begin(), prefix.end());
  extended.push_back(0);
  for (std::size_t w = 0; w < joint.size(); ++w) {
    extended.back() = static_cast<Token>(w);
    const double pw = sequence_probability(hmm, extended);
    joint[w] = pw > 0.0 ? joint[w] / pw : 0.0;
  }
  return joint;
}

std::vector<double> guided_next(const Hmm& hmm, const Dfa& dfa, std::span<const Token> prefix, std::size_t n,
                                const EnumerationBudget& budget) {
  auto joint = step_joint(hmm, dfa, prefix, n, budget);
  const double z = total(joint);
  if (z > 0.0) {
    for (double& x : joint) x /= z;
  }
  return joint;
}

std::vector<std::pair<std::vector<Token>, double>> conditional_distribution(const Hmm& hmm, const Dfa& dfa,
                                                                            std::size_t n,
                                                                            const EnumerationBudget& budget) {
  budget.check(hmm.vocab_size(), n, hmm.num_hidden());
  const Params p(hmm);
  std::vector<std::pair<std::vector<Token>, double>> out;
  std::vector<Token> seq;
  std::function<void(const std::vector<double>&, StateId, double)> rec = [&](const std::vector<double>& pred,
                                                                             StateId s, double mass) {
    if (seq.size() == n) {
      if (dfa.is_accepting(s) && mass > 0.0) out.emplace_back(seq, mass);
      return;
    }
    for (std::size_t w = 0; w < p.v; ++w) {
      const auto a = p.emit_token(pred, static_cast<Token>(w));
      const double m = total(a);
      if (m == 0.0) continue;
      seq.push_back(static_cast<Token>(w));
      rec(p.move(a), walk(dfa, s, static_cast<Token>(w)), m);
      seq.pop_back();
    }
  };
  rec(p.pi, dfa.initial(), 1.0);
  double z = 0.0;
  for (const auto& e : out) z += e.second;
  for (auto& e : out) e.second /= z;
  return out;
}

std::size_t naive_word_count(const Alphabet& alphabet, std::span<const Token> tokens) {
  std::size_t count = 0;
  bool in_word = false;
  for (Token w : tokens) {
    const TokenClass c = alphabet.classes[static_cast<std::size_t>(w)];
    if (c == TokenClass::kEos) break;
    if (c == TokenClass::kWordStart || (c == TokenClass::kContinuation && !in_word)) {
      ++count;
      in_word = true;
    } else if (c == TokenClass::kBoundary || c == TokenClass::kPad) {
      in_word = false;
    }
  }
  return count;
}

bool naive_constraint_check(const ConstraintSpec& spec, std::span<const Token> tokens) {
  if (spec.empty()) return true;
  const Token eos = spec.alphabet.eos;
  const Token pad = spec.alphabet.pad;
  std::size_t end = 0;
  while (end < tokens.size() && tokens[end] != eos) ++end;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i < end && tokens[i] == pad) return false;
    if (i > end && tokens[i] != pad) return false;
  }
  if (spec.suffix.empty()) return check_clauses(spec, tokens);
  const auto& sfx = spec.suffix;
  if (end < sfx.size() || !contains_at(tokens, end - sfx.size(), sfx)) return false;
  return check_clauses(spec, tokens.first(end - sfx.size()));
}

}  // namespace dfaguide::oracle
