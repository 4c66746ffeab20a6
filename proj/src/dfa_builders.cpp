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
#include <array>
#include <deque>
#include <map>
#include <unordered_map>

#include "dfaguide/dfa.hpp"
#include "dfaguide/error.hpp"

namespace dfaguide {
namespace {

void check_pattern(std::span<const Token> pattern, std::size_t alphabet_size, const char* what) {
  if (pattern.empty()) throw InputError(std::string(what) + ": pattern must be non-empty");
  for (Token w : pattern) {
    if (w < 0 || static_cast<std::size_t>(w) >= alphabet_size) {
      throw InputError(std::string(what) + ": token " + std::to_string(w) + " outside alphabet");
    }
  }
}

// border[j] = length of the longest proper border of pattern[0:j].
std::vector<std::size_t> failure_table(std::span<const Token> p) {
  std::vector<std::size_t> border(p.size() + 1, 0);
  std::size_t k = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    while (k > 0 && p[i] != p[k]) k = border[k];
    if (p[i] == p[k]) ++k;
    border[i + 1] = k;
  }
  return border;
}

// Full KMP transition table restricted to pattern tokens; any other token
// sends every state back to 0. At j == L the automaton keeps matching
// through the failure link (non-absorbing form).
class KmpMatcher {
 public:
  explicit KmpMatcher(std::span<const Token> pattern)
      : pattern_(pattern.begin(), pattern.end()), border_(failure_table(pattern)) {
    alphabet_ = pattern_;
    std::sort(alphabet_.begin(), alphabet_.end());
    alphabet_.erase(std::unique(alphabet_.begin(), alphabet_.end()), alphabet_.end());
    const std::size_t L = pattern_.size();
    table_.assign((L + 1) * alphabet_.size(), 0);
    for (std::size_t j = 0; j <= L; ++j) {
      for (std::size_t a = 0; a < alphabet_.size(); ++a) {
        const Token w = alphabet_[a];
        std::size_t dest;
        if (j < L && pattern_[j] == w) {
          dest = j + 1;
        } else if (j == 0) {
          dest = 0;
        } else {
          dest = table_[border_[j] * alphabet_.size() + a];
        }
        table_[j * alphabet_.size() + a] = dest;
      }
    }
  }

  std::size_t length() const { return pattern_.size(); }
  const std::vector<Token>& pattern() const { return pattern_; }
  const std::vector<Token>& distinct_tokens() const { return alphabet_; }

  std::size_t next(std::size_t j, Token w) const {
    auto it = std::lower_bound(alphabet_.begin(), alphabet_.end(), w);
    if (it == alphabet_.end() || *it != w) return 0;
    return table_[j * alphabet_.size() + static_cast<std::size_t>(it - alphabet_.begin())];
  }

 private:
  std::vector<Token> pattern_;
  std::vector<std::size_t> border_;
  std::vector<Token> alphabet_;
  std::vector<std::size_t> table_;
};

std::size_t majority_index(const std::array<std::size_t, 5>& counts) {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

// Builds a state whose destination depends only on the token class.
DfaState class_state(const Alphabet& alphabet, const std::array<StateId, 5>& dest_by_class,
                     std::size_t default_class) {
  DfaState st;
  st.default_dest = dest_by_class[default_class];
  for (std::size_t w = 0; w < alphabet.size(); ++w) {
    const auto c = static_cast<std::size_t>(alphabet.classes[w]);
    if (dest_by_class[c] != st.default_dest) st.exceptions.push_back({static_cast<Token>(w), dest_by_class[c]});
  }
  return st;
}

// Product of a KMP matcher with a body automaton that reads the input delayed
// by the matcher's pending prefix: in state (j, d) the body has consumed
// everything except the last j tokens, which equal pattern[0:j].
class DelayedProduct {
 public:
  DelayedProduct(const Dfa& body, std::span<const Token> pattern) : body_(body), kmp_(pattern) {}

  struct Step {
    std::size_t j;
    StateId d;
  };

  Step step(std::size_t j, StateId d, Token x) const {
    const std::size_t j2 = kmp_.next(j, x);
    const std::size_t dropped = j + 1 - j2;
    for (std::size_t i = 0; i < dropped; ++i) {
      const Token w = i < j ? kmp_.pattern()[i] : x;
      d = body_.next(d, w);
    }
    return {j2, d};
  }

  // Tokens that must be listed explicitly from (j, d): pattern tokens plus
  // whatever the body lists after flushing the pending prefix.
  std::vector<Token> listed_tokens(std::size_t j, StateId d, std::span<const Token> extra) const {
    const StateId flushed = body_.run_from(d, std::span<const Token>(kmp_.pattern()).first(j));
    std::vector<Token> out = kmp_.distinct_tokens();
    for (const auto& t : body_.state(flushed).exceptions) out.push_back(t.token);
    out.insert(out.end(), extra.begin(), extra.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Destination of every unlisted token: the matcher resets and the body
  // takes its default edge after the flush.
  Step default_step(std::size_t j, StateId d) const {
    const StateId flushed = body_.run_from(d, std::span<const Token>(kmp_.pattern()).first(j));
    return {0, body_.state(flushed).default_dest};
  }

  std::size_t length() const { return kmp_.length(); }
  const Dfa& body() const { return body_; }

 private:
  const Dfa& body_;
  KmpMatcher kmp_;
};

// Dense id allocator for (j, d) pairs in discovery order.
class PairIds {
 public:
  explicit PairIds(std::size_t body_states) : stride_(body_states) {}
  StateId get(std::size_t j, StateId d) {
    const std::uint64_t key = j * stride_ + d;
    auto [it, inserted] = ids_.emplace(key, static_cast<StateId>(order_.size()));
    if (inserted) order_.push_back({j, d});
    return it->second;
  }
  std::size_t size() const { return order_.size(); }
  std::pair<std::size_t, StateId> at(std::size_t i) const { return order_[i]; }

 private:
  std::uint64_t stride_;
  std::unordered_map<std::uint64_t, StateId> ids_;
  std::vector<std::pair<std::size_t, StateId>> order_;
};

}  // namespace

Dfa build_substring_dfa(std::span<const Token> pattern, std::size_t alphabet_size) {
  check_pattern(pattern, alphabet_size, "build_substring_dfa");
  const std::size_t L = pattern.size();
  const auto border = failure_table(pattern);
  std::vector<DfaState> states(L + 1);
  // exceptions of state j = (pattern[j] -> j+1) plus the non-zero
  // transitions inherited from the failure state.
  for (std::size_t j = 0; j < L; ++j) {
    std::map<Token, StateId> ex;
    if (j > 0) {
      for (const auto& t : states[border[j]].exceptions) ex[t.token] = t.dest;
    }
    ex[pattern[j]] = static_cast<StateId>(j + 1);
    states[j].default_dest = 0;
    for (const auto& [w, d] : ex) states[j].exceptions.push_back({w, d});
  }
  states[L].default_dest = static_cast<StateId>(L);
  std::vector<bool> accepting(L + 1, false);
  accepting[L] = true;
  return Dfa(alphabet_size, std::move(states), 0, std::move(accepting));
}

Dfa build_multi_pattern_dfa(const std::vector<std::vector<Token>>& patterns, std::size_t alphabet_size) {
  if (patterns.empty()) throw InputError("build_multi_pattern_dfa: pattern list is empty");
  for (const auto& p : patterns) check_pattern(p, alphabet_size, "build_multi_pattern_dfa");

  // Trie.
  std::vector<std::map<Token, StateId>> children(1);
  std::vector<bool> output(1, false);
  for (const auto& p : patterns) {
    StateId u = 0;
    for (Token w : p) {
      auto it = children[u].find(w);
      if (it == children[u].end()) {
        const auto v = static_cast<StateId>(children.size());
        children[u][w] = v;
        children.emplace_back();
        output.push_back(false);
        u = v;
      } else {
        u = it->second;
      }
    }
    output[u] = true;
  }

  // Failure links and goto exceptions in BFS order.
  const std::size_t nodes = children.size();
  std::vector<StateId> fail(nodes, 0);
  std::vector<std::map<Token, StateId>> go(nodes);
  std::deque<StateId> queue;
  go[0] = children[0];
  for (const auto& [w, v] : children[0]) {
    fail[v] = 0;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const StateId u = queue.front();
    queue.pop_front();
    output[u] = output[u] || output[fail[u]];
    go[u] = go[fail[u]];
    for (const auto& [w, v] : children[u]) {
      go[u][w] = v;
      fail[v] = [&] {
        auto it = go[fail[u]].find(w);
        return it == go[fail[u]].end() ? StateId{0} : it->second;
      }();
      queue.push_back(v);
    }
  }

  // Collapse all output nodes into one absorbing accept sink.
  const auto sink = static_cast<StateId>(nodes);
  auto target = [&](StateId v) { return output[v] ? sink : v; };
  std::vector<DfaState> states(nodes + 1);
  std::vector<bool> accepting(nodes + 1, false);
  for (StateId u = 0; u < nodes; ++u) {
    states[u].default_dest = 0;
    for (const auto& [w, v] : go[u]) states[u].exceptions.push_back({w, target(v)});
  }
  states[sink].default_dest = sink;
  accepting[sink] = true;
  return prune_dead(Dfa(alphabet_size, std::move(states), target(0), std::move(accepting)));
}

Dfa build_length_window_dfa(std::size_t min_words, std::size_t max_words, const Alphabet& alphabet) {
  alphabet.validate();
  if (min_words < 1 || min_words > max_words) {
    throw InputError("word window needs 1 <= min <= max (got " + std::to_string(min_words) + ", " +
                     std::to_string(max_words) + ")");
  }
  const std::size_t b = max_words;
  // State 2c + in_word for c in [0, b]; then dead, then ended.
  const auto dead = static_cast<StateId>(2 * (b + 1));
  const auto ended = dead + 1;
  auto id = [](std::size_t c, bool in) { return static_cast<StateId>(2 * c + (in ? 1 : 0)); };

  std::array<std::size_t, 5> counts{};
  for (auto c : alphabet.classes) ++counts[static_cast<std::size_t>(c)];
  const std::size_t default_class = majority_index(counts);

  std::vector<DfaState> states(ended + 1);
  std::vector<bool> accepting(ended + 1, false);
  for (std::size_t c = 0; c <= b; ++c) {
    for (bool in : {false, true}) {
      std::array<StateId, 5> dest{};
      const StateId open = c + 1 <= b ? id(c + 1, true) : dead;
      dest[static_cast<std::size_t>(TokenClass::kWordStart)] = open;
      dest[static_cast<std::size_t>(TokenClass::kContinuation)] = in ? id(c, true) : open;
      dest[static_cast<std::size_t>(TokenClass::kBoundary)] = id(c, false);
      dest[static_cast<std::size_t>(TokenClass::kPad)] = id(c, false);
      dest[static_cast<std::size_t>(TokenClass::kEos)] = (c >= min_words) ? ended : dead;
      states[id(c, in)] = class_state(alphabet, dest, default_class);
      accepting[id(c, in)] = c >= min_words;
    }
  }
  states[dead] = DfaState{dead, {}};
  states[ended] = DfaState{ended, {}};
  accepting[ended] = true;
  return prune_dead(Dfa(alphabet.size(), std::move(states), id(0, false), std::move(accepting)));
}

Dfa build_suffix_dfa(const Dfa& body, std::span<const Token> phrase, const Alphabet& alphabet) {
  alphabet.validate();
  if (body.alphabet_size() != alphabet.size()) throw InputError("build_suffix_dfa: alphabet mismatch");
  check_pattern(phrase, alphabet.size(), "build_suffix_dfa");
  for (Token w : phrase) {
    if (!alphabet.is_content(w)) throw InputError("build_suffix_dfa: phrase may not contain EOS or PAD");
  }
  DelayedProduct prod(body, phrase);
  const std::size_t L = prod.length();
  PairIds ids(body.num_states());
  ids.get(0, body.initial());
  // Ended and dead are allocated after the pair states are known; use
  // placeholders and patch at the end.
  constexpr StateId kEnded = static_cast<StateId>(-2);
  constexpr StateId kDead = static_cast<StateId>(-3);
  const Token eos[] = {alphabet.eos};

  std::vector<DfaState> states;
  std::vector<bool> accepting;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto [j, d] = ids.at(i);
    const bool complete = j == L && body.is_accepting(d);
    DfaState st;
    const auto def = prod.default_step(j, d);
    st.default_dest = ids.get(def.j, def.d);
    for (Token w : prod.listed_tokens(j, d, eos)) {
      if (w == alphabet.eos) {
        st.exceptions.push_back({w, complete ? kEnded : kDead});
        continue;
      }
      const auto s = prod.step(j, d, w);
      st.exceptions.push_back({w, ids.get(s.j, s.d)});
    }
    states.push_back(std::move(st));
    accepting.push_back(complete);
  }
  const auto ended = static_cast<StateId>(states.size());
  const auto dead = ended + 1;
  for (auto& st : states) {
    for (auto& t : st.exceptions) {
      if (t.dest == kEnded) t.dest = ended;
      else if (t.dest == kDead) t.dest = dead;
    }
  }
  states.push_back(DfaState{ended, {}});
  accepting.push_back(true);
  states.push_back(DfaState{dead, {}});
  accepting.push_back(false);
  return prune_dead(Dfa(alphabet.size(), std::move(states), 0, std::move(accepting)));
}

Dfa build_end_with_dfa(std::span<const Token> phrase, const Alphabet& alphabet) {
  return build_suffix_dfa(Dfa::accept_all(alphabet.size()), phrase, alphabet);
}

Dfa build_gap_until_dfa(const Dfa& body, std::span<const Token> pattern) {
  check_pattern(pattern, body.alphabet_size(), "build_gap_until_dfa");
  DelayedProduct prod(body, pattern);
  const std::size_t L = prod.length();
  PairIds ids(body.num_states());
  ids.get(0, body.initial());
  constexpr StateId kAccept = static_cast<StateId>(-2);
  constexpr StateId kDead = static_cast<StateId>(-3);

  auto resolve = [&](const DelayedProduct::Step& s) -> StateId {
    if (s.j == L) return body.is_accepting(s.d) ? kAccept : kDead;
    return ids.get(s.j, s.d);
  };
  std::vector<DfaState> states;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto [j, d] = ids.at(i);
    DfaState st;
    st.default_dest = resolve(prod.default_step(j, d));
    for (Token w : prod.listed_tokens(j, d, {})) st.exceptions.push_back({w, resolve(prod.step(j, d, w))});
    states.push_back(std::move(st));
  }
  const auto accept = static_cast<StateId>(states.size());
  const auto dead = accept + 1;
  auto patch = [&](StateId& s) {
    if (s == kAccept) s = accept;
    else if (s == kDead) s = dead;
  };
  for (auto& st : states) {
    patch(st.default_dest);
    for (auto& t : st.exceptions) patch(t.dest);
  }
  std::vector<bool> accepting(states.size(), false);
  states.push_back(DfaState{dead, {}});
  accepting.push_back(true);
  states.push_back(DfaState{dead, {}});
  accepting.push_back(false);
  return prune_dead(Dfa(body.alphabet_size(), std::move(states), 0, std::move(accepting)));
}

Dfa build_padding_dfa(const Alphabet& alphabet) {
  alphabet.validate();
  constexpr StateId kContent = 0, kEnded = 1, kDead = 2;
  std::vector<DfaState> states{
      DfaState{kContent, {{alphabet.eos, kEnded}, {alphabet.pad, kDead}}},
      DfaState{kDead, {{alphabet.pad, kEnded}}},
      DfaState{kDead, {}},
  };
  return Dfa(alphabet.size(), std::move(states), kContent, {true, true, false});
}

Dfa build_modular_counter_dfa(std::size_t alphabet_size, Token token, std::size_t k) {
  if (k == 0) throw InputError("modular counter needs k >= 1");
  if (token < 0 || static_cast<std::size_t>(token) >= alphabet_size) throw InputError("counter token outside alphabet");
  std::vector<DfaState> states(k);
  std::vector<bool> accepting(k, false);
  for (std::size_t i = 0; i < k; ++i) {
    states[i].default_dest = static_cast<StateId>(i);
    states[i].exceptions.push_back({token, static_cast<StateId>((i + 1) % k)});
  }
  accepting[0] = true;
  return Dfa(alphabet_size, std::move(states), 0, std::move(accepting));
}

}  // namespace dfaguide
