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

#include <deque>
#include <unordered_map>

#include "dfaguide/dfa.hpp"
#include "dfaguide/error.hpp"

namespace dfaguide {
namespace {

void require_same_alphabet(const Dfa& a, const Dfa& b, const char* op) {
  if (a.alphabet_size() != b.alphabet_size()) {
    throw InputError(std::string(op) + ": alphabet sizes differ (" + std::to_string(a.alphabet_size()) +
                     " vs " + std::to_string(b.alphabet_size()) + ")");
  }
}

template <typename F>
void for_each_successor(const DfaState& st, F&& f) {
  f(st.default_dest);
  for (const auto& t : st.exceptions) f(t.dest);
}

template <typename Combine>
Dfa product(const Dfa& a, const Dfa& b, Combine combine) {
  const std::uint64_t kb = b.num_states();
  std::unordered_map<std::uint64_t, StateId> ids;
  std::vector<std::pair<StateId, StateId>> pairs;
  auto id_of = [&](StateId p, StateId q) -> StateId {
    const std::uint64_t key = static_cast<std::uint64_t>(p) * kb + q;
    auto [it, inserted] = ids.emplace(key, static_cast<StateId>(pairs.size()));
    if (inserted) pairs.emplace_back(p, q);
    return it->second;
  };
  id_of(a.initial(), b.initial());

  std::vector<DfaState> states;
  std::vector<bool> accepting;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [p, q] = pairs[i];
    const auto& sp = a.state(p);
    const auto& sq = b.state(q);
    DfaState out;
    out.default_dest = id_of(sp.default_dest, sq.default_dest);
    auto ip = sp.exceptions.begin();
    auto iq = sq.exceptions.begin();
    while (ip != sp.exceptions.end() || iq != sq.exceptions.end()) {
      Token w;
      StateId dp, dq;
      if (iq == sq.exceptions.end() || (ip != sp.exceptions.end() && ip->token < iq->token)) {
        w = ip->token;
        dp = ip->dest;
        dq = sq.default_dest;
        ++ip;
      } else if (ip == sp.exceptions.end() || iq->token < ip->token) {
        w = iq->token;
        dp = sp.default_dest;
        dq = iq->dest;
        ++iq;
      } else {
        w = ip->token;
        dp = ip->dest;
        dq = iq->dest;
        ++ip;
        ++iq;
      }
      out.exceptions.push_back({w, id_of(dp, dq)});
    }
    states.push_back(std::move(out));
    accepting.push_back(combine(a.is_accepting(p), b.is_accepting(q)));
  }
  return Dfa(a.alphabet_size(), std::move(states), 0, std::move(accepting));
}

}  // namespace

Dfa prune_dead(const Dfa& dfa) {
  const std::size_t k = dfa.num_states();
  std::vector<std::vector<StateId>> reverse(k);
  for (StateId s = 0; s < k; ++s) {
    const auto& st = dfa.state(s);
    // A default edge whose token set is empty carries no strings.
    if (st.exceptions.size() < dfa.alphabet_size()) reverse[st.default_dest].push_back(s);
    for (const auto& t : st.exceptions) reverse[t.dest].push_back(s);
  }
  std::vector<bool> live(k, false);
  std::deque<StateId> queue;
  for (StateId s = 0; s < k; ++s) {
    if (dfa.is_accepting(s)) {
      live[s] = true;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    for (StateId p : reverse[s]) {
      if (!live[p]) {
        live[p] = true;
        queue.push_back(p);
      }
    }
  }
  if (!live[dfa.initial()]) return Dfa::reject_all(dfa.alphabet_size());

  constexpr StateId kUnset = static_cast<StateId>(-1);
  std::vector<StateId> remap(k, kUnset);
  StateId dead_id = kUnset;
  std::vector<StateId> order;  // old ids of live states, kUnset marks the dead slot
  auto map_state = [&](StateId old) -> StateId {
    if (!live[old]) {
      if (dead_id == kUnset) {
        dead_id = static_cast<StateId>(order.size());
        order.push_back(kUnset);
      }
      return dead_id;
    }
    if (remap[old] == kUnset) {
      remap[old] = static_cast<StateId>(order.size());
      order.push_back(old);
    }
    return remap[old];
  };
  map_state(dfa.initial());
  std::vector<DfaState> states;
  std::vector<bool> accepting;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const StateId old = order[i];
    if (old == kUnset) {
      states.push_back(DfaState{static_cast<StateId>(i), {}});
      accepting.push_back(false);
      continue;
    }
    const auto& st = dfa.state(old);
    DfaState out;
    out.default_dest = map_state(st.default_dest);
    for (const auto& t : st.exceptions) out.exceptions.push_back({t.token, map_state(t.dest)});
    states.push_back(std::move(out));
    accepting.push_back(dfa.is_accepting(old));
  }
  return Dfa(dfa.alphabet_size(), std::move(states), 0, std::move(accepting));
}

Dfa intersect(const Dfa& a, const Dfa& b) {
  require_same_alphabet(a, b, "intersect");
  return prune_dead(product(a, b, [](bool x, bool y) { return x && y; }));
}

Dfa union_of(const Dfa& a, const Dfa& b) {
  require_same_alphabet(a, b, "union");
  return prune_dead(product(a, b, [](bool x, bool y) { return x || y; }));
}

Dfa complement(const Dfa& dfa) {
  std::vector<bool> flipped(dfa.num_states());
  for (StateId s = 0; s < dfa.num_states(); ++s) flipped[s] = !dfa.is_accepting(s);
  return Dfa(dfa.alphabet_size(), dfa.states(), dfa.initial(), std::move(flipped));
}

Dfa terminate_on_accept(const Dfa& dfa) {
  auto states = dfa.states();
  auto accepting = dfa.accepting();
  const auto dead = static_cast<StateId>(states.size());
  for (StateId s = 0; s < dead; ++s) {
    if (accepting[s]) states[s] = DfaState{dead, {}};
  }
  states.push_back(DfaState{dead, {}});
  accepting.push_back(false);
  return prune_dead(Dfa(dfa.alphabet_size(), std::move(states), dfa.initial(), std::move(accepting)));
}

Dfa concat_via_merge(const Dfa& first, const Dfa& second) {
  require_same_alphabet(first, second, "concat_via_merge");
  const std::size_t k1 = first.num_states();
  for (StateId s = 0; s < k1; ++s) {
    if (!first.is_accepting(s)) continue;
    bool ok = true;
    for_each_successor(first.state(s), [&](StateId d) { ok = ok && first.is_dead(d); });
    if (!ok) {
      throw StructureError("concat_via_merge: accept state " + std::to_string(s) +
                           " of the left operand has a transition to a non-dead state");
    }
  }
  // Non-accepting states of `first` keep their order; `second` follows.
  constexpr StateId kUnset = static_cast<StateId>(-1);
  std::vector<StateId> index(k1, kUnset);
  StateId next_id = 0;
  for (StateId s = 0; s < k1; ++s) {
    if (!first.is_accepting(s)) index[s] = next_id++;
  }
  const StateId offset = next_id;
  const StateId merged = offset + second.initial();
  auto map1 = [&](StateId s) { return first.is_accepting(s) ? merged : index[s]; };

  std::vector<DfaState> states;
  std::vector<bool> accepting;
  for (StateId s = 0; s < k1; ++s) {
    if (first.is_accepting(s)) continue;
    const auto& st = first.state(s);
    DfaState out;
    out.default_dest = map1(st.default_dest);
    for (const auto& t : st.exceptions) out.exceptions.push_back({t.token, map1(t.dest)});
    states.push_back(std::move(out));
    accepting.push_back(false);
  }
  for (StateId s = 0; s < second.num_states(); ++s) {
    const auto& st = second.state(s);
    DfaState out;
    out.default_dest = st.default_dest + offset;
    for (const auto& t : st.exceptions) out.exceptions.push_back({t.token, t.dest + offset});
    states.push_back(std::move(out));
    accepting.push_back(second.is_accepting(s));
  }
  return prune_dead(Dfa(first.alphabet_size(), std::move(states), map1(first.initial()), std::move(accepting)));
}

bool accepts_some_length(const Dfa& dfa, std::size_t length) {
  std::vector<char> current(dfa.num_states(), 0);
  current[dfa.initial()] = 1;
  for (std::size_t t = 0; t < length; ++t) {
    std::vector<char> next(dfa.num_states(), 0);
    for (StateId s = 0; s < dfa.num_states(); ++s) {
      if (!current[s]) continue;
      const auto& st = dfa.state(s);
      if (st.exceptions.size() < dfa.alphabet_size()) next[st.default_dest] = 1;
      for (const auto& tr : st.exceptions) next[tr.dest] = 1;
    }
    current.swap(next);
  }
  for (StateId s = 0; s < dfa.num_states(); ++s) {
    if (current[s] && dfa.is_accepting(s)) return true;
  }
  return false;
}

bool language_empty(const Dfa& dfa) {
  std::vector<char> seen(dfa.num_states(), 0);
  std::deque<StateId> queue{dfa.initial()};
  seen[dfa.initial()] = 1;
  while (!queue.empty()) {
    const StateId s = queue.front();
    queue.pop_front();
    if (dfa.is_accepting(s)) return false;
    const auto& st = dfa.state(s);
    auto visit = [&](StateId d) {
      if (!seen[d]) {
        seen[d] = 1;
        queue.push_back(d);
      }
    };
    if (st.exceptions.size() < dfa.alphabet_size()) visit(st.default_dest);
    for (const auto& tr : st.exceptions) visit(tr.dest);
  }
  return true;
}

}  // namespace dfaguide
