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

#include "dfaguide/dfa.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "dfaguide/error.hpp"
#include "dfaguide/hmm.hpp"

namespace dfaguide {

Dfa::Dfa(std::size_t alphabet_size, std::vector<DfaState> states, StateId initial,
         std::vector<bool> accepting)
    : alphabet_size_(alphabet_size),
      states_(std::move(states)),
      initial_(initial),
      accepting_(std::move(accepting)) {
  if (alphabet_size_ == 0) throw InputError("DFA alphabet must be non-empty");
  if (states_.empty()) throw InputError("DFA needs at least one state");
  if (accepting_.size() != states_.size()) throw InputError("accepting flags do not match state count");
  if (initial_ >= states_.size()) throw InputError("DFA initial state out of range");
  const auto k = states_.size();
  for (std::size_t s = 0; s < k; ++s) {
    auto& st = states_[s];
    if (st.default_dest >= k) throw InputError("DFA default transition out of range in state " + std::to_string(s));
    std::sort(st.exceptions.begin(), st.exceptions.end(),
              [](const Transition& a, const Transition& b) { return a.token < b.token; });
    for (std::size_t i = 0; i < st.exceptions.size(); ++i) {
      const auto& tr = st.exceptions[i];
      if (tr.token < 0 || static_cast<std::size_t>(tr.token) >= alphabet_size_) {
        throw InputError("DFA transition token " + std::to_string(tr.token) + " out of range");
      }
      if (tr.dest >= k) throw InputError("DFA transition target out of range in state " + std::to_string(s));
      if (i > 0 && st.exceptions[i - 1].token == tr.token) {
        throw InputError("DFA state " + std::to_string(s) + " has two transitions on token " +
                         std::to_string(tr.token));
      }
    }
    std::erase_if(st.exceptions, [&](const Transition& t) { return t.dest == st.default_dest; });
  }
}

Dfa Dfa::accept_all(std::size_t alphabet_size) {
  return Dfa(alphabet_size, {DfaState{0, {}}}, 0, {true});
}

Dfa Dfa::reject_all(std::size_t alphabet_size) {
  return Dfa(alphabet_size, {DfaState{0, {}}}, 0, {false});
}

Dfa Dfa::empty_string(std::size_t alphabet_size) {
  return Dfa(alphabet_size, {DfaState{1, {}}, DfaState{1, {}}}, 0, {true, false});
}

StateId Dfa::next(StateId s, Token w) const {
  const auto& ex = states_[s].exceptions;
  auto it = std::lower_bound(ex.begin(), ex.end(), w,
                             [](const Transition& t, Token tok) { return t.token < tok; });
  if (it != ex.end() && it->token == w) return it->dest;
  return states_[s].default_dest;
}

StateId Dfa::run_from(StateId s, std::span<const Token> tokens) const {
  for (Token w : tokens) {
    if (w < 0 || static_cast<std::size_t>(w) >= alphabet_size_) {
      throw InputError("token " + std::to_string(w) + " outside DFA alphabet");
    }
    s = next(s, w);
  }
  return s;
}

bool Dfa::is_dead(StateId s) const {
  return !accepting_[s] && states_[s].default_dest == s && states_[s].exceptions.empty();
}

std::size_t Dfa::out_degree(StateId s) const {
  const auto& st = states_[s];
  std::vector<StateId> dests;
  dests.reserve(st.exceptions.size());
  for (const auto& t : st.exceptions) dests.push_back(t.dest);
  std::sort(dests.begin(), dests.end());
  const auto distinct = static_cast<std::size_t>(std::unique(dests.begin(), dests.end()) - dests.begin());
  return distinct + (st.exceptions.size() < alphabet_size_ ? 1 : 0);
}

std::size_t Dfa::num_edges() const {
  std::size_t m = 0;
  for (StateId s = 0; s < states_.size(); ++s) m += out_degree(s);
  return m;
}

std::uint64_t Dfa::fingerprint() const { return fnv1a64(dfa_to_json(*this)); }

bool EdgeSet::contains(Token w) const {
  const bool listed = std::binary_search(tokens.begin(), tokens.end(), w);
  return is_default ? !listed : listed;
}

std::size_t EdgeSet::size(std::size_t alphabet_size) const {
  return is_default ? alphabet_size - tokens.size() : tokens.size();
}

std::vector<EdgeSet> edge_sets(const Dfa& dfa, StateId source) {
  const auto& st = dfa.state(source);
  std::map<StateId, std::vector<Token>> grouped;
  std::vector<Token> all_listed;
  for (const auto& t : st.exceptions) {
    grouped[t.dest].push_back(t.token);
    all_listed.push_back(t.token);
  }
  std::vector<EdgeSet> out;
  if (all_listed.size() < dfa.alphabet_size()) {
    out.push_back(EdgeSet{source, st.default_dest, true, std::move(all_listed)});
  }
  for (auto& [dest, toks] : grouped) out.push_back(EdgeSet{source, dest, false, std::move(toks)});
  return out;
}

std::vector<EdgeSet> edge_sets(const Dfa& dfa) {
  std::vector<EdgeSet> out;
  for (StateId s = 0; s < dfa.num_states(); ++s) {
    auto part = edge_sets(dfa, s);
    for (auto& e : part) out.push_back(std::move(e));
  }
  return out;
}

bool accepts(const Dfa& dfa, std::span<const Token> tokens) {
  return dfa.is_accepting(dfa.run(tokens));
}

Alphabet Alphabet::make(std::size_t size, Token eos, Token pad, TokenClass content_class) {
  Alphabet a;
  a.classes.assign(size, content_class);
  a.eos = eos;
  a.pad = pad;
  if (eos >= 0 && static_cast<std::size_t>(eos) < size) a.classes[static_cast<std::size_t>(eos)] = TokenClass::kEos;
  if (pad >= 0 && static_cast<std::size_t>(pad) < size) a.classes[static_cast<std::size_t>(pad)] = TokenClass::kPad;
  a.validate();
  return a;
}

void Alphabet::validate() const {
  if (classes.empty()) throw InputError("alphabet must be non-empty");
  const auto in_range = [&](Token w) { return w >= 0 && static_cast<std::size_t>(w) < classes.size(); };
  if (!in_range(eos) || !in_range(pad) || eos == pad) throw InputError("EOS and PAD must be distinct in-range tokens");
  for (std::size_t w = 0; w < classes.size(); ++w) {
    const bool is_eos = static_cast<Token>(w) == eos;
    const bool is_pad = static_cast<Token>(w) == pad;
    if ((classes[w] == TokenClass::kEos) != is_eos || (classes[w] == TokenClass::kPad) != is_pad) {
      throw InputError("alphabet class table disagrees with the EOS/PAD ids at token " + std::to_string(w));
    }
  }
}

}  // namespace dfaguide
