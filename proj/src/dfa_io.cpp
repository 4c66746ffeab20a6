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

#include <sstream>

#include "json.hpp"

#include "dfaguide/dfa.hpp"
#include "dfaguide/error.hpp"

namespace dfaguide {

using nlohmann::json;

namespace {
constexpr int kDfaFormatVersion = 1;

std::string token_label(Token w, const std::vector<std::string>* names) {
  if (names && static_cast<std::size_t>(w) < names->size()) return (*names)[static_cast<std::size_t>(w)];
  return std::to_string(w);
}

std::string escape_dot(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}
}  // namespace

std::string dfa_to_json(const Dfa& dfa) {
  json j;
  j["version"] = kDfaFormatVersion;
  j["num_states"] = dfa.num_states();
  j["alphabet_size"] = dfa.alphabet_size();
  j["initial"] = dfa.initial();
  json acc = json::array();
  for (StateId s = 0; s < dfa.num_states(); ++s) {
    if (dfa.is_accepting(s)) acc.push_back(s);
  }
  j["accepts"] = acc;
  json states = json::array();
  for (const auto& st : dfa.states()) {
    json ex = json::object();
    for (const auto& t : st.exceptions) ex[std::to_string(t.token)] = t.dest;
    states.push_back({{"default_dest", st.default_dest}, {"exceptions", ex}});
  }
  j["states"] = states;
  return j.dump();
}

Dfa dfa_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("DFA JSON does not parse: ") + e.what());
  }
  try {
    if (j.at("version").get<int>() != kDfaFormatVersion) throw InputError("unsupported DFA format version");
    const auto k = j.at("num_states").get<std::size_t>();
    const auto sigma = j.at("alphabet_size").get<std::size_t>();
    const auto& js = j.at("states");
    if (!js.is_array() || js.size() != k) throw InputError("DFA JSON: states array does not match num_states");
    std::vector<DfaState> states;
    states.reserve(k);
    for (const auto& s : js) {
      DfaState st;
      st.default_dest = s.at("default_dest").get<StateId>();
      for (const auto& [key, dest] : s.at("exceptions").items()) {
        std::size_t used = 0;
        const long w = std::stol(key, &used);
        if (used != key.size()) throw InputError("DFA JSON: bad token key '" + key + "'");
        st.exceptions.push_back({static_cast<Token>(w), dest.get<StateId>()});
      }
      states.push_back(std::move(st));
    }
    std::vector<bool> accepting(k, false);
    for (const auto& a : j.at("accepts")) {
      const auto s = a.get<std::size_t>();
      if (s >= k) throw InputError("DFA JSON: accept state out of range");
      accepting[s] = true;
    }
    return Dfa(sigma, std::move(states), j.at("initial").get<StateId>(), std::move(accepting));
  } catch (const json::exception& e) {
    throw InputError(std::string("DFA JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw InputError("DFA JSON: non-numeric token key");
  } catch (const std::out_of_range&) {
    throw InputError("DFA JSON: token key out of range");
  }
}

std::string dfa_to_dot(const Dfa& dfa, const std::vector<std::string>* token_names) {
  std::ostringstream out;
  out << "digraph dfa {\n  rankdir=LR;\n  start [shape=point];\n";
  for (StateId s = 0; s < dfa.num_states(); ++s) {
    out << "  q" << s << " [shape=" << (dfa.is_accepting(s) ? "doublecircle" : "circle") << "];\n";
  }
  out << "  start -> q" << dfa.initial() << ";\n";
  for (const auto& e : edge_sets(dfa)) {
    std::string label;
    for (std::size_t i = 0; i < e.tokens.size(); ++i) {
      if (i) label += ", ";
      label += token_label(e.tokens[i], token_names);
    }
    if (e.is_default) label = e.tokens.empty() ? "*" : "* - {" + label + "}";
    out << "  q" << e.source << " -> q" << e.dest << " [label=\"" << escape_dot(label) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace dfaguide
