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

// Helpers shared by the test binaries: string enumeration, random models
// and automata, and log-space comparisons.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "dfaguide/dfa.hpp"
#include "dfaguide/hmm.hpp"
#include "dfaguide/rng.hpp"

namespace dgtest {

using dfaguide::Dfa;
using dfaguide::DfaState;
using dfaguide::Hmm;
using dfaguide::Rng;
using dfaguide::StateId;
using dfaguide::Token;
using Seq = std::vector<Token>;

// Calls fn on every string over [0, v) of length exactly n.
inline void for_each_string(std::size_t v, std::size_t n, const std::function<void(const Seq&)>& fn) {
  Seq s(n, 0);
  while (true) {
    fn(s);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (static_cast<std::size_t>(++s[i]) < v) break;
      s[i] = 0;
      if (i == 0) return;
    }
    if (n == 0) return;
  }
}

inline void for_each_string_upto(std::size_t v, std::size_t max_len, const std::function<void(const Seq&)>& fn) {
  for (std::size_t n = 0; n <= max_len; ++n) for_each_string(v, n, fn);
}

inline Seq random_string(std::size_t v, std::size_t n, Rng& rng) {
  Seq s(n);
  for (auto& t : s) t = static_cast<Token>(rng.next_u64() % v);
  return s;
}

// Dense random automaton: every (state, token) gets a uniform destination.
inline Dfa random_dfa(std::size_t k, std::size_t v, Rng& rng, double accept_prob = 0.4) {
  std::vector<DfaState> states(k);
  for (auto& st : states) {
    st.default_dest = static_cast<StateId>(rng.next_u64() % k);
    for (std::size_t w = 0; w < v; ++w) {
      const auto d = static_cast<StateId>(rng.next_u64() % k);
      if (d != st.default_dest) st.exceptions.push_back({static_cast<Token>(w), d});
    }
  }
  std::vector<bool> acc(k);
  for (std::size_t s = 0; s < k; ++s) acc[s] = rng.uniform() < accept_prob;
  return Dfa(v, std::move(states), 0, std::move(acc));
}

inline Hmm random_hmm(std::size_t h, std::size_t v, std::uint64_t seed) {
  Rng rng(seed);
  return Hmm::random(h, v, rng);
}

inline bool contains(const Seq& hay, const Seq& needle) {
  if (needle.size() > hay.size()) return false;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size() && ok; ++j) ok = hay[i + j] == needle[j];
    if (ok) return true;
  }
  return false;
}

// Relative closeness in log space; equal infinities compare equal.
inline bool log_close(double a, double b, double rel = 1e-9) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::fabs(a - b) <= rel * std::max(1.0, std::fabs(b));
}

inline double safe_log(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

}  // namespace dgtest
