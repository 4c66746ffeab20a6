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

#include <string>

#include "doctest.h"

#include "dfaguide/constraints.hpp"
#include "dfaguide/error.hpp"
#include "dfaguide/oracle.hpp"
#include "support.hpp"

using namespace dfaguide;
using dgtest::Seq;

namespace {

// 0 = EOS, 1 = PAD, 2 and 3 are words, 4 is punctuation.
Alphabet small_alphabet() {
  Alphabet a = Alphabet::make(5, 0, 1);
  a.classes[4] = TokenClass::kBoundary;
  return a;
}

Phrase random_phrase(Rng& rng, std::size_t max_len = 2) {
  Phrase p(1 + rng.next_u64() % max_len);
  for (auto& t : p) t = static_cast<Token>(2 + rng.next_u64() % 3);
  return p;
}

WordWindow random_window(Rng& rng) {
  const std::size_t lo = 1 + rng.next_u64() % 3;
  return {lo, lo + rng.next_u64() % 3};
}

ConstraintSpec random_spec(Rng& rng) {
  ConstraintSpec spec;
  spec.alphabet = small_alphabet();
  spec.horizon = 7;
  const auto coin = [&](double p) { return rng.uniform() < p; };
  const std::size_t groups = rng.next_u64() % 3;
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<Phrase> variants;
    const std::size_t nv = 1 + rng.next_u64() % 2;
    for (std::size_t v = 0; v < nv; ++v) variants.push_back(random_phrase(rng));
    spec.keyphrase_groups.push_back(variants);
  }
  if (coin(0.35)) {
    const std::size_t ns = 1 + rng.next_u64() % 2;
    for (std::size_t i = 0; i < ns; ++i) {
      OrderedSegment s;
      s.tokens = random_phrase(rng);
      if (coin(0.5)) s.window_after = random_window(rng);
      spec.ordered_segments.push_back(s);
    }
  }
  if (coin(0.35)) spec.word_length = random_window(rng);
  if (coin(0.25)) spec.end_phrase = random_phrase(rng);
  if (coin(0.25)) spec.suffix = random_phrase(rng);
  if (coin(0.3)) spec.forbidden.push_back(random_phrase(rng));
  return spec;
}

bool dfa_agrees_with_checker(const ConstraintSpec& spec, const Dfa& dfa, std::size_t max_len, std::string* bad) {
  bool ok = true;
  dgtest::for_each_string_upto(spec.alphabet.size(), max_len, [&](const Seq& s) {
    if (!ok) return;
    if (oracle::dfa_accepts(dfa, s) != oracle::naive_constraint_check(spec, s)) {
      ok = false;
      if (bad) {
        for (Token t : s) *bad += std::to_string(t) + " ";
      }
    }
  });
  return ok;
}

}  // namespace

TEST_CASE("compiled automata agree with the clause checker") {
  Rng rng(11);
  for (int i = 0; i < 150; ++i) {
    const ConstraintSpec spec = random_spec(rng);
    const CompileResult r = compile(spec);
    std::string bad;
    INFO("spec: " << spec_to_json(spec));
    CHECK_MESSAGE(dfa_agrees_with_checker(spec, r.dfa, 6, &bad), "first mismatch: " << bad);
    CHECK(r.empty_language == language_empty(r.dfa));
    CHECK(r.empty_language == !r.warnings.empty());
    const SizeEstimate est = estimate_size(spec);
    CHECK(r.dfa.num_states() <= est.states);
  }
}

TEST_CASE("empty spec accepts everything") {
  ConstraintSpec spec;
  spec.alphabet = small_alphabet();
  CHECK(spec.empty());
  const CompileResult r = compile(spec);
  CHECK(r.dfa.num_states() == 1);
  CHECK(accepts(r.dfa, Seq{1, 0, 2}));
  CHECK(r.clause_order.empty());
}

TEST_CASE("hand-written specs") {
  ConstraintSpec spec;
  spec.alphabet = small_alphabet();
  SUBCASE("keyphrase with padding") {
    spec.keyphrase_groups = {{{2, 3}}};
    const Dfa d = compile(spec).dfa;
    CHECK(accepts(d, Seq{3, 2, 3, 0, 1}));
    CHECK(accepts(d, Seq{2, 3}));
    CHECK_FALSE(accepts(d, Seq{2, 0, 3, 1}));  // after EOS only PAD
    CHECK_FALSE(accepts(d, Seq{2, 3, 0, 1, 2}));
    CHECK_FALSE(accepts(d, Seq{2, 1, 3}));
  }
  SUBCASE("ordered segments with a word window between them") {
    spec.ordered_segments = {{{2}, WordWindow{1, 2}}, {{3}, std::nullopt}};
    const Dfa d = compile(spec).dfa;
    CHECK(accepts(d, Seq{2, 4, 2, 3}));
    CHECK(accepts(d, Seq{2, 2, 3, 0}));
    CHECK_FALSE(accepts(d, Seq{2, 4, 4, 3}));  // no word in the gap
    CHECK_FALSE(accepts(d, Seq{2, 3}));
    CHECK_FALSE(accepts(d, Seq{3, 2}));
    CHECK_FALSE(accepts(d, Seq{2, 2, 2, 2, 3}));
  }
  SUBCASE("suffix applies the other clauses to the inserted text") {
    spec.suffix = {3, 4};
    spec.word_length = WordWindow{2, 2};
    const Dfa d = compile(spec).dfa;
    CHECK(accepts(d, Seq{2, 2, 3, 4, 0, 1}));
    CHECK_FALSE(accepts(d, Seq{2, 3, 4, 0}));  // g has one word
    CHECK_FALSE(accepts(d, Seq{2, 2, 3, 0}));
  }
  SUBCASE("conflicting clauses empty the language") {
    spec.keyphrase_groups = {{{2}}};
    spec.forbidden = {{2}};
    const CompileResult r = compile(spec);
    CHECK(r.empty_language);
    REQUIRE(r.emptied_by);
    CHECK((*r.emptied_by == "keyphrases[0]" || *r.emptied_by == "forbidden[0]"));
    CHECK(r.clause_order.size() == 2);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find(*r.emptied_by) != std::string::npos);
  }
}

TEST_CASE("unsatisfiability diagnosis") {
  ConstraintSpec spec;
  spec.alphabet = small_alphabet();
  SUBCASE("satisfiable") {
    spec.keyphrase_groups = {{{2}}};
    CHECK_FALSE(diagnose_unsatisfiable(spec, 4).has_value());
  }
  SUBCASE("too many words for the horizon") {
    spec.keyphrase_groups = {{{2}}};
    spec.word_length = WordWindow{5, 6};
    const auto d = diagnose_unsatisfiable(spec, 3);
    REQUIRE(d);
    CHECK(d->clause == "word_length");
    CHECK(d->message.find("word_length") != std::string::npos);
    CHECK_FALSE(diagnose_unsatisfiable(spec, 6).has_value());
  }
  SUBCASE("suffix longer than the horizon") {
    spec.suffix = {2, 3, 2};
    const auto d = diagnose_unsatisfiable(spec, 2);
    REQUIRE(d);
    CHECK(d->clause == "suffix");
  }
  SUBCASE("contradiction") {
    spec.keyphrase_groups = {{{3}}};
    spec.forbidden = {{3}};
    const auto d = diagnose_unsatisfiable(spec, 5);
    REQUIRE(d);
    CHECK(d->message.find("empty") != std::string::npos);
  }
  SUBCASE("agrees with the compiled automaton") {
    Rng rng(12);
    for (int i = 0; i < 60; ++i) {
      const ConstraintSpec s = random_spec(rng);
      for (std::size_t n = 1; n <= 5; ++n) {
        CHECK(diagnose_unsatisfiable(s, n).has_value() == !accepts_some_length(compile(s).dfa, n));
      }
    }
  }
}

TEST_CASE("validation names the clause") {
  ConstraintSpec spec;
  spec.alphabet = small_alphabet();
  const auto message = [&]() -> std::string {
    try {
      spec.validate();
    } catch (const InputError& e) {
      return e.what();
    }
    return "";
  };
  spec.keyphrase_groups = {{{2}, {9}}};
  CHECK(message().rfind("keyphrases[0][1]", 0) == 0);
  spec.keyphrase_groups = {{}};
  CHECK(message().rfind("keyphrases[0]", 0) == 0);
  spec.keyphrase_groups.clear();
  spec.word_length = WordWindow{3, 1};
  CHECK(message().rfind("word_length", 0) == 0);
  spec.word_length.reset();
  spec.suffix = {2, 0};
  CHECK(message().rfind("suffix", 0) == 0);
  spec.suffix.clear();
  spec.forbidden = {{}};
  CHECK(message().rfind("forbidden[0]", 0) == 0);
  spec.forbidden.clear();
  spec.horizon = 0;
  CHECK(message().find("horizon") != std::string::npos);
}

TEST_CASE("JSON form") {
  Rng rng(13);
  for (int i = 0; i < 40; ++i) {
    const ConstraintSpec spec = random_spec(rng);
    const ConstraintSpec back = spec_from_json(spec_to_json(spec));
    CHECK(back == spec);
    CHECK(canonical_key(back) == canonical_key(spec));
  }
  SUBCASE("keys distinguish different specs") {
    ConstraintSpec a;
    a.alphabet = small_alphabet();
    a.keyphrase_groups = {{{2}}};
    ConstraintSpec b = a;
    b.keyphrase_groups = {{{3}}};
    CHECK(canonical_key(a) != canonical_key(b));
    b = a;
    b.horizon = 9;
    CHECK(canonical_key(a) != canonical_key(b));
  }
  SUBCASE("hand-written document") {
    const ConstraintSpec s = spec_from_json(R"({
      "version": 1,
      "alphabet": {"size": 5, "eos": 0, "pad": 1, "boundary": [4]},
      "keyphrases": [[[2], [3, 2]]],
      "word_length": {"min": 1, "max": 3},
      "horizon": 6})");
    CHECK(s.horizon == 6);
    CHECK(s.alphabet.of(4) == TokenClass::kBoundary);
    REQUIRE(s.keyphrase_groups.size() == 1);
    CHECK(s.keyphrase_groups[0].size() == 2);
    CHECK(s.word_length == WordWindow{1, 3});
  }
  SUBCASE("errors") {
    const auto message = [](const std::string& text) -> std::string {
      try {
        spec_from_json(text);
      } catch (const InputError& e) {
        return e.what();
      }
      return "";
    };
    CHECK(message("{").find("parse") != std::string::npos);
    CHECK(message("[]").find("object") != std::string::npos);
    CHECK_FALSE(message(R"({"keyphrases": []})").empty());
    CHECK(message(R"({"alphabet": {"size": 4}, "keyphrases": [[[7]]]})").find("keyphrases[0][0]") != std::string::npos);
    CHECK(message(R"({"alphabet": {"size": 4}, "keyphrases": [[["a"]]]})").find("keyphrases[0][0]") != std::string::npos);
    CHECK(message(R"({"alphabet": {"size": 4, "default_class": "vowel"}})").find("default_class") != std::string::npos);
    CHECK(message(R"({"version": 2, "alphabet": {"size": 4}})").find("version") != std::string::npos);
  }
}
