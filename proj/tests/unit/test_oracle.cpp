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

#include <cmath>
#include <numeric>

#include "doctest.h"

#include "dfaguide/error.hpp"
#include "dfaguide/oracle.hpp"
#include "support.hpp"

using namespace dfaguide;
using dgtest::Seq;

TEST_CASE("sequence probabilities form a distribution") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Hmm hmm = dgtest::random_hmm(1 + seed % 3, 3, seed);
    for (std::size_t n = 1; n <= 4; ++n) {
      double total = 0.0;
      dgtest::for_each_string(3, n, [&](const Seq& s) { total += oracle::sequence_probability(hmm, s); });
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  // Hand example: one state emitting 0 with 0.25.
  const std::vector<double> init{1.0}, trans{1.0}, emit{0.25, 0.75};
  const Hmm one = Hmm::from_probabilities(1, 2, init, trans, emit);
  CHECK(oracle::sequence_probability(one, Seq{0, 1, 1}) == doctest::Approx(0.25 * 0.75 * 0.75));
  CHECK_THROWS_AS(oracle::sequence_probability(one, Seq{2}), InputError);
}

TEST_CASE("acceptance quantities are consistent") {
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const Hmm hmm = dgtest::random_hmm(2, 3, 40 + static_cast<std::uint64_t>(i));
    const Dfa dfa = dgtest::random_dfa(1 + rng.next_u64() % 4, 3, rng);
    const std::size_t n = 4;
    double direct = 0.0;
    dgtest::for_each_string(3, n, [&](const Seq& s) {
      if (oracle::dfa_accepts(dfa, s)) direct += oracle::sequence_probability(hmm, s);
    });
    const double acc = oracle::acceptance_probability(hmm, dfa, n);
    CHECK(acc == doctest::Approx(direct).epsilon(1e-12));

    const auto fa0 = oracle::future_acceptance(hmm, dfa, n, 0, dfa.initial());
    double via_init = 0.0;
    for (std::size_t z = 0; z < 2; ++z) via_init += hmm.initial()[z] * fa0[z];
    CHECK(via_init == doctest::Approx(acc).epsilon(1e-12));

    const auto first = oracle::step_joint(hmm, dfa, Seq{}, n);
    CHECK(std::accumulate(first.begin(), first.end(), 0.0) == doctest::Approx(acc).epsilon(1e-12));

    const auto dist = oracle::conditional_distribution(hmm, dfa, n);
    if (acc > 0.0) {
      double total = 0.0;
      for (const auto& [seq, p] : dist) {
        CHECK(oracle::dfa_accepts(dfa, seq));
        CHECK(p == doctest::Approx(oracle::sequence_probability(hmm, seq) / acc).epsilon(1e-10));
        total += p;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    } else {
      CHECK(dist.empty());
    }
  }
  const Hmm hmm = dgtest::random_hmm(2, 3, 9);
  CHECK(oracle::acceptance_probability(hmm, Dfa::accept_all(3), 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(oracle::acceptance_probability(hmm, Dfa::reject_all(3), 3) == 0.0);
}

TEST_CASE("enumeration budget") {
  oracle::EnumerationBudget b;
  CHECK_NOTHROW(b.check(4, 6, 3));
  CHECK_THROWS_AS(b.check(6, 3, 3), BudgetError);
  CHECK_THROWS_AS(b.check(4, 9, 3), BudgetError);
  CHECK_THROWS_AS(b.check(4, 4, 11), BudgetError);
  b.max_sequences = 100;
  CHECK_THROWS_AS(b.check(5, 3, 2), BudgetError);
  const Hmm big = dgtest::random_hmm(2, 6, 1);
  CHECK_THROWS_AS(oracle::acceptance_probability(big, Dfa::accept_all(6), 3), BudgetError);
}

TEST_CASE("word counting and clause checks") {
  Alphabet a = Alphabet::make(6, 0, 1);
  a.classes[4] = TokenClass::kBoundary;
  a.classes[5] = TokenClass::kContinuation;
  CHECK(oracle::naive_word_count(a, Seq{2, 3, 4, 2}) == 3);
  CHECK(oracle::naive_word_count(a, Seq{2, 5, 5, 4, 5}) == 2);
  CHECK(oracle::naive_word_count(a, Seq{5, 1, 5}) == 2);
  CHECK(oracle::naive_word_count(a, Seq{2, 0, 2, 2}) == 1);
  CHECK(oracle::naive_word_count(a, Seq{}) == 0);

  ConstraintSpec spec;
  spec.alphabet = a;
  CHECK(oracle::naive_constraint_check(spec, Seq{1, 0, 2}));  // empty spec
  spec.keyphrase_groups = {{{3}}};
  CHECK(oracle::naive_constraint_check(spec, Seq{2, 3, 0, 1}));
  CHECK_FALSE(oracle::naive_constraint_check(spec, Seq{2, 3, 0, 2}));
  CHECK_FALSE(oracle::naive_constraint_check(spec, Seq{2, 1, 3}));
  CHECK_FALSE(oracle::naive_constraint_check(spec, Seq{2, 0, 3}));
  spec.suffix = {2};
  CHECK(oracle::naive_constraint_check(spec, Seq{3, 2, 0}));
  CHECK_FALSE(oracle::naive_constraint_check(spec, Seq{2, 3, 0}));
  CHECK_FALSE(oracle::naive_constraint_check(spec, Seq{2, 2}));  // the inserted part has no 3
}
