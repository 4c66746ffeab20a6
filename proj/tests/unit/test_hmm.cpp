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
#include <cstdio>
#include <fstream>
#include <numeric>

#include "doctest.h"

#include "dfaguide/error.hpp"
#include "dfaguide/hmm.hpp"
#include "support.hpp"

using namespace dfaguide;
using dgtest::log_close;

namespace {

// log p(x) by summing over every hidden path.
double path_sum_loglik(const Hmm& hmm, const std::vector<Token>& x) {
  const std::size_t h = hmm.num_hidden();
  double total = 0.0;
  std::vector<std::size_t> z(x.size(), 0);
  while (true) {
    double p = std::exp(hmm.log_initial()[z[0]] + hmm.log_emission(z[0], x[0]));
    for (std::size_t t = 1; t < x.size(); ++t) {
      p *= std::exp(hmm.log_transition(z[t - 1], z[t]) + hmm.log_emission(z[t], x[t]));
    }
    total += p;
    std::size_t i = x.size();
    while (i > 0 && ++z[i - 1] == h) z[--i] = 0;
    if (i == 0) break;
  }
  return dgtest::safe_log(total);
}

Hmm two_state_example() {
  const std::vector<double> init{0.5, 0.5}, trans{0.7, 0.3, 0.4, 0.6}, emit{0.9, 0.1, 0.2, 0.8};
  return Hmm::from_probabilities(2, 2, init, trans, emit);
}

std::string temp_path(const char* name) { return std::string("dg_test_") + name; }

}  // namespace

TEST_CASE("forward_init on a hand-checked two-state model") {
  const Hmm hmm = two_state_example();
  const auto f = forward_init(hmm, 0);
  CHECK(f.t == 1);
  CHECK(f.log_alpha[0] == doctest::Approx(std::log(0.45)).epsilon(1e-12));
  CHECK(f.log_alpha[1] == doctest::Approx(std::log(0.10)).epsilon(1e-12));
  CHECK(f.log_evidence == doctest::Approx(std::log(0.55)).epsilon(1e-12));
}

TEST_CASE("single hidden state reduces to a chain of emissions") {
  const std::vector<double> init{1.0}, trans{1.0}, emit{0.2, 0.3, 0.5};
  const Hmm hmm = Hmm::from_probabilities(1, 3, init, trans, emit);
  const auto f = forward_init(hmm, 2);
  CHECK(f.log_alpha[0] == doctest::Approx(std::log(0.5)));
  const std::vector<Token> x{2, 0, 1, 1};
  CHECK(sequence_loglik(hmm, x) == doctest::Approx(std::log(0.5) + std::log(0.2) + 2 * std::log(0.3)));
}

TEST_CASE("zero-emission tokens give -inf evidence") {
  const std::vector<double> init{0.5, 0.5}, trans{0.5, 0.5, 0.5, 0.5}, emit{0.5, 0.5, 0.0, 1.0, 0.0, 0.0};
  const Hmm hmm = Hmm::from_probabilities(2, 3, init, trans, emit);
  const auto f = forward_init(hmm, 2);
  CHECK(f.degenerate());
  CHECK(f.log_evidence == kNegInf);
  const auto g = forward_step(hmm, forward_init(hmm, 1), 2);
  CHECK(g.degenerate());
  const std::vector<Token> x{0, 1, 2};
  CHECK(sequence_loglik(hmm, x) == kNegInf);
}

TEST_CASE("forward evidence equals the sum over hidden paths") {
  int instances = 0;
  for (std::size_t h = 1; h <= 3; ++h) {
    for (std::size_t v = 2; v <= 4; ++v) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Hmm hmm = dgtest::random_hmm(h, v, 100 * h + 10 * v + seed);
        Rng rng(seed);
        for (std::size_t n = 1; n <= 5; ++n) {
          const auto x = dgtest::random_string(v, n, rng);
          const double ref = path_sum_loglik(hmm, x);
          CHECK(log_close(sequence_loglik(hmm, x), ref));
          auto f = forward_init(hmm, x[0]);
          for (std::size_t t = 1; t < n; ++t) f = forward_step(hmm, f, x[t]);
          CHECK(f.t == n);
          CHECK(log_close(log_sum_exp(f.log_alpha), f.log_evidence));
          ++instances;
        }
      }
    }
  }
  CHECK(instances == 135);
}

TEST_CASE("uniform model scores every sequence -n log v") {
  const Hmm hmm = Hmm::uniform(3, 5);
  const std::vector<Token> x{4, 0, 2, 2, 1, 3};
  CHECK(sequence_loglik(hmm, x) == doctest::Approx(-6.0 * std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("input validation") {
  const Hmm hmm = Hmm::uniform(2, 3);
  CHECK_THROWS_AS(forward_init(hmm, 3), InputError);
  CHECK_THROWS_AS(forward_init(hmm, -1), InputError);
  CHECK_THROWS_AS(forward_step(hmm, forward_init(hmm, 0), 7), InputError);
  CHECK_THROWS_AS(sequence_loglik(hmm, std::vector<Token>{}), InputError);
  // A row that does not sum to one.
  CHECK_THROWS_AS(Hmm(1, 2, {0.0}, {0.0}, {std::log(0.5), std::log(0.6)}), InputError);
  CHECK_THROWS_AS(Hmm(2, 2, {0.0}, {0.0}, {0.0, kNegInf}), InputError);
}

TEST_CASE("constructors produce row-stochastic parameters") {
  Rng rng(3);
  const Hmm hmm = Hmm::random(4, 6, rng);
  CHECK(std::exp(log_sum_exp(hmm.log_initial())) == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t z = 0; z < 4; ++z) {
    CHECK(std::exp(log_sum_exp(hmm.log_transition_row(z))) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::exp(log_sum_exp(hmm.log_emission_row(z))) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sampling: point masses, determinism and marginals") {
  SUBCASE("point-mass emission") {
    std::vector<double> emit(8, 0.0);
    emit[5] = 1.0;
    const std::vector<double> one{1.0};
    const Hmm hmm = Hmm::from_probabilities(1, 8, one, one, emit);
    Rng rng(1);
    CHECK(sample_unconditional(hmm, 6, rng) == std::vector<Token>(6, 5));
  }
  SUBCASE("same seed, same sequence") {
    const Hmm hmm = dgtest::random_hmm(3, 5, 9);
    Rng a(42), b(42);
    CHECK(sample_unconditional(hmm, 20, a) == sample_unconditional(hmm, 20, b));
  }
  SUBCASE("per-position token frequencies match the analytic marginals") {
    const std::size_t h = 4, v = 5, n = 6, num = 50000;
    const Hmm hmm = dgtest::random_hmm(h, v, 2024);
    std::vector<std::vector<double>> counts(n, std::vector<double>(v, 0.0));
    Rng rng(7);
    for (std::size_t i = 0; i < num; ++i) {
      const auto x = sample_unconditional(hmm, n, rng);
      for (std::size_t t = 0; t < n; ++t) counts[t][static_cast<std::size_t>(x[t])] += 1.0;
    }
    std::vector<double> pz(hmm.initial().begin(), hmm.initial().end());
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t w = 0; w < v; ++w) {
        double p = 0.0;
        for (std::size_t z = 0; z < h; ++z) p += pz[z] * std::exp(hmm.log_emission(z, static_cast<Token>(w)));
        const double freq = counts[t][w] / num;
        const double se = std::sqrt(p * (1 - p) / num);
        CHECK(std::fabs(freq - p) <= 3 * se);
      }
      std::vector<double> next(h, 0.0);
      for (std::size_t a = 0; a < h; ++a) {
        for (std::size_t b = 0; b < h; ++b) next[b] += pz[a] * std::exp(hmm.log_transition(a, b));
      }
      pz = next;
    }
  }
}

TEST_CASE("mean self-sample log-likelihood matches the exact entropy") {
  const std::size_t v = 3, n = 6, num = 10000;
  const Hmm hmm = dgtest::random_hmm(2, v, 77);
  double entropy = 0.0;
  dgtest::for_each_string(v, n, [&](const dgtest::Seq& x) {
    const double ll = sequence_loglik(hmm, x);
    entropy -= std::exp(ll) * ll;
  });
  Rng rng(5);
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < num; ++i) {
    const double ll = sequence_loglik(hmm, sample_unconditional(hmm, n, rng));
    sum += ll;
    sum2 += ll * ll;
  }
  const double mean = sum / num;
  const double se = std::sqrt((sum2 / num - mean * mean) / num);
  CHECK(std::fabs(mean + entropy) <= 3 * se);
}

TEST_CASE("Baum-Welch") {
  const Hmm gen = dgtest::random_hmm(2, 4, 11);
  Corpus corpus;
  corpus.length = 8;
  Rng rng(12);
  for (int i = 0; i < 400; ++i) corpus.append(sample_unconditional(gen, 8, rng));

  SUBCASE("log-likelihood trace never decreases") {
    EmConfig cfg;
    cfg.num_hidden = 3;
    cfg.max_iters = 40;
    cfg.tol = 0.0;
    cfg.seed = 4;
    const auto fit = fit_baum_welch(corpus, 4, cfg);
    REQUIRE(fit.loglik_trace.size() == fit.iterations + 1);
    for (std::size_t i = 1; i < fit.loglik_trace.size(); ++i) {
      CHECK(fit.loglik_trace[i] >= fit.loglik_trace[i - 1] - 1e-7);
    }
    CHECK(fit.loglik_trace.back() == doctest::Approx(corpus_loglik_per_token(fit.hmm, corpus)).epsilon(1e-9));
  }
  SUBCASE("one hidden state gives empirical unigram frequencies") {
    EmConfig cfg;
    cfg.num_hidden = 1;
    cfg.max_iters = 5;
    cfg.smoothing = 0.0;
    const auto fit = fit_baum_welch(corpus, 4, cfg);
    std::vector<double> counts(4, 0.0);
    for (Token w : corpus.tokens) counts[static_cast<std::size_t>(w)] += 1.0;
    for (std::size_t w = 0; w < 4; ++w) {
      CHECK(std::exp(fit.hmm.log_emission(0, static_cast<Token>(w))) ==
            doctest::Approx(counts[w] / static_cast<double>(corpus.tokens.size())).epsilon(1e-9));
    }
  }
  SUBCASE("results do not depend on the thread count") {
    EmConfig cfg;
    cfg.num_hidden = 3;
    cfg.max_iters = 10;
    cfg.seed = 8;
    cfg.num_threads = 1;
    const auto a = fit_baum_welch(corpus, 4, cfg);
    cfg.num_threads = 4;
    const auto b = fit_baum_welch(corpus, 4, cfg);
    CHECK(hmm_to_binary(a.hmm) == hmm_to_binary(b.hmm));
    CHECK(a.loglik_trace == b.loglik_trace);
  }
  SUBCASE("output rows are stochastic") {
    EmConfig cfg;
    cfg.num_hidden = 3;
    cfg.max_iters = 10;
    const auto fit = fit_baum_welch(corpus, 4, cfg);
    for (std::size_t z = 0; z < 3; ++z) {
      CHECK(std::exp(log_sum_exp(fit.hmm.log_emission_row(z))) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(std::exp(log_sum_exp(fit.hmm.log_transition_row(z))) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("errors") {
    EmConfig cfg;
    CHECK_THROWS_AS(fit_baum_welch(corpus, 3, cfg), InputError);
    CHECK_THROWS_AS(fit_baum_welch(Corpus{}, 4, cfg), InputError);
  }
}

TEST_CASE("serialization round trips") {
  const Hmm hmm = dgtest::random_hmm(3, 4, 5);
  SUBCASE("binary") {
    const auto path = temp_path("model.bin");
    save_hmm(hmm, path);
    const Hmm back = load_hmm(path);
    CHECK(hmm_to_binary(back) == hmm_to_binary(hmm));
    CHECK(back.fingerprint() == hmm.fingerprint());
    std::remove(path.c_str());
  }
  SUBCASE("json keeps every bit") {
    const Hmm back = hmm_from_json(hmm_to_json(hmm));
    CHECK(hmm_to_binary(back) == hmm_to_binary(hmm));
  }
  SUBCASE("true zeros survive") {
    const std::vector<double> init{1.0, 0.0}, trans{0.5, 0.5, 0.0, 1.0}, emit{1.0, 0.0, 0.3, 0.7};
    const Hmm z = Hmm::from_probabilities(2, 2, init, trans, emit);
    CHECK(hmm_from_json(hmm_to_json(z)).log_initial()[1] == kNegInf);
    CHECK(hmm_from_binary(hmm_to_binary(z)).log_emission(0, 1) == kNegInf);
  }
  SUBCASE("damaged inputs are rejected") {
    CHECK_THROWS_AS(hmm_from_json("{\"version\": 1}"), InputError);
    CHECK_THROWS_AS(hmm_from_json("not json"), InputError);
    auto bytes = hmm_to_binary(hmm);
    bytes.resize(bytes.size() - 3);
    CHECK_THROWS_AS(hmm_from_binary(bytes), InputError);
    CHECK_THROWS_AS(load_hmm("/nonexistent/model.bin"), IoError);
  }
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a = Rng::derive(1, 0), b = Rng::derive(1, 0), c = Rng::derive(1, 1);
  const auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
  const std::vector<double> w{0.0, 2.0, 0.0};
  CHECK(r.categorical(w) == 1);
}
