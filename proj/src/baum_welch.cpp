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
#include <cmath>
#include <thread>

#include "dfaguide/error.hpp"
#include "dfaguide/hmm.hpp"

namespace dfaguide {
namespace {

// The corpus is always cut into this many chunks regardless of thread
// count, and chunk statistics are summed in chunk order, so the fitted
// model is bit-identical on every machine.
constexpr std::size_t kChunks = 16;

struct Stats {
  std::vector<double> initial;
  std::vector<double> transition;
  std::vector<double> emission;  // h x vocab
  double loglik = 0.0;
  std::size_t impossible = 0;

  Stats(std::size_t h, std::size_t v)
      : initial(h, 0.0), transition(h * h, 0.0), emission(h * v, 0.0) {}

  void add(const Stats& o) {
    for (std::size_t i = 0; i < initial.size(); ++i) initial[i] += o.initial[i];
    for (std::size_t i = 0; i < transition.size(); ++i) transition[i] += o.transition[i];
    for (std::size_t i = 0; i < emission.size(); ++i) emission[i] += o.emission[i];
    loglik += o.loglik;
    impossible += o.impossible;
  }
};

// Scaled forward-backward for one sequence, accumulating expected counts.
class SequenceWorker {
 public:
  SequenceWorker(const Hmm& hmm, std::size_t n)
      : hmm_(hmm), h_(hmm.num_hidden()), n_(n), alpha_(n * h_), beta_(n * h_), scale_(n) {}

  void accumulate(std::span<const Token> x, Stats& stats) {
    const auto pi = hmm_.initial();
    const auto trans = hmm_.transition();
    for (std::size_t t = 0; t < n_; ++t) {
      const auto e = hmm_.emission_for_token(x[t]);
      double* a = &alpha_[t * h_];
      if (t == 0) {
        for (std::size_t z = 0; z < h_; ++z) a[z] = pi[z] * e[z];
      } else {
        const double* prev = &alpha_[(t - 1) * h_];
        std::fill(a, a + h_, 0.0);
        for (std::size_t from = 0; from < h_; ++from) {
          const double p = prev[from];
          if (p == 0.0) continue;
          const double* row = trans.data() + from * h_;
          for (std::size_t to = 0; to < h_; ++to) a[to] += p * row[to];
        }
        for (std::size_t z = 0; z < h_; ++z) a[z] *= e[z];
      }
      double c = 0.0;
      for (std::size_t z = 0; z < h_; ++z) c += a[z];
      if (!(c > 0.0)) {
        ++stats.impossible;
        return;
      }
      for (std::size_t z = 0; z < h_; ++z) a[z] /= c;
      scale_[t] = c;
    }
    double ll = 0.0;
    for (double c : scale_) ll += std::log(c);
    stats.loglik += ll;

    std::fill(beta_.begin() + static_cast<std::ptrdiff_t>((n_ - 1) * h_), beta_.end(), 1.0);
    std::vector<double> tmp(h_);
    for (std::size_t t = n_ - 1; t-- > 0;) {
      const auto e = hmm_.emission_for_token(x[t + 1]);
      const double* bn = &beta_[(t + 1) * h_];
      for (std::size_t z = 0; z < h_; ++z) tmp[z] = e[z] * bn[z] / scale_[t + 1];
      double* b = &beta_[t * h_];
      const double* a = &alpha_[t * h_];
      for (std::size_t from = 0; from < h_; ++from) {
        const double* row = trans.data() + from * h_;
        double acc = 0.0;
        double* xi = &stats.transition[from * h_];
        for (std::size_t to = 0; to < h_; ++to) {
          const double r = row[to] * tmp[to];
          acc += r;
          xi[to] += a[from] * r;
        }
        b[from] = acc;
      }
    }
    const std::size_t v = hmm_.vocab_size();
    for (std::size_t t = 0; t < n_; ++t) {
      const double* a = &alpha_[t * h_];
      const double* b = &beta_[t * h_];
      const std::size_t w = static_cast<std::size_t>(x[t]);
      for (std::size_t z = 0; z < h_; ++z) {
        const double g = a[z] * b[z];
        stats.emission[z * v + w] += g;
        if (t == 0) stats.initial[z] += g;
      }
    }
  }

 private:
  const Hmm& hmm_;
  std::size_t h_, n_;
  std::vector<double> alpha_, beta_, scale_;
};

Stats expectation(const Hmm& hmm, const Corpus& corpus, std::size_t threads) {
  const std::size_t h = hmm.num_hidden();
  const std::size_t v = hmm.vocab_size();
  const std::size_t count = corpus.size();
  std::vector<Stats> chunk_stats(kChunks, Stats(h, v));
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = count * c / kChunks;
    const std::size_t end = count * (c + 1) / kChunks;
    SequenceWorker worker(hmm, corpus.length);
    for (std::size_t i = begin; i < end; ++i) worker.accumulate(corpus.sequence(i), chunk_stats[c]);
  };
  if (threads <= 1) {
    for (std::size_t c = 0; c < kChunks; ++c) run_chunk(c);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < kChunks; c += threads) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }
  Stats total(h, v);
  for (const auto& s : chunk_stats) total.add(s);
  return total;
}

std::vector<double> smoothed_log_row(std::span<const double> counts, double eps) {
  double sum = 0.0;
  for (double c : counts) sum += c + eps;
  std::vector<double> out(counts.size());
  if (!(sum > 0.0)) {
    std::fill(out.begin(), out.end(), -std::log(static_cast<double>(counts.size())));
    return out;
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double c = counts[i] + eps;
    out[i] = c > 0.0 ? std::log(c / sum) : kNegInf;
  }
  return out;
}

Hmm maximization(const Stats& s, std::size_t h, std::size_t v, double eps) {
  auto li = smoothed_log_row(s.initial, eps);
  std::vector<double> lt, le;
  lt.reserve(h * h);
  le.reserve(h * v);
  for (std::size_t z = 0; z < h; ++z) {
    auto t = smoothed_log_row(std::span<const double>(s.transition).subspan(z * h, h), eps);
    lt.insert(lt.end(), t.begin(), t.end());
    auto e = smoothed_log_row(std::span<const double>(s.emission).subspan(z * v, v), eps);
    le.insert(le.end(), e.begin(), e.end());
  }
  return Hmm(h, v, std::move(li), std::move(lt), std::move(le));
}

void validate_corpus(const Corpus& corpus, std::size_t vocab_size) {
  if (corpus.empty()) throw InputError("EM needs a non-empty corpus");
  if (corpus.tokens.size() % corpus.length != 0) throw InputError("corpus storage is not a whole number of sequences");
  for (std::size_t i = 0; i < corpus.tokens.size(); ++i) {
    const Token w = corpus.tokens[i];
    if (w < 0 || static_cast<std::size_t>(w) >= vocab_size) {
      throw InputError("corpus sequence " + std::to_string(i / corpus.length) + " has token " +
                       std::to_string(w) + " outside vocabulary of size " + std::to_string(vocab_size));
    }
  }
}

std::size_t resolve_threads(std::size_t requested) {
  std::size_t t = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return std::min(t, kChunks);
}

}  // namespace

double corpus_loglik_per_token(const Hmm& hmm, const Corpus& corpus) {
  validate_corpus(corpus, hmm.vocab_size());
  Stats s = expectation(hmm, corpus, 1);
  if (s.impossible > 0) return kNegInf;
  return s.loglik / static_cast<double>(corpus.tokens.size());
}

EmResult fit_baum_welch(const Corpus& corpus, std::size_t vocab_size, const EmConfig& config) {
  if (config.num_hidden == 0) throw InputError("num_hidden must be positive");
  if (config.smoothing < 0.0) throw InputError("smoothing must be non-negative");
  validate_corpus(corpus, vocab_size);
  const std::size_t h = config.num_hidden;
  const std::size_t threads = resolve_threads(config.num_threads);
  const double tokens = static_cast<double>(corpus.tokens.size());

  Rng rng(config.seed);
  Hmm model = Hmm::random(h, vocab_size, rng);
  EmResult result{model, {}, 0, false};

  for (std::size_t iter = 0;; ++iter) {
    Stats stats = expectation(model, corpus, threads);
    const double ll = stats.impossible > 0 ? kNegInf : stats.loglik / tokens;
    if (!result.loglik_trace.empty() && ll - result.loglik_trace.back() < config.tol) {
      result.loglik_trace.push_back(ll);
      result.converged = true;
      break;
    }
    result.loglik_trace.push_back(ll);
    if (iter == config.max_iters) break;
    model = maximization(stats, h, vocab_size, config.smoothing);
    result.iterations = iter + 1;
  }
  result.hmm = model;
  return result;
}

}  // namespace dfaguide
