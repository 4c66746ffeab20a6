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

#include "dfaguide/base_lm.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "dfaguide/error.hpp"

namespace dfaguide {
namespace {

class HmmLmState final : public LmState {
 public:
  explicit HmmLmState(const Hmm& hmm) : hmm_(hmm) {}

  std::vector<double> logits() const override {
    const std::size_t h = hmm_.num_hidden();
    std::vector<double> pred;
    if (forward_) {
      pred = forward_predict(hmm_, forward_->log_alpha);
    } else {
      pred.assign(hmm_.log_initial().begin(), hmm_.log_initial().end());
    }
    const double top = max_finite(pred);
    std::vector<double> out(hmm_.vocab_size(), kNegInf);
    if (top == kNegInf) {
      // Impossible prefix under the model: fall back to a flat distribution.
      std::fill(out.begin(), out.end(), 0.0);
      return out;
    }
    std::vector<double> lin(h);
    for (std::size_t z = 0; z < h; ++z) lin[z] = std::exp(pred[z] - top);
    for (std::size_t w = 0; w < out.size(); ++w) {
      const auto e = hmm_.emission_for_token(static_cast<Token>(w));
      double s = 0.0;
      for (std::size_t z = 0; z < h; ++z) s += lin[z] * e[z];
      if (s > 0.0) {
        out[w] = std::log(s) + top;
      } else {
        double acc = kNegInf;
        for (std::size_t z = 0; z < h; ++z) acc = log_add(acc, pred[z] + hmm_.log_emission(z, static_cast<Token>(w)));
        out[w] = acc;
      }
    }
    return out;
  }

  void advance(Token token) override {
    forward_ = forward_ ? forward_step(hmm_, *forward_, token) : forward_init(hmm_, token);
  }

 private:
  const Hmm& hmm_;
  std::optional<ForwardState> forward_;
};

class NgramLmState final : public LmState {
 public:
  NgramLmState(const NgramLm& lm, std::span<const Token> context) : lm_(lm) {
    for (Token w : context) advance(w);
  }
  std::vector<double> logits() const override { return lm_.log_probs(history_); }
  void advance(Token token) override {
    history_.push_back(token);
    const std::size_t keep = lm_.order() - 1;
    if (history_.size() > keep) history_.erase(history_.begin(), history_.end() - static_cast<std::ptrdiff_t>(keep));
  }

 private:
  const NgramLm& lm_;
  std::vector<Token> history_;
};

class CallbackLmState final : public LmState {
 public:
  CallbackLmState(std::size_t vocab, const CallbackLm::Fn& fn, std::span<const Token> context)
      : vocab_(vocab), fn_(fn), prefix_(context.begin(), context.end()) {}
  std::vector<double> logits() const override {
    std::vector<double> out(vocab_, 0.0);
    fn_(prefix_, out);
    return out;
  }
  void advance(Token token) override { prefix_.push_back(token); }

 private:
  std::size_t vocab_;
  const CallbackLm::Fn& fn_;
  std::vector<Token> prefix_;
};

}  // namespace

std::vector<double> BaseLm::next_token_logits(std::span<const Token> prefix) const {
  return start(prefix)->logits();
}

double BaseLm::loglik(std::span<const Token> tokens, std::span<const Token> context) const {
  auto state = start(context);
  double total = 0.0;
  for (Token w : tokens) {
    if (w < 0 || static_cast<std::size_t>(w) >= vocab_size()) throw InputError("loglik: token out of range");
    auto logits = state->logits();
    log_normalize(logits);
    total += logits[static_cast<std::size_t>(w)];
    state->advance(w);
  }
  return total;
}

std::unique_ptr<LmState> HmmLm::start(std::span<const Token> context) const {
  auto state = std::make_unique<HmmLmState>(hmm_);
  for (Token w : context) state->advance(w);
  return state;
}

NgramLm::NgramLm(std::size_t vocab_size, std::size_t order, double add_k)
    : vocab_size_(vocab_size), order_(order), add_k_(add_k) {
  if (vocab_size == 0) throw InputError("n-gram vocabulary must be non-empty");
  if (order == 0) throw InputError("n-gram order must be at least 1");
  if (!(add_k > 0.0)) throw InputError("n-gram add-k constant must be positive");
}

std::string NgramLm::context_key(std::span<const Token> history) const {
  const std::size_t keep = std::min(history.size(), order_ - 1);
  std::string key(sizeof(Token) * keep, '\0');
  std::copy_n(reinterpret_cast<const char*>(history.data() + history.size() - keep), key.size(), key.data());
  return key;
}

void NgramLm::train_sequence(std::span<const Token> tokens) {
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const Token w = tokens[t];
    if (w < 0 || static_cast<std::size_t>(w) >= vocab_size_) {
      throw InputError("n-gram training token " + std::to_string(w) + " out of range");
    }
    Row& row = rows_[context_key(tokens.first(t))];
    row.counts[w] += 1.0;
    row.total += 1.0;
  }
}

void NgramLm::train(const Corpus& corpus) {
  for (std::size_t i = 0; i < corpus.size(); ++i) train_sequence(corpus.sequence(i));
}

std::vector<double> NgramLm::log_probs(std::span<const Token> history) const {
  const double v = static_cast<double>(vocab_size_);
  auto it = rows_.find(context_key(history));
  const double total = it == rows_.end() ? 0.0 : it->second.total;
  const double denom = std::log(total + add_k_ * v);
  std::vector<double> out(vocab_size_, std::log(add_k_) - denom);
  if (it != rows_.end()) {
    for (const auto& [w, c] : it->second.counts) out[static_cast<std::size_t>(w)] = std::log(c + add_k_) - denom;
  }
  return out;
}

std::unique_ptr<LmState> NgramLm::start(std::span<const Token> context) const {
  return std::make_unique<NgramLmState>(*this, context);
}

std::unique_ptr<LmState> CallbackLm::start(std::span<const Token> context) const {
  return std::make_unique<CallbackLmState>(vocab_size_, fn_, context);
}

Corpus sample_corpus(const BaseLm& lm, std::size_t num, std::size_t n, std::uint64_t seed, Token eos, Token pad) {
  if (n == 0) throw InputError("sequence length must be at least 1");
  const bool padded = eos >= 0 && pad >= 0;
  Corpus corpus;
  corpus.length = n;
  corpus.tokens.reserve(num * n);
  std::vector<Token> seq(n);
  for (std::size_t i = 0; i < num; ++i) {
    Rng rng = Rng::derive(seed, i);
    auto state = lm.start({});
    bool ended = false;
    for (std::size_t t = 0; t < n; ++t) {
      if (ended) {
        seq[t] = pad;
        continue;
      }
      auto logits = state->logits();
      // PAD only ever follows EOS.
      if (padded) logits[static_cast<std::size_t>(pad)] = kNegInf;
      if (log_normalize(logits) == kNegInf) throw InternalError("base LM produced no finite logits");
      for (double& x : logits) x = std::exp(x);
      const auto w = static_cast<Token>(rng.categorical(logits));
      seq[t] = w;
      if (padded && w == eos) {
        ended = true;
      } else if (t + 1 < n) {
        state->advance(w);
      }
    }
    corpus.append(seq);
  }
  return corpus;
}

}  // namespace dfaguide
