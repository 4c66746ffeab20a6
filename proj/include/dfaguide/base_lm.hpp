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

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dfaguide/hmm.hpp"

namespace dfaguide {

/// Incremental decoding state of a base language model.
class LmState {
 public:
  virtual ~LmState() = default;
  /// Unnormalized next-token scores, length vocab_size; -inf allowed.
  virtual std::vector<double> logits() const = 0;
  virtual void advance(Token token) = 0;
};

/// Autoregressive token model the decoder is steered around.
class BaseLm {
 public:
  virtual ~BaseLm() = default;
  virtual std::size_t vocab_size() const = 0;
  /// State after reading `context` (which is not part of the scored output).
  virtual std::unique_ptr<LmState> start(std::span<const Token> context) const = 0;
  virtual std::string name() const = 0;

  std::vector<double> next_token_logits(std::span<const Token> prefix) const;
  /// sum_t log softmax(logits_t)[x_t] over `tokens`, conditioned on `context`.
  double loglik(std::span<const Token> tokens, std::span<const Token> context = {}) const;
};

/// An HMM used as a base LM. Logits are log p(x_<t, x_t), which normalize
/// to the exact p(x_t | x_<t).
class HmmLm final : public BaseLm {
 public:
  explicit HmmLm(const Hmm& hmm) : hmm_(hmm) {}
  std::size_t vocab_size() const override { return hmm_.vocab_size(); }
  std::unique_ptr<LmState> start(std::span<const Token> context) const override;
  std::string name() const override { return "hmm"; }

 private:
  const Hmm& hmm_;
};

/// Order-N token model with add-k smoothing. The context before the first
/// token is padded with a start marker.
class NgramLm final : public BaseLm {
 public:
  NgramLm(std::size_t vocab_size, std::size_t order, double add_k);

  void train(const Corpus& corpus);
  void train_sequence(std::span<const Token> tokens);

  std::size_t vocab_size() const override { return vocab_size_; }
  std::size_t order() const { return order_; }
  std::unique_ptr<LmState> start(std::span<const Token> context) const override;
  std::string name() const override { return "ngram" + std::to_string(order_); }

  /// log p(w | history), history being the last order-1 tokens (shorter at
  /// the start of a sequence).
  std::vector<double> log_probs(std::span<const Token> history) const;

 private:
  std::string context_key(std::span<const Token> history) const;

  std::size_t vocab_size_;
  std::size_t order_;
  double add_k_;
  struct Row {
    std::unordered_map<Token, double> counts;
    double total = 0.0;
  };
  std::unordered_map<std::string, Row> rows_;
};

/// Scores provided by a caller: fn(prefix, out_logits) fills vocab_size
/// entries. Used by the C API to plug in an external model.
class CallbackLm final : public BaseLm {
 public:
  using Fn = std::function<void(std::span<const Token> prefix, std::span<double> out)>;
  CallbackLm(std::size_t vocab_size, Fn fn, std::string name = "callback")
      : vocab_size_(vocab_size), fn_(std::move(fn)), name_(std::move(name)) {}
  std::size_t vocab_size() const override { return vocab_size_; }
  std::unique_ptr<LmState> start(std::span<const Token> context) const override;
  std::string name() const override { return name_; }

 private:
  std::size_t vocab_size_;
  Fn fn_;
  std::string name_;
};

/// Ancestral sampling of `num` sequences of exactly n tokens. When eos/pad
/// are given, everything after the first EOS is replaced by PAD.
Corpus sample_corpus(const BaseLm& lm, std::size_t num, std::size_t n, std::uint64_t seed,
                     Token eos = -1, Token pad = -1);

}  // namespace dfaguide
