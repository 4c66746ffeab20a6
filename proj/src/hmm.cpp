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

#include "dfaguide/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Core>

#include "dfaguide/error.hpp"

namespace dfaguide {
namespace {

constexpr double kRowTolerance = 1e-9;

void check_row(std::span<const double> row, const char* what, std::size_t index) {
  double sum = 0.0;
  for (double v : row) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      std::ostringstream os;
      os << what << " row " << index << " contains NaN or +inf";
      throw InputError(os.str());
    }
    sum += std::exp(v);
  }
  if (std::abs(sum - 1.0) > kRowTolerance) {
    std::ostringstream os;
    os << what << " row " << index << " sums to " << sum << ", expected 1";
    throw InputError(os.str());
  }
}

std::vector<double> normalized_log(std::span<const double> row) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("probabilities must be finite and non-negative");
    sum += v;
  }
  if (!(sum > 0.0)) throw InputError("probability row has zero mass");
  std::vector<double> out(row.size());
  for (std::size_t i = 0; i < row.size(); ++i) out[i] = row[i] > 0.0 ? std::log(row[i] / sum) : kNegInf;
  return out;
}

void dirichlet_row(Rng& rng, std::span<double> out) {
  double sum = 0.0;
  for (double& v : out) {
    v = rng.exponential();
    sum += v;
  }
  for (double& v : out) v = std::log(v / sum);
}

}  // namespace

Hmm::Hmm(std::size_t num_hidden, std::size_t vocab_size, std::vector<double> log_initial,
         std::vector<double> log_transition, std::vector<double> log_emission)
    : num_hidden_(num_hidden),
      vocab_size_(vocab_size),
      log_initial_(std::move(log_initial)),
      log_transition_(std::move(log_transition)),
      log_emission_(std::move(log_emission)) {
  if (num_hidden_ == 0 || vocab_size_ == 0) throw InputError("HMM dimensions must be positive");
  if (log_initial_.size() != num_hidden_ || log_transition_.size() != num_hidden_ * num_hidden_ ||
      log_emission_.size() != num_hidden_ * vocab_size_) {
    throw InputError("HMM parameter blocks do not match (num_hidden, vocab_size)");
  }
  check_row(log_initial_, "initial", 0);
  for (std::size_t z = 0; z < num_hidden_; ++z) {
    check_row(log_transition_row(z), "transition", z);
    check_row(log_emission_row(z), "emission", z);
  }
  build_caches();
}

void Hmm::build_caches() {
  const std::size_t h = num_hidden_;
  initial_.resize(h);
  transition_.resize(h * h);
  emission_by_token_.resize(vocab_size_ * h);
  emission_totals_.assign(h, 0.0);
  for (std::size_t z = 0; z < h; ++z) initial_[z] = std::exp(log_initial_[z]);
  for (std::size_t i = 0; i < h * h; ++i) transition_[i] = std::exp(log_transition_[i]);
  for (std::size_t z = 0; z < h; ++z) {
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      const double p = std::exp(log_emission_[z * vocab_size_ + w]);
      emission_by_token_[w * h + z] = p;
      emission_totals_[z] += p;
    }
  }
}

Hmm Hmm::from_probabilities(std::size_t num_hidden, std::size_t vocab_size,
                            std::span<const double> initial, std::span<const double> transition,
                            std::span<const double> emission) {
  if (initial.size() != num_hidden || transition.size() != num_hidden * num_hidden ||
      emission.size() != num_hidden * vocab_size) {
    throw InputError("HMM parameter blocks do not match (num_hidden, vocab_size)");
  }
  std::vector<double> li = normalized_log(initial);
  std::vector<double> lt, le;
  lt.reserve(transition.size());
  le.reserve(emission.size());
  for (std::size_t z = 0; z < num_hidden; ++z) {
    auto t = normalized_log(transition.subspan(z * num_hidden, num_hidden));
    lt.insert(lt.end(), t.begin(), t.end());
    auto e = normalized_log(emission.subspan(z * vocab_size, vocab_size));
    le.insert(le.end(), e.begin(), e.end());
  }
  return Hmm(num_hidden, vocab_size, std::move(li), std::move(lt), std::move(le));
}

Hmm Hmm::uniform(std::size_t num_hidden, std::size_t vocab_size) {
  if (num_hidden == 0 || vocab_size == 0) throw InputError("HMM dimensions must be positive");
  return Hmm(num_hidden, vocab_size,
             std::vector<double>(num_hidden, -std::log(static_cast<double>(num_hidden))),
             std::vector<double>(num_hidden * num_hidden, -std::log(static_cast<double>(num_hidden))),
             std::vector<double>(num_hidden * vocab_size, -std::log(static_cast<double>(vocab_size))));
}

Hmm Hmm::random(std::size_t num_hidden, std::size_t vocab_size, Rng& rng) {
  if (num_hidden == 0 || vocab_size == 0) throw InputError("HMM dimensions must be positive");
  std::vector<double> li(num_hidden), lt(num_hidden * num_hidden), le(num_hidden * vocab_size);
  dirichlet_row(rng, li);
  for (std::size_t z = 0; z < num_hidden; ++z) {
    dirichlet_row(rng, std::span<double>(lt).subspan(z * num_hidden, num_hidden));
  }
  for (std::size_t z = 0; z < num_hidden; ++z) {
    dirichlet_row(rng, std::span<double>(le).subspan(z * vocab_size, vocab_size));
  }
  return Hmm(num_hidden, vocab_size, std::move(li), std::move(lt), std::move(le));
}

void Hmm::check_token(Token w) const {
  if (w < 0 || static_cast<std::size_t>(w) >= vocab_size_) {
    throw InputError("token " + std::to_string(w) + " outside vocabulary of size " +
                     std::to_string(vocab_size_));
  }
}

std::uint64_t Hmm::fingerprint() const { return fnv1a64(hmm_to_binary(*this)); }

std::vector<double> forward_predict(const Hmm& hmm, std::span<const double> log_alpha) {
  const std::size_t h = hmm.num_hidden();
  std::vector<double> out(h, 0.0);
  const double shift = max_finite(log_alpha);
  if (shift == kNegInf) {
    std::fill(out.begin(), out.end(), kNegInf);
    return out;
  }
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto n = static_cast<Eigen::Index>(h);
  Eigen::VectorXd a(n);
  for (std::size_t from = 0; from < h; ++from) a[static_cast<Eigen::Index>(from)] = std::exp(log_alpha[from] - shift);
  Eigen::Map<Eigen::VectorXd>(out.data(), n).noalias() =
      Eigen::Map<const RowMatrix>(hmm.transition().data(), n, n).transpose() * a;
  for (std::size_t to = 0; to < h; ++to) {
    if (out[to] > 0.0) {
      out[to] = shift + std::log(out[to]);
      continue;
    }
    // Either a true zero or an underflow of every contributing term.
    double exact = kNegInf;
    for (std::size_t from = 0; from < h; ++from) {
      exact = log_add(exact, log_alpha[from] + hmm.log_transition(from, to));
    }
    out[to] = exact;
  }
  return out;
}

ForwardState forward_init(const Hmm& hmm, Token token) {
  hmm.check_token(token);
  ForwardState st;
  st.t = 1;
  st.log_alpha.resize(hmm.num_hidden());
  for (std::size_t z = 0; z < hmm.num_hidden(); ++z) {
    st.log_alpha[z] = hmm.log_initial()[z] + hmm.log_emission(z, token);
  }
  st.log_evidence = log_sum_exp(st.log_alpha);
  return st;
}

ForwardState forward_step(const Hmm& hmm, const ForwardState& state, Token token) {
  hmm.check_token(token);
  if (state.t == 0 || state.log_alpha.size() != hmm.num_hidden()) {
    throw InputError("forward_step requires an initialized forward state");
  }
  ForwardState next;
  next.t = state.t + 1;
  next.log_alpha = forward_predict(hmm, state.log_alpha);
  for (std::size_t z = 0; z < hmm.num_hidden(); ++z) next.log_alpha[z] += hmm.log_emission(z, token);
  next.log_evidence = log_sum_exp(next.log_alpha);
  return next;
}

double sequence_loglik(const Hmm& hmm, std::span<const Token> tokens) {
  if (tokens.empty()) throw InputError("sequence_loglik needs a non-empty sequence");
  ForwardState st = forward_init(hmm, tokens[0]);
  for (std::size_t t = 1; t < tokens.size(); ++t) st = forward_step(hmm, st, tokens[t]);
  return st.log_evidence;
}

std::vector<Token> sample_unconditional(const Hmm& hmm, std::size_t n, Rng& rng) {
  const std::size_t h = hmm.num_hidden();
  const std::size_t v = hmm.vocab_size();
  std::vector<Token> out;
  out.reserve(n);
  std::vector<double> emission(v);
  std::size_t z = rng.categorical(hmm.initial());
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t w = 0; w < v; ++w) emission[w] = hmm.emission_for_token(static_cast<Token>(w))[z];
    out.push_back(static_cast<Token>(rng.categorical(emission)));
    if (t + 1 < n) z = rng.categorical(hmm.transition().subspan(z * h, h));
  }
  return out;
}

void Corpus::append(std::span<const Token> seq) {
  if (length == 0) length = seq.size();
  if (seq.size() != length || length == 0) {
    throw InputError("corpus sequences must all have length " + std::to_string(length));
  }
  tokens.insert(tokens.end(), seq.begin(), seq.end());
}

}  // namespace dfaguide
