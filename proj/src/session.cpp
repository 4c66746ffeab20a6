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

#include <Eigen/Core>

#include "dfaguide/engine.hpp"
#include "dfaguide/error.hpp"

namespace dfaguide {
namespace {

constexpr double kRescueThreshold = 1e-250;

// log sum_z exp(log_weight[z]) p(w | z) for every token w, with `lin` the
// weights rescaled by exp(-top).
double token_mass(const Hmm& hmm, Token w, std::span<const double> lin, double top,
                  std::span<const double> log_weight) {
  const auto e = hmm.emission_for_token(w);
  const auto n = static_cast<Eigen::Index>(lin.size());
  const double s = Eigen::Map<const Eigen::VectorXd>(lin.data(), n).dot(Eigen::Map<const Eigen::VectorXd>(e.data(), n));
  if (s > kRescueThreshold) return std::log(s) + top;
  double acc = kNegInf;
  for (std::size_t z = 0; z < lin.size(); ++z) acc = log_add(acc, log_weight[z] + hmm.log_emission(z, w));
  return acc;
}

}  // namespace

GenerationSession::GenerationSession(const Hmm& hmm, const Dfa& dfa, const BackwardTable& table, const BaseLm& lm,
                                     DecodeOptions options, std::span<const Token> context)
    : hmm_(hmm), dfa_(dfa), table_(table), options_(options), dfa_state_(dfa.initial()) {
  if (hmm.vocab_size() != dfa.alphabet_size() || lm.vocab_size() != hmm.vocab_size()) {
    throw InputError("HMM, automaton and base LM must share one vocabulary");
  }
  if (table.num_states() != dfa.num_states() || table.num_hidden() != hmm.num_hidden()) {
    throw InputError("backward table was built for a different HMM or automaton");
  }
  if (!(options.temperature > 0.0) || !std::isfinite(options.temperature)) {
    throw InputError("temperature must be positive and finite");
  }
  lm_state_ = lm.start(context);
}

void GenerationSession::check_active() const {
  if (finished()) {
    throw SessionExhaustedError("session already emitted all " + std::to_string(horizon()) + " tokens");
  }
}

GenerationSession::Scores GenerationSession::score_candidates() const {
  check_active();
  const std::size_t h = hmm_.num_hidden();
  const std::size_t v = hmm_.vocab_size();
  const std::size_t t = position() + 1;

  // log p(x_<t, z_t).
  std::vector<double> pred;
  if (position() == 0) {
    pred.assign(hmm_.log_initial().begin(), hmm_.log_initial().end());
  } else {
    pred = forward_predict(hmm_, forward_.log_alpha);
  }

  Scores out{std::vector<double>(v, kNegInf), std::vector<double>(v, kNegInf)};
  std::vector<double> lin(h);
  const double ptop = max_finite(pred);
  if (ptop == kNegInf) return out;
  for (std::size_t z = 0; z < h; ++z) lin[z] = std::exp(pred[z] - ptop);
  for (std::size_t w = 0; w < v; ++w) out.evidence[w] = token_mass(hmm_, static_cast<Token>(w), lin, ptop, pred);

  // Candidates grouped by destination state: gamma = p(x_<t, z_t) times the
  // acceptance probability from (z_t, dest).
  std::vector<double> gamma(h);
  for (const auto& edge : edge_sets(dfa_, dfa_state_)) {
    const auto future = table_.row(t, edge.dest);
    for (std::size_t z = 0; z < h; ++z) gamma[z] = pred[z] + future[z];
    const double gtop = max_finite(gamma);
    if (gtop == kNegInf) continue;
    for (std::size_t z = 0; z < h; ++z) lin[z] = std::exp(gamma[z] - gtop);
    if (edge.is_default) {
      std::size_t j = 0;
      for (std::size_t w = 0; w < v; ++w) {
        if (j < edge.tokens.size() && edge.tokens[j] == static_cast<Token>(w)) {
          ++j;
          continue;
        }
        out.joint[w] = token_mass(hmm_, static_cast<Token>(w), lin, gtop, gamma);
      }
    } else {
      for (Token w : edge.tokens) out.joint[static_cast<std::size_t>(w)] = token_mass(hmm_, w, lin, gtop, gamma);
    }
  }
  return out;
}

std::vector<double> GenerationSession::constraint_marginals() const { return score_candidates().joint; }

double GenerationSession::constraint_marginal(Token w) const {
  hmm_.check_token(w);
  return score_candidates().joint[static_cast<std::size_t>(w)];
}

std::vector<double> GenerationSession::guidance() const {
  auto s = score_candidates();
  std::vector<double> g(s.joint.size(), kNegInf);
  for (std::size_t w = 0; w < g.size(); ++w) {
    if (s.evidence[w] == kNegInf || s.joint[w] == kNegInf) continue;
    const double ratio = std::min(0.0, s.joint[w] - s.evidence[w]);
    if (ratio >= kLogFloor) g[w] = ratio;
  }
  return g;
}

std::vector<double> GenerationSession::next_token_distribution() const {
  const auto logits = lm_state_->logits();
  return next_token_distribution(logits);
}

std::vector<double> GenerationSession::next_token_distribution(std::span<const double> lm_logits) const {
  const std::size_t v = hmm_.vocab_size();
  if (lm_logits.size() != v) throw InputError("base LM returned " + std::to_string(lm_logits.size()) + " logits, expected " + std::to_string(v));
  const auto g = guidance();
  const double tau = options_.temperature;
  std::vector<double> logp(v, kNegInf);
  for (std::size_t w = 0; w < v; ++w) {
    if (g[w] == kNegInf || std::isnan(lm_logits[w]) || lm_logits[w] == kNegInf) continue;
    if (options_.mode == DecodeMode::kLogicalMask) {
      logp[w] = lm_logits[w] / tau;
    } else if (options_.temperature_on_product) {
      logp[w] = (lm_logits[w] + g[w]) / tau;
    } else {
      logp[w] = lm_logits[w] / tau + g[w];
    }
  }
  if (log_normalize(logp) == kNegInf) {
    throw DeadEndError("no token at position " + std::to_string(position() + 1) +
                       " keeps an accepted completion reachable");
  }
  for (double& x : logp) x = std::exp(x);
  return logp;
}

void GenerationSession::advance(Token w) {
  check_active();
  hmm_.check_token(w);
  dfa_state_ = dfa_.next(dfa_state_, w);
  forward_ = forward_.t == 0 ? forward_init(hmm_, w) : forward_step(hmm_, forward_, w);
  lm_state_->advance(w);
  emitted_.push_back(w);
}

}  // namespace dfaguide
