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

#include "dfaguide/distill.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "dfaguide/error.hpp"

namespace dfaguide {

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, double heldout_fraction) {
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) throw InputError("held-out fraction must be in (0, 1)");
  const std::size_t count = corpus.size();
  if (count < 2) throw InputError("need at least two sequences to split off a held-out set");
  auto held = static_cast<std::size_t>(std::llround(heldout_fraction * static_cast<double>(count)));
  held = std::clamp<std::size_t>(held, 1, count - 1);
  Corpus train, heldout;
  train.length = heldout.length = corpus.length;
  for (std::size_t i = 0; i < count; ++i) (i < count - held ? train : heldout).append(corpus.sequence(i));
  return {train, heldout};
}

double corpus_lm_loglik(const BaseLm& lm, const Corpus& corpus, Token eos, Token pad) {
  const bool padded = eos >= 0 && pad >= 0;
  double total = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto seq = corpus.sequence(i);
    auto state = lm.start({});
    for (std::size_t t = 0; t < seq.size(); ++t) {
      auto logits = state->logits();
      if (padded) logits[static_cast<std::size_t>(pad)] = kNegInf;
      log_normalize(logits);
      total += logits[static_cast<std::size_t>(seq[t])];
      if (padded && seq[t] == eos) break;
      state->advance(seq[t]);
    }
  }
  return total / static_cast<double>(corpus.tokens.size());
}

DistillResult fit_and_report(const Corpus& train, const Corpus& heldout, std::size_t vocab_size, const EmConfig& em,
                             std::size_t restarts, const BaseLm* lm, Token eos, Token pad) {
  if (restarts == 0) throw InputError("need at least one EM restart");
  if (heldout.empty()) throw InputError("held-out corpus is empty");
  std::optional<EmResult> best;
  FitReport report;
  for (std::size_t r = 0; r < restarts; ++r) {
    EmConfig cfg = em;
    cfg.seed = Rng::derive(em.seed, r).next_u64();
    EmResult fit = fit_baum_welch(train, vocab_size, cfg);
    const double ll = corpus_loglik_per_token(fit.hmm, heldout);
    report.restart_heldout.push_back(ll);
    if (!best || ll > report.heldout_loglik_hmm) {
      report.heldout_loglik_hmm = ll;
      report.best_restart = r;
      best = std::move(fit);
    }
  }
  report.num_hidden = em.num_hidden;
  report.vocab_size = vocab_size;
  report.train_sequences = train.size();
  report.heldout_sequences = heldout.size();
  report.sequence_length = train.length;
  report.loglik_trace = best->loglik_trace;
  report.train_loglik = best->loglik_trace.back();
  report.iterations = best->iterations;
  report.converged = best->converged;
  report.seed = em.seed;
  if (lm) {
    report.heldout_loglik_lm = corpus_lm_loglik(*lm, heldout, eos, pad);
    report.gap = *report.heldout_loglik_lm - report.heldout_loglik_hmm;
  }
  return {best->hmm, report};
}

DistillResult distill(const BaseLm& lm, const DistillConfig& config) {
  const Corpus corpus = sample_corpus(lm, config.num_sequences, config.length, config.seed, config.eos, config.pad);
  const auto [train, heldout] = split_corpus(corpus, config.heldout_fraction);
  EmConfig em = config.em;
  em.seed = config.seed;
  return fit_and_report(train, heldout, lm.vocab_size(), em, config.restarts, &lm, config.eos, config.pad);
}

std::string report_to_json(const FitReport& r) {
  nlohmann::json j{{"version", 1},
                   {"num_hidden", r.num_hidden},
                   {"vocab_size", r.vocab_size},
                   {"train_sequences", r.train_sequences},
                   {"heldout_sequences", r.heldout_sequences},
                   {"sequence_length", r.sequence_length},
                   {"train_loglik_per_token", r.train_loglik},
                   {"heldout_loglik_hmm", r.heldout_loglik_hmm},
                   {"best_restart", r.best_restart},
                   {"restart_heldout", r.restart_heldout},
                   {"loglik_trace", r.loglik_trace},
                   {"iterations", r.iterations},
                   {"converged", r.converged},
                   {"seed", r.seed}};
  j["heldout_loglik_lm"] = r.heldout_loglik_lm ? nlohmann::json(*r.heldout_loglik_lm) : nlohmann::json();
  j["kl_gap"] = r.gap ? nlohmann::json(*r.gap) : nlohmann::json();
  return j.dump(2);
}

Corpus read_corpus(std::istream& in, std::size_t vocab_size) {
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  std::vector<Token> seq;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    seq.clear();
    std::istringstream fields(line);
    std::string field;
    while (fields >> field) {
      std::size_t used = 0;
      long value = 0;
      try {
        value = std::stol(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size() || value < 0 || (vocab_size && static_cast<std::size_t>(value) >= vocab_size)) {
        throw InputError("corpus line " + std::to_string(lineno) + ": bad token '" + field + "'");
      }
      seq.push_back(static_cast<Token>(value));
    }
    if (corpus.length == 0) corpus.length = seq.size();
    if (seq.size() != corpus.length) {
      throw InputError("corpus line " + std::to_string(lineno) + ": expected " + std::to_string(corpus.length) +
                       " tokens, found " + std::to_string(seq.size()));
    }
    corpus.append(seq);
  }
  if (corpus.empty()) throw InputError("corpus is empty");
  return corpus;
}

Corpus read_corpus_file(const std::string& path, std::size_t vocab_size) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path);
  return read_corpus(in, vocab_size);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto seq = corpus.sequence(i);
    for (std::size_t t = 0; t < seq.size(); ++t) out << (t ? " " : "") << seq[t];
    out << '\n';
  }
}

}  // namespace dfaguide
