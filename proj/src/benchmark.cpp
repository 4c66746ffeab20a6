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
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dfaguide/engine.hpp"
#include "dfaguide/error.hpp"

namespace dfaguide {
namespace {

using Clock = std::chrono::steady_clock;

// samples[r][t]: microseconds spent on position t in repeat r (t = 1..n-1;
// the last row is the base case and is skipped).
std::vector<std::vector<double>> time_positions(const Hmm& hmm, const Dfa& dfa, const BenchmarkConfig& config) {
  if (config.horizon < 3) throw InputError("benchmark horizon must be at least 3");
  if (config.repeats == 0) throw InputError("benchmark needs at least one repeat");
  const HmmLm lm(hmm);
  std::vector<std::vector<double>> samples;
  for (std::size_t r = 0; r < config.repeats; ++r) {
    std::vector<double> row_seconds;
    const BackwardTable table = precompute_backward(hmm, dfa, config.horizon, &row_seconds);
    GenerationSession session(hmm, dfa, table, lm);
    Rng rng = Rng::derive(config.seed, r);
    std::vector<double> us(config.horizon, 0.0);
    for (std::size_t t = 1; t < config.horizon; ++t) {
      const auto t0 = Clock::now();
      session.guidance();
      const double decode = std::chrono::duration<double>(Clock::now() - t0).count();
      us[t] = 1e6 * (row_seconds[t] + decode);
      auto dist = session.next_token_distribution();
      session.advance(static_cast<Token>(rng.categorical(dist)));
    }
    samples.push_back(std::move(us));
  }
  return samples;
}

void summarize(std::vector<double> values, TimingRow& row) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double x : values) var += (x - mean) * (x - mean);
  row.mean_us_per_token = mean;
  row.std_us = values.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  row.median_us = values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

std::vector<TimingRow> benchmark_sizes(const Hmm& hmm, const std::vector<Dfa>& dfas, const BenchmarkConfig& config) {
  std::vector<TimingRow> rows;
  for (const auto& dfa : dfas) {
    const auto samples = time_positions(hmm, dfa, config);
    std::vector<double> flat;
    for (const auto& rep : samples) flat.insert(flat.end(), rep.begin() + 1, rep.end());
    TimingRow row;
    row.dfa_states = dfa.num_states();
    row.dfa_edges = dfa.num_edges();
    summarize(std::move(flat), row);
    rows.push_back(row);
  }
  return rows;
}

std::vector<TimingRow> benchmark_positions(const Hmm& hmm, const Dfa& dfa, const BenchmarkConfig& config) {
  const auto samples = time_positions(hmm, dfa, config);
  std::vector<TimingRow> rows;
  for (std::size_t t = 1; t < config.horizon; ++t) {
    std::vector<double> at;
    for (const auto& rep : samples) at.push_back(rep[t]);
    TimingRow row;
    row.dfa_states = dfa.num_states();
    row.dfa_edges = dfa.num_edges();
    row.position = static_cast<long>(t);
    summarize(std::move(at), row);
    rows.push_back(row);
  }
  return rows;
}

std::string timing_csv(const std::vector<TimingRow>& rows) {
  std::ostringstream out;
  out << "dfa_states,dfa_edges,position,mean_us_per_token,std,median_us\n";
  for (const auto& r : rows) {
    out << r.dfa_states << ',' << r.dfa_edges << ',';
    if (r.position >= 0) {
      out << r.position;
    } else {
      out << "all";
    }
    out << ',' << r.mean_us_per_token << ',' << r.std_us << ',' << r.median_us << '\n';
  }
  return out.str();
}

std::vector<Dfa> counter_family(std::size_t vocab_size, const std::vector<std::size_t>& num_states) {
  std::vector<Dfa> out;
  for (std::size_t k : num_states) {
    if (k < 2) throw InputError("counter automata need at least 2 states");
    // Even residues accept, so every state can still reach acceptance at
    // every position and no backward row is skipped.
    const Dfa counter = build_modular_counter_dfa(vocab_size, static_cast<Token>(vocab_size - 1), k);
    std::vector<bool> accepting(k);
    for (std::size_t i = 0; i < k; ++i) accepting[i] = i % 2 == 0;
    out.emplace_back(vocab_size, counter.states(), counter.initial(), std::move(accepting));
  }
  return out;
}

}  // namespace dfaguide
