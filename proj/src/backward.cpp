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

#include <chrono>
#include <cmath>

#include <Eigen/Core>

#include "dfaguide/engine.hpp"
#include "dfaguide/error.hpp"

namespace dfaguide {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Scaled results below this are recomputed exactly in log space.
constexpr double kRescueThreshold = 1e-250;

}  // namespace

BackwardTable::BackwardTable(std::size_t horizon, std::size_t num_states, std::size_t num_hidden,
                             std::uint64_t hmm_fingerprint, std::uint64_t dfa_fingerprint)
    : horizon_(horizon),
      num_states_(num_states),
      num_hidden_(num_hidden),
      hmm_fingerprint_(hmm_fingerprint),
      dfa_fingerprint_(dfa_fingerprint),
      data_((horizon + 1) * num_states * num_hidden, kNegInf) {}

double BackwardTable::log_acceptance(const Hmm& hmm, StateId initial) const {
  double acc = kNegInf;
  const auto li = hmm.log_initial();
  for (std::size_t z = 0; z < num_hidden_; ++z) acc = log_add(acc, li[z] + at(0, initial, z));
  return acc;
}

EdgeMasses compute_edge_masses(const Hmm& hmm, const Dfa& dfa) {
  const std::size_t h = hmm.num_hidden();
  const std::size_t v = hmm.vocab_size();
  const auto totals = hmm.emission_totals();
  EdgeMasses out;
  out.first_edge.reserve(dfa.num_states() + 1);
  std::vector<double> listed(h);
  for (StateId s = 0; s < dfa.num_states(); ++s) {
    out.first_edge.push_back(out.edges.size());
    auto sets = edge_sets(dfa, s);
    std::fill(listed.begin(), listed.end(), 0.0);
    const std::size_t base = out.mass.size();
    out.mass.resize(base + sets.size() * h, 0.0);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i].is_default) continue;
      double* m = &out.mass[base + i * h];
      for (Token w : sets[i].tokens) {
        const auto e = hmm.emission_for_token(w);
        for (std::size_t z = 0; z < h; ++z) m[z] += e[z];
      }
      for (std::size_t z = 0; z < h; ++z) listed[z] += m[z];
    }
    if (!sets.empty() && sets[0].is_default) {
      // Default mass by subtraction, or by direct summation when the
      // subtraction would cancel most of the digits.
      double* m = &out.mass[base];
      bool direct = false;
      for (std::size_t z = 0; z < h; ++z) {
        m[z] = totals[z] - listed[z];
        if (m[z] < 1e-6 * totals[z]) direct = true;
      }
      if (direct) {
        std::fill(m, m + h, 0.0);
        const auto& excluded = sets[0].tokens;
        std::size_t j = 0;
        for (std::size_t w = 0; w < v; ++w) {
          if (j < excluded.size() && excluded[j] == static_cast<Token>(w)) {
            ++j;
            continue;
          }
          const auto e = hmm.emission_for_token(static_cast<Token>(w));
          for (std::size_t z = 0; z < h; ++z) m[z] += e[z];
        }
      }
    }
    for (auto& e : sets) out.edges.push_back(std::move(e));
  }
  out.first_edge.push_back(out.edges.size());
  return out;
}

BackwardTable precompute_backward(const Hmm& hmm, const Dfa& dfa, std::size_t horizon,
                                  std::vector<double>* row_seconds) {
  if (hmm.vocab_size() != dfa.alphabet_size()) {
    throw InputError("HMM vocabulary (" + std::to_string(hmm.vocab_size()) + ") differs from automaton alphabet (" +
                     std::to_string(dfa.alphabet_size()) + ")");
  }
  if (horizon < 1) throw InputError("horizon must be at least 1");
  using Clock = std::chrono::steady_clock;
  const std::size_t h = hmm.num_hidden();
  const std::size_t k = dfa.num_states();
  BackwardTable table(horizon, k, h, hmm.fingerprint(), dfa.fingerprint());
  if (row_seconds) row_seconds->assign(horizon + 1, 0.0);

  auto t0 = Clock::now();
  for (StateId s = 0; s < k; ++s) {
    auto r = table.mutable_row(horizon, s);
    std::fill(r.begin(), r.end(), dfa.is_accepting(s) ? 0.0 : kNegInf);
  }
  const EdgeMasses em = compute_edge_masses(hmm, dfa);
  if (row_seconds) (*row_seconds)[horizon] = std::chrono::duration<double>(Clock::now() - t0).count();

  Eigen::Map<const RowMatrix> trans(hmm.transition().data(), static_cast<Eigen::Index>(h),
                                    static_cast<Eigen::Index>(h));
  RowMatrix next_lin(k, h);  // exp(next - dest_max)
  std::vector<double> dest_max(k);
  RowMatrix inner(k, h);
  std::vector<double> shift(k);
  RowMatrix result(k, h);

  for (std::size_t t = horizon - 1; t >= 1; --t) {
    t0 = Clock::now();
    for (StateId d = 0; d < k; ++d) {
      const auto nr = table.row(t + 1, d);
      double top = max_finite(nr);
      dest_max[d] = top;
      for (std::size_t z = 0; z < h; ++z) next_lin(d, z) = top == kNegInf ? 0.0 : std::exp(nr[z] - top);
    }
    for (StateId s = 0; s < k; ++s) {
      double top = kNegInf;
      for (std::size_t e = em.first_edge[s]; e < em.first_edge[s + 1]; ++e) top = std::max(top, dest_max[em.edges[e].dest]);
      shift[s] = top;
      auto row = inner.row(s);
      row.setZero();
      if (top == kNegInf) continue;
      for (std::size_t e = em.first_edge[s]; e < em.first_edge[s + 1]; ++e) {
        const StateId d = em.edges[e].dest;
        if (dest_max[d] == kNegInf) continue;
        const double scale = std::exp(dest_max[d] - top);
        const double* m = &em.mass[e * h];
        for (std::size_t z = 0; z < h; ++z) row[z] += m[z] * scale * next_lin(d, z);
      }
      // One matrix-vector product per state: no packing cost, so a row
      // costs the same per state at every automaton size.
      result.row(s).noalias() = (trans * row.transpose()).transpose();
    }
    for (StateId s = 0; s < k; ++s) {
      auto out = table.mutable_row(t, s);
      if (shift[s] == kNegInf) {
        std::fill(out.begin(), out.end(), kNegInf);
        continue;
      }
      for (std::size_t z = 0; z < h; ++z) {
        const double r = result(s, z);
        if (r > kRescueThreshold) {
          out[z] = std::log(r) + shift[s];
          continue;
        }
        double acc = kNegInf;
        for (std::size_t e = em.first_edge[s]; e < em.first_edge[s + 1]; ++e) {
          const auto nr = table.row(t + 1, em.edges[e].dest);
          const double* m = &em.mass[e * h];
          for (std::size_t z2 = 0; z2 < h; ++z2) {
            if (m[z2] <= 0.0) continue;
            acc = log_add(acc, hmm.log_transition(z, z2) + std::log(m[z2]) + nr[z2]);
          }
        }
        out[z] = acc;
      }
    }
    if (row_seconds) (*row_seconds)[t] = std::chrono::duration<double>(Clock::now() - t0).count();
  }

  // Row 0: the first token is emitted from z_1 itself, no transition.
  t0 = Clock::now();
  for (StateId s = 0; s < k; ++s) {
    auto out = table.mutable_row(0, s);
    for (std::size_t z = 0; z < h; ++z) {
      double acc = kNegInf;
      for (std::size_t e = em.first_edge[s]; e < em.first_edge[s + 1]; ++e) {
        const double m = em.mass[e * h + z];
        if (m <= 0.0) continue;
        acc = log_add(acc, std::log(m) + table.at(1, em.edges[e].dest, z));
      }
      out[z] = acc;
    }
  }
  if (row_seconds) (*row_seconds)[0] = std::chrono::duration<double>(Clock::now() - t0).count();
  return table;
}

}  // namespace dfaguide
