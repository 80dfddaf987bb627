#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "dcfcap/error.hpp"
#include "dcfcap/mac_params.hpp"

namespace dcfcap {

/// Stationary distribution of the per-station backoff chain, by brute force.
///
/// States are (stage i, counter k). The 4-way chain adds a data-transmit state
/// k = -1 per stage entered after a successful RTS; the 2-way chain has only
/// k in [0, W_i - 1].
struct ChainSolution {
  AccessMode mode = AccessMode::TwoWay;
  double tau = 0.0;   ///< sum_i b(i, 0)
  double mass = 0.0;  ///< sum of all state probabilities
  std::vector<std::vector<double>> stages;  ///< stages[i][k + offset]

  int offset() const { return mode == AccessMode::FourWay ? 1 : 0; }
  double b(int stage, std::int64_t k) const { return stages.at(stage).at(k + offset()); }
};

inline constexpr std::int64_t kMaxChainStates = 100000;

inline ChainSolution stationary_chain_oracle(const MacParams& mac, AccessMode mode, double p_col,
                                             double p_e) {
  mac.validate();
  if (p_col < 0 || p_col > 1 || p_e < 0 || p_e > 1)
    throw ContractViolation("stationary_chain_oracle: probabilities must be in [0,1]");

  const int m = mac.max_stage;
  const int off = mode == AccessMode::FourWay ? 1 : 0;
  std::vector<std::int64_t> base(m + 2, 0);
  for (int i = 0; i <= m; ++i) base[i + 1] = base[i] + mac.window(i) + off;
  const std::int64_t states = base[m + 1];
  if (states > kMaxChainStates)
    throw ConfigError("stationary_chain_oracle: " + std::to_string(states) +
                      " states exceed the enumeration limit");

  auto index = [&](int i, std::int64_t k) { return base[i] + k + off; };
  using Triplet = Eigen::Triplet<double, std::int64_t>;
  std::vector<Triplet> transitions;  // (from, to, probability)

  auto spread_into_stage = [&](std::int64_t from, int stage, double prob) {
    if (prob == 0.0) return;
    const std::int64_t w = mac.window(stage);
    for (std::int64_t k = 0; k < w; ++k) transitions.emplace_back(from, index(stage, k), prob / w);
  };

  const double p_eq = p_col + p_e - p_e * p_col;
  for (int i = 0; i <= m; ++i) {
    const int next = i < m ? i + 1 : m;
    for (std::int64_t k = 1; k < mac.window(i); ++k)
      transitions.emplace_back(index(i, k), index(i, k - 1), 1.0);
    if (mode == AccessMode::FourWay) {
      // RTS: collided -> next stage, otherwise on to the data state.
      if (p_col < 1.0) transitions.emplace_back(index(i, 0), index(i, -1), 1.0 - p_col);
      spread_into_stage(index(i, 0), next, p_col);
      // Data frame: delivered -> stage 0, corrupted -> next stage.
      spread_into_stage(index(i, -1), 0, 1.0 - p_e);
      spread_into_stage(index(i, -1), next, p_e);
    } else {
      spread_into_stage(index(i, 0), 0, 1.0 - p_eq);
      spread_into_stage(index(i, 0), next, p_eq);
    }
  }

  // pi (P - I) = 0 with the last balance equation replaced by sum(pi) = 1.
  const std::int64_t last = states - 1;
  std::vector<Triplet> entries;
  entries.reserve(transitions.size() + 2 * states);
  for (const auto& t : transitions)
    if (t.col() != last) entries.emplace_back(t.col(), t.row(), t.value());
  for (std::int64_t s = 0; s < last; ++s) entries.emplace_back(s, s, -1.0);
  for (std::int64_t s = 0; s < states; ++s) entries.emplace_back(last, s, 1.0);

  Eigen::SparseMatrix<double, Eigen::ColMajor, std::int64_t> a(states, states);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  Eigen::SparseLU<decltype(a), Eigen::COLAMDOrdering<std::int64_t>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolverError("stationary_chain_oracle: factorisation failed", 0, 0, 0);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(states);
  rhs[last] = 1.0;
  const Eigen::VectorXd pi = lu.solve(rhs);

  ChainSolution out;
  out.mode = mode;
  out.stages.resize(m + 1);
  for (int i = 0; i <= m; ++i) {
    out.stages[i].assign(pi.data() + base[i], pi.data() + base[i + 1]);
    out.tau += pi[index(i, 0)];
  }
  out.mass = pi.sum();
  return out;
}

}  // namespace dcfcap
