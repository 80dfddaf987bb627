#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "dcfcap/dcf_analytic.hpp"
#include "dcfcap/markov_chain.hpp"

using namespace dcfcap;

namespace {

MacParams small(int w, int m) {
  MacParams mac;
  mac.w_min = w;
  mac.max_stage = m;
  return mac;
}

double total_mass(const ChainSolution& c) {
  double s = 0;
  for (const auto& st : c.stages) s = std::accumulate(st.begin(), st.end(), s);
  return s;
}

}  // namespace

TEST(ChainOracle, IdealTwoWayStaysInStageZero) {
  const MacParams mac;
  const auto c = stationary_chain_oracle(mac, AccessMode::TwoWay, 0.0, 0.0);
  EXPECT_NEAR(c.tau, 2.0 / 33.0, 1e-12);
  double stage0 = std::accumulate(c.stages[0].begin(), c.stages[0].end(), 0.0);
  EXPECT_NEAR(stage0, 1.0, 1e-12);
  for (int i = 1; i <= mac.max_stage; ++i)
    for (double v : c.stages[i]) EXPECT_NEAR(v, 0.0, 1e-15);
}

TEST(ChainOracle, NormalisedForEveryInput) {
  for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay})
    for (double pc : {0.0, 0.2, 0.5, 0.9, 1.0})
      for (double pe : {0.0, 0.1, 0.5, 1.0}) {
        const auto c = stationary_chain_oracle(small(8, 3), mode, pc, pe);
        EXPECT_NEAR(c.mass, 1.0, 1e-12);
        EXPECT_NEAR(total_mass(c), 1.0, 1e-12);
        for (const auto& st : c.stages)
          for (double v : st) EXPECT_GE(v, -1e-15);
      }
}

TEST(ChainOracle, HeadStateRecursion) {
  for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay}) {
    const MacParams mac = small(16, 4);
    const double pc = 0.3, pe = 0.15;
    const double peq = pc + pe - pc * pe;
    const auto c = stationary_chain_oracle(mac, mode, pc, pe);
    const double b00 = c.b(0, 0);
    for (int i = 1; i < mac.max_stage; ++i) EXPECT_NEAR(c.b(i, 0), std::pow(peq, i) * b00, 1e-12);
    EXPECT_NEAR(c.b(mac.max_stage, 0), std::pow(peq, mac.max_stage) / (1 - peq) * b00, 1e-12);
    if (mode == AccessMode::TwoWay) EXPECT_NEAR(b00, b00_two_way(peq, mac), 1e-12);
  }
}

TEST(ChainOracle, FourWaySingleStation) {
  // N = 1: nothing collides or fails, tau = 1 / (W/2 + 1/2 + 1)
  const MacParams mac;
  const auto c = stationary_chain_oracle(mac, AccessMode::FourWay, 0.0, 0.0);
  EXPECT_NEAR(c.tau, 1.0 / 17.5, 1e-12);
  EXPECT_NEAR(tau_four_way(0.0, 0.0, 0.0, mac), c.tau, 1e-12);
  EXPECT_NEAR(c.b(0, -1), c.b(0, 0), 1e-12);
}

TEST(ChainOracle, ClosedFormsAgree) {
  for (auto [w, m] : {std::pair{4, 2}, {8, 3}, {16, 4}, {32, 5}})
    for (double pc : {0.0, 0.2, 0.45, 0.5, 0.7})
      for (double pe : {0.0, 0.1, 0.3}) {
        const MacParams mac = small(w, m);
        const double peq = pc + pe - pc * pe;
        EXPECT_NEAR(tau_two_way(peq, mac),
                    stationary_chain_oracle(mac, AccessMode::TwoWay, pc, pe).tau, 1e-8);
        EXPECT_NEAR(tau_four_way(peq, pc, pe, mac),
                    stationary_chain_oracle(mac, AccessMode::FourWay, pc, pe).tau, 1e-8);
      }
}

TEST(ChainOracle, RefusesHugeChains) {
  MacParams mac;
  mac.w_min = 1024;
  mac.max_stage = 10;
  EXPECT_THROW(stationary_chain_oracle(mac, AccessMode::TwoWay, 0.1, 0.1), ConfigError);
  EXPECT_THROW(stationary_chain_oracle(MacParams{}, AccessMode::TwoWay, 1.2, 0.1), ContractViolation);
}
