#include <cmath>

#include <gtest/gtest.h>

#include "dcfcap/dcf_analytic.hpp"
#include "dcfcap/markov_chain.hpp"
#include "dcfcap/phy_link.hpp"
#include "dcfcap/units.hpp"

using namespace dcfcap;

namespace {

MacParams small(int w, int m) {
  MacParams mac;
  mac.w_min = w;
  mac.max_stage = m;
  return mac;
}

CaptureParams z0_db(double db) {
  CaptureParams cp;
  cp.z0 = db_to_linear(db);
  return cp;
}

double fer_at(double snr_db, std::int64_t payload = 1024) {
  LinkModel link;
  link.snr = db_to_linear(snr_db);
  link.payload_bytes = payload;
  return fer(link);
}

// Original single-chain model: bisection on the collision probability p.
std::pair<double, double> bianchi_fixed_point(int n, const MacParams& mac) {
  auto tau_of = [&](double p) {
    const double x = 2 * p;
    return 2 * (1 - x) / ((1 - x) * (mac.w_min + 1) + p * mac.w_min * (1 - std::pow(x, mac.max_stage)));
  };
  double lo = 0, hi = 0.999;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (mid - (1 - std::pow(1 - tau_of(mid), n - 1)) > 0 ? hi : lo) = mid;
  }
  const double p = 0.5 * (lo + hi);
  return {tau_of(p), p};
}

}  // namespace

TEST(TauTwoWay, IdealChannel) {
  EXPECT_NEAR(tau_two_way(0.0, MacParams{}), 2.0 / 33.0, 1e-15);
  EXPECT_NEAR(b00_two_way(0.0, MacParams{}), 2.0 / 33.0, 1e-15);
}

TEST(TauTwoWay, RationalFormAwayFromHalf) {
  const MacParams mac;
  for (double p : {0.01, 0.1, 0.3, 0.49, 0.51, 0.8}) {
    const double x = 1 - 2 * p;
    const double rational = 2 * x / (x * 33 + p * 32 * (1 - std::pow(2 * p, 5)));
    EXPECT_NEAR(tau_two_way(p, mac), rational, 1e-13) << p;
  }
}

TEST(TauTwoWay, RegularAtOneHalf) {
  const MacParams mac = small(4, 2);
  const double at = tau_two_way(0.5, mac);
  EXPECT_TRUE(std::isfinite(at));
  EXPECT_NEAR(at, tau_two_way(0.5 - 1e-7, mac), 1e-6);
  EXPECT_NEAR(at, tau_two_way(0.5 + 1e-7, mac), 1e-6);
  EXPECT_NEAR(at, stationary_chain_oracle(mac, AccessMode::TwoWay, 0.5, 0.0).tau, 1e-12);
  // sum_{i<2} 1 = 2, so 1 / (2 (0.5*2 + 1) + 1/2)
  EXPECT_NEAR(at, 1.0 / 4.5, 1e-15);
}

TEST(TauTwoWay, CertainFailure) {
  const MacParams mac;
  // the station stays in the last stage and still transmits once per W_m/2 slots
  EXPECT_NEAR(tau_two_way(1.0, mac), 2.0 / (1024 + 1), 1e-15);
  EXPECT_THROW(tau_two_way(1.2, mac), ContractViolation);
  for (int k = 0; k < 20; ++k) EXPECT_GT(tau_two_way(k / 20.0, mac), tau_two_way((k + 1) / 20.0, mac));
}

TEST(TauFourWay, SmallChainExample) {
  const MacParams mac = small(4, 2);
  const double pc = 0.2, pe = 0.1, peq = pc + pe - pc * pe;
  const double oracle = stationary_chain_oracle(mac, AccessMode::FourWay, pc, pe).tau;
  EXPECT_NEAR(tau_four_way(peq, pc, pe, mac), oracle, 1e-8);
  EXPECT_NEAR(tau_four_way_transcribed(peq, pc, pe, mac), oracle, 1e-8);
}

TEST(TauFourWay, TranscribedFormAgreesOffTheSingularity) {
  for (auto [w, m] : {std::pair{4, 2}, {8, 3}, {32, 5}})
    for (double pc : {0.0, 0.1, 0.3, 0.6})
      for (double pe : {0.0, 0.05, 0.4}) {
        const double peq = pc + pe - pc * pe;
        if (std::abs(peq - 0.5) < 1e-3) continue;
        EXPECT_NEAR(tau_four_way_transcribed(peq, pc, pe, small(w, m)),
                    tau_four_way(peq, pc, pe, small(w, m)), 1e-12);
      }
  EXPECT_TRUE(std::isnan(tau_four_way_transcribed(0.5, 0.5, 0.0, small(4, 2))));
}

TEST(SolveSystem, SingleStation) {
  for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay}) {
    const auto s = solve_system(1, MacParams{}, mode, 0.07, z0_db(1));
    EXPECT_EQ(s.p_col, 0.0);
    EXPECT_EQ(s.p_cap, 0.0);
    EXPECT_NEAR(s.p_eq, 0.07, 1e-15);
    EXPECT_LE(s.residual, 1e-10);
  }
}

TEST(SolveSystem, ReducesToOriginalModel) {
  const MacParams mac;
  CaptureParams none;
  none.z0 = 1e30;
  for (int n : {2, 5, 10, 20, 50}) {
    const auto s = solve_system(n, mac, AccessMode::TwoWay, 0.0, none);
    const auto [tau, p] = bianchi_fixed_point(n, mac);
    EXPECT_NEAR(s.tau, tau, 1e-9);
    EXPECT_NEAR(s.p_col, p, 1e-9);
    EXPECT_LT(s.p_cap, 1e-20);
  }
}

TEST(SolveSystem, ConsistencyInvariants) {
  const MacParams mac;
  for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay})
    for (int n : {2, 9, 20, 50, 120})
      for (double z : {-5.0, 1.0, 6.0, 24.0, kInfinity})
        for (double pe : {0.0, 1e-3, 0.2, 0.95, 1.0}) {
          CaptureParams cp = z0_db(z);
          const auto s = solve_system(n, mac, mode, pe, cp);
          const FixedPointSystem sys(n, mac, mode, pe, cp);
          const auto e = sys(s.tau);
          EXPECT_NEAR(e.tau_next, s.tau, 1e-9);
          EXPECT_NEAR(e.p_col, s.p_col, 1e-9);
          EXPECT_NEAR(e.p_cap, s.p_cap, 1e-9);
          EXPECT_NEAR(e.p_eq, s.p_eq, 1e-9);
          EXPECT_NEAR(s.p_eq, s.p_col + pe - pe * s.p_col, 1e-12);
          EXPECT_LE(s.p_col + s.p_cap, 1 - std::pow(1 - s.tau, n - 1) + 1e-12);
          for (double v : {s.tau, s.p_col, s.p_cap, s.p_eq, s.p_t, s.p_s}) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
          }
        }
}

TEST(SolveSystem, BadInputs) {
  EXPECT_THROW(solve_system(0, MacParams{}, AccessMode::TwoWay, 0.0, CaptureParams{}), ContractViolation);
  EXPECT_THROW(solve_system(5, MacParams{}, AccessMode::TwoWay, 1.5, CaptureParams{}), ContractViolation);
}

TEST(SolveSystem, SnrAndCaptureTrends) {
  const MacParams mac;
  for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay})
    for (double z : {1.0, 6.0, 24.0}) {
      double tau_prev = 0, peq_prev = 1, s_prev = 0;
      for (double snr = 0; snr <= 60; snr += 2.5) {
        const auto s = analyze(20, mac, mode, fer_at(snr), z0_db(z), 1024);
        EXPECT_GE(s.tau, tau_prev - 1e-12);
        EXPECT_LE(s.p_eq, peq_prev + 1e-12);
        EXPECT_GE(s.s_mbps, s_prev - 1e-12);
        tau_prev = s.tau;
        peq_prev = s.p_eq;
        s_prev = s.s_mbps;
      }
    }
}

TEST(SolveSystem, LowerCaptureRatioHelps) {
  const MacParams mac;
  for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay})
    for (int n : {5, 20})
      for (double snr = 25; snr <= 60; snr += 5) {
        const double pe = fer_at(snr);
        const double s1 = analyze(n, mac, mode, pe, z0_db(1), 1024).s_mbps;
        const double s6 = analyze(n, mac, mode, pe, z0_db(6), 1024).s_mbps;
        const double s24 = analyze(n, mac, mode, pe, z0_db(24), 1024).s_mbps;
        EXPECT_GE(s1, s6);
        EXPECT_GE(s6, s24);
      }
}

TEST(Throughput, EdgeCases) {
  const auto sd = slot_durations(MacParams{}, AccessMode::TwoWay, 1024);
  ModelSolution s;
  s.p_t = 0.3;
  s.p_s = 0.8;
  s.p_e = 1.0;
  EXPECT_EQ(throughput(s, sd), 0.0);
  s.p_e = 0.0;
  s.p_t = 1e-12;
  EXPECT_LT(throughput(s, sd), 1e-9);
  s.p_t = 1.0;
  s.p_s = 1.0;
  EXPECT_NEAR(throughput(s, sd), sd.e_pl / sd.t_s, 1e-15);
}

TEST(Throughput, NineStationsOnePercentFer) {
  const auto s = analyze(9, MacParams{}, AccessMode::TwoWay, 1e-2, CaptureParams{}, 1024);
  EXPECT_NEAR(s.s_mbps, 0.777, 0.01);
}

TEST(Throughput, NeverExceedsBackToBackSuccesses) {
  for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay})
    for (int n : {1, 3, 10, 40}) {
      const auto sd = slot_durations(MacParams{}, mode, 1024);
      EXPECT_LE(analyze(n, MacParams{}, mode, 0.0, z0_db(-10), 1024).s_mbps, sd.e_pl / sd.t_s);
    }
}

TEST(BianchiSMax, RtsCtsValue) {
  EXPECT_NEAR(bianchi_s_max(MacParams{}, AccessMode::FourWay, 1024), 0.86, 0.02);
}

TEST(BianchiSMax, BothModesFiniteAndBelowCeiling) {
  for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay}) {
    const double sm = bianchi_s_max(MacParams{}, mode, 1024);
    const auto sd = slot_durations(MacParams{}, mode, 1024);
    EXPECT_GT(sm, 0);
    EXPECT_LT(sm, sd.e_pl / sd.t_s);
  }
}

TEST(SolverOptions, StalledIterationFallsBackToBisection) {
  const FixedPointSystem sys(20, MacParams{}, AccessMode::TwoWay, 0.0, z0_db(6));
  SolverOptions opt;
  opt.damping = 1.0;
  opt.stall_window = 1;
  opt.max_iterations = 2;
  const auto s = solve_system(sys, opt);
  EXPECT_LE(s.residual, 1e-10);
  EXPECT_NEAR(s.tau, solve_system(sys).tau, 1e-10);
}
