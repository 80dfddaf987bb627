#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dcfcap/capture.hpp"
#include "dcfcap/rng.hpp"
#include "dcfcap/units.hpp"

using namespace dcfcap;

namespace {

CaptureParams with_z0_db(double db) {
  CaptureParams cp;
  cp.z0 = db_to_linear(db);
  return cp;
}

}  // namespace

TEST(CaptureConditional, Basics) {
  EXPECT_EQ(capture_conditional(0, with_z0_db(6)), 1.0);
  CaptureParams huge;
  huge.z0 = 1e30;
  EXPECT_LT(capture_conditional(1, huge), 1e-20);
  EXPECT_EQ(capture_conditional(3, CaptureParams{}), 0.0);
  EXPECT_THROW(capture_conditional(-1, huge), ContractViolation);
}

TEST(CaptureConditional, OneDecibel) {
  const CaptureParams cp = with_z0_db(1.0);
  EXPECT_DOUBLE_EQ(cp.g(), 2.0 / 33.0);
  EXPECT_NEAR(cp.threshold(), 0.076297, 1e-5);
  EXPECT_NEAR(capture_conditional(1, cp), 0.92911, 1e-5);
}

TEST(CaptureConditional, StrictlyDecreasing) {
  for (double z : {1.0, 6.0, 24.0}) {
    for (int i = 1; i < 10; ++i)
      EXPECT_LT(capture_conditional(i + 1, with_z0_db(z)), capture_conditional(i, with_z0_db(z)));
    EXPECT_LT(capture_conditional(2, with_z0_db(z + 1)), capture_conditional(2, with_z0_db(z)));
  }
}

TEST(CaptureTotal, Degenerate) {
  EXPECT_EQ(capture_total(1, 0.4, with_z0_db(1)), 0.0);
  EXPECT_EQ(capture_total(10, 0.0, with_z0_db(1)), 0.0);
  EXPECT_EQ(capture_total(10, 0.3, CaptureParams{}), 0.0);
  EXPECT_THROW(capture_total(0, 0.1, with_z0_db(1)), ContractViolation);
  EXPECT_THROW(capture_total(3, 1.5, with_z0_db(1)), ContractViolation);
}

TEST(CaptureTotal, BoundedByBusyProbability) {
  for (int n : {2, 3, 10, 50, 51, 200})
    for (double tau : {1e-4, 0.01, 0.1, 0.5, 0.9, 1.0})
      for (double z : {-10.0, 1.0, 6.0, 24.0}) {
        const double p = capture_total(n, tau, with_z0_db(z));
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0 - std::pow(1.0 - tau, n - 1) + 1e-12) << n << ' ' << tau << ' ' << z;
      }
}

TEST(CaptureTotal, LogDomainMatchesLongDoubleSum) {
  const CaptureParams cp = with_z0_db(3.0);
  for (int n : {51, 120, 400}) {
    const double tau = 0.05;
    long double sum = 0;
    for (int i = 1; i <= n - 1; ++i) {
      const int k = i + 1;
      long double binom = 1;
      for (int j = 1; j <= k; ++j) binom = binom * (n - k + j) / j;
      sum += binom * std::pow((long double)tau, k) * std::pow(1.0L - tau, n - k) /
             std::pow(1.0L + cp.threshold(), i);
    }
    EXPECT_NEAR(capture_total(n, tau, cp), static_cast<double>(sum), 1e-12 * static_cast<double>(sum));
  }
}

TEST(CaptureTotal, MonteCarloOracle) {
  const CaptureParams cp = with_z0_db(6.0);
  const int n = 5;
  const double tau = 0.1;
  const double q = 1.0 / (1.0 + cp.threshold());
  std::mt19937_64 gen(777);
  std::bernoulli_distribution tx(tau);
  const long trials = 10'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (long t = 0; t < trials; ++t) {
    int k = 0;
    for (int j = 0; j < n; ++j) k += tx(gen);
    if (k >= 2) {
      const double v = std::pow(q, k - 1);
      sum += v;
      sum_sq += v * v;
    }
  }
  const double mean = sum / trials;
  const double se = std::sqrt((sum_sq / trials - mean * mean) / trials);
  EXPECT_NEAR(capture_total(n, tau, cp), mean, 3.0 * se);
}

TEST(ResolveCollision, Symmetric) {
  CaptureParams cp;
  cp.z0 = 1.0 / cp.g();  // z0 g = 1
  EXPECT_FALSE(resolve_collision({{2.0, 2.0}, {}}, cp));
  cp.z0 *= 3;
  EXPECT_FALSE(resolve_collision({{2.0, 2.0}, {}}, cp));
}

TEST(ResolveCollision, DominantPower) {
  CaptureParams cp;
  cp.z0 = 0.076 / cp.g();
  EXPECT_EQ(resolve_collision({{100.0, 1.0}, {}}, cp), 0u);
  EXPECT_EQ(resolve_collision({{100.0, 1.0}, {7, 9}}, cp), 7u);
  EXPECT_EQ(resolve_collision({{1.0, 100.0}, {7, 9}}, cp), 9u);
}

TEST(ResolveCollision, SeveralAboveThresholdTakesStrongest) {
  CaptureParams cp;
  cp.z0 = 0.5 / cp.g();
  // gamma = 1.5 and 0.667, both above 0.5
  EXPECT_EQ(resolve_collision({{3.0, 2.0}, {}}, cp), 0u);
  EXPECT_EQ(resolve_collision({{2.0, 3.0}, {}}, cp), 1u);
}

TEST(ResolveCollision, ContractAndDeterminism) {
  CaptureParams cp = with_z0_db(1);
  EXPECT_THROW(resolve_collision({{1.0}, {}}, cp), ContractViolation);
  EXPECT_THROW(resolve_collision({{1.0, 0.0}, {}}, cp), ContractViolation);
  EXPECT_THROW(resolve_collision({{1.0, 2.0}, {1}}, cp), ContractViolation);
  const CollisionDraw d{{0.3, 1.7, 0.2}, {}};
  for (int i = 0; i < 5; ++i) EXPECT_EQ(resolve_collision(d, cp), resolve_collision(d, cp));
  EXPECT_FALSE(resolve_collision(d, CaptureParams{}));
}

TEST(ResolveCollisionLocked, MatchesConditionalProbability) {
  Rng rng(99);
  for (int i : {1, 2, 4}) {
    for (double z : {1.0, 6.0, 24.0}) {
      const CaptureParams cp = with_z0_db(z);
      const double expected = capture_conditional(i, cp);
      const long draws = 200'000;
      long hits = 0;
      CollisionDraw d;
      d.powers.resize(i + 1);
      for (long t = 0; t < draws; ++t) {
        for (auto& p : d.powers) p = -std::log(rng.uniform_open());
        hits += resolve_collision_locked(d, cp, 0).has_value();
      }
      const double se = std::sqrt(expected * (1 - expected) / draws);
      EXPECT_NEAR(static_cast<double>(hits) / draws, expected, 4 * se) << i << ' ' << z;
    }
  }
}

TEST(ResolveCollisionLocked, BadIndex) {
  EXPECT_THROW(resolve_collision_locked({{1.0, 2.0}, {}}, with_z0_db(1), 2), ContractViolation);
}

TEST(StationPower, Exponential) {
  CaptureParams cp;
  EXPECT_EQ(draw_station_power(10.0, cp, 0.0), 0.0);
  EXPECT_THROW(draw_station_power(10.0, cp, 1.0), ContractViolation);
  Rng rng(5);
  double sum = 0.0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) sum += draw_station_power(10.0, cp, rng.uniform());
  EXPECT_NEAR(sum / n, mean_power(10.0, cp), 0.01 * mean_power(10.0, cp));
}

TEST(StationPower, GeometricPathLoss) {
  CaptureParams cp;
  cp.mode = CaptureMode::Geometric;
  EXPECT_NEAR(mean_power(20.0, cp) / mean_power(10.0, cp), std::pow(2.0, -3.5), 1e-12);
  EXPECT_NEAR(std::pow(2.0, -3.5), 0.0884, 1e-4);
  EXPECT_EQ(mean_power(0.0, cp), mean_power(cp.r_min_m, cp));
  cp.mode = CaptureMode::PowerControlled;
  EXPECT_EQ(mean_power(20.0, cp), mean_power(10.0, cp));
}

TEST(CaptureParams, Validate) {
  CaptureParams cp;
  cp.path_loss_exp = 1.5;
  EXPECT_THROW(cp.validate(), ConfigError);
  cp = {};
  cp.z0 = 0;
  EXPECT_THROW(cp.validate(), ConfigError);
  EXPECT_EQ(parse_capture_mode("geometric"), CaptureMode::Geometric);
  EXPECT_THROW(parse_capture_mode("magic"), ConfigError);
}
