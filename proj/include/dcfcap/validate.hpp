#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcfcap/capture.hpp"
#include "dcfcap/dcf_analytic.hpp"
#include "dcfcap/markov_chain.hpp"
#include "dcfcap/phy_link.hpp"
#include "dcfcap/rng.hpp"
#include "dcfcap/units.hpp"

namespace dcfcap {

struct CheckResult {
  std::string name;
  bool passed = false;
  nlohmann::json detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["passed"] = passed();
    for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return j;
  }
};

struct ValidationOptions {
  /// Basic-access tau under test; swapped out by mutation tests.
  std::function<double(double, const MacParams&)> tau_two_way = dcfcap::tau_two_way;
  long capture_draws = 1'000'000;
  std::uint64_t seed = 20240607;
};

namespace detail {

// (p_col, p_e) grid used by the chain checks; includes P_eq = 1/2.
inline const std::vector<double>& chain_grid() {
  static const std::vector<double> grid{0.0, 0.15, 0.3, 0.5, 0.8};
  return grid;
}

inline CheckResult check_chain(const ValidationOptions& opt) {
  double worst_two = 0.0, worst_four = 0.0, worst_transcribed = 0.0, worst_mass = 0.0;
  for (auto [w, m] : {std::pair{4, 2}, {8, 3}, {16, 4}}) {
    MacParams mac;
    mac.w_min = w;
    mac.max_stage = m;
    for (double pc : chain_grid()) {
      for (double pe : chain_grid()) {
        const double peq = pc + pe - pc * pe;
        const auto two = stationary_chain_oracle(mac, AccessMode::TwoWay, pc, pe);
        const auto four = stationary_chain_oracle(mac, AccessMode::FourWay, pc, pe);
        worst_two = std::max(worst_two, std::abs(opt.tau_two_way(peq, mac) - two.tau));
        worst_four = std::max(worst_four, std::abs(tau_four_way(peq, pc, pe, mac) - four.tau));
        const double tr = tau_four_way_transcribed(peq, pc, pe, mac);
        if (std::isfinite(tr)) worst_transcribed = std::max(worst_transcribed, std::abs(tr - four.tau));
        worst_mass = std::max({worst_mass, std::abs(two.mass - 1.0), std::abs(four.mass - 1.0)});
      }
    }
  }
  CheckResult r;
  r.name = "chain_oracle_equivalence";
  r.passed = worst_two <= 1e-8 && worst_four <= 1e-8 && worst_mass <= 1e-12;
  r.detail = {{"max_abs_dev_two_way", worst_two},
              {"max_abs_dev_four_way", worst_four},
              {"max_abs_dev_four_way_transcribed", worst_transcribed},
              {"max_abs_mass_error", worst_mass},
              {"tolerance_tau", 1e-8},
              {"tolerance_mass", 1e-12}};
  return r;
}

inline CheckResult check_capture(const ValidationOptions& opt) {
  CheckResult r;
  r.name = "capture_monte_carlo";
  r.passed = true;
  Rng rng(opt.seed);
  std::vector<double> powers;
  for (int i : {1, 2, 4}) {
    for (double z0_db : {1.0, 6.0, 24.0}) {
      CaptureParams cp;
      cp.z0 = db_to_linear(z0_db);
      const double expected = capture_conditional(i, cp);
      long hits = 0;
      CollisionDraw draw;
      draw.powers.resize(i + 1);
      for (long t = 0; t < opt.capture_draws; ++t) {
        for (auto& p : draw.powers) p = draw_station_power(1.0, cp, rng.uniform());
        // Powers of exactly 0 (u == 0) are astronomically rare; redraw.
        if (std::any_of(draw.powers.begin(), draw.powers.end(), [](double p) { return p <= 0; })) {
          --t;
          continue;
        }
        if (resolve_collision_locked(draw, cp, 0)) ++hits;
      }
      const double freq = static_cast<double>(hits) / opt.capture_draws;
      const double se = std::sqrt(expected * (1.0 - expected) / opt.capture_draws);
      const double z = se > 0 ? std::abs(freq - expected) / se : 0.0;
      const bool ok = z <= 3.0;
      r.passed = r.passed && ok;
      r.detail.push_back({{"interferers", i}, {"z0_db", z0_db}, {"expected", expected},
                          {"empirical", freq}, {"std_error", se}, {"z_score", z}, {"passed", ok}});
    }
  }
  return r;
}

// Original model solved in the collision probability p by bisection.
inline std::pair<double, double> bianchi_by_bisection(int n, const MacParams& mac) {
  auto tau_of = [&](double p) {
    const double x = 2.0 * p;
    return 2.0 * (1.0 - x) /
           ((1.0 - x) * (mac.w_min + 1.0) + p * mac.w_min * (1.0 - std::pow(x, mac.max_stage)));
  };
  auto h = [&](double p) { return p - (1.0 - std::pow(1.0 - tau_of(p), n - 1)); };
  double lo = 0.0, hi = 0.999999;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid == 0.5) {  // tau_of is 0/0 exactly at 1/2; nudge
      (h(std::nextafter(0.5, 1.0)) > 0 ? hi : lo) = mid;
      continue;
    }
    (h(mid) > 0 ? hi : lo) = mid;
  }
  const double p = 0.5 * (lo + hi);
  return {tau_of(p), p};
}

inline CheckResult check_bianchi_reduction() {
  CheckResult r;
  r.name = "bianchi_reduction";
  MacParams mac;
  CaptureParams none;
  double worst = 0.0;
  for (int n : {2, 5, 10, 20, 50}) {
    const auto s = solve_system(n, mac, AccessMode::TwoWay, 0.0, none);
    const auto [tau, p] = bianchi_by_bisection(n, mac);
    worst = std::max({worst, std::abs(s.tau - tau), std::abs(s.p_col - p)});
  }
  r.passed = worst <= 1e-9;
  r.detail = {{"max_abs_dev", worst}, {"tolerance", 1e-9}};
  return r;
}

inline CheckResult check_fixed_point() {
  CheckResult r;
  r.name = "fixed_point_consistency";
  MacParams mac;
  double worst = 0.0;
  long most_iterations = 0;
  for (auto mode : {AccessMode::TwoWay, AccessMode::FourWay})
    for (int n : {1, 5, 20, 50})
      for (double z0_db : {1.0, 6.0, 24.0, kInfinity})
        for (double pe : {0.0, 0.01, 0.3, 0.9}) {
          CaptureParams cp;
          cp.z0 = db_to_linear(z0_db);
          const auto s = solve_system(n, mac, mode, pe, cp);
          const FixedPointSystem sys(n, mac, mode, pe, cp);
          const auto e = sys(s.tau);
          worst = std::max({worst, std::abs(e.tau_next - s.tau), std::abs(e.p_col - s.p_col),
                            std::abs(e.p_cap - s.p_cap), std::abs(e.p_eq - s.p_eq),
                            std::abs(s.p_eq - (s.p_col + pe - pe * s.p_col))});
          most_iterations = std::max(most_iterations, s.iterations);
        }
  r.passed = worst <= 1e-9;
  r.detail = {{"max_abs_residual", worst}, {"max_iterations", most_iterations}, {"tolerance", 1e-9}};
  return r;
}

inline CheckResult check_ber_closed_form() {
  CheckResult r;
  r.name = "ber_quadrature";
  double worst = 0.0;
  for (double g : {0.1, 1.0, 10.0, 100.0, 1e4}) {
    const double closed = 0.5 * (1.0 - std::sqrt(g / (1.0 + g)));
    worst = std::max(worst, std::abs(ber_rayleigh({ModulationKind::DBPSK}, g) - closed));
  }
  r.passed = worst <= 1e-9;
  r.detail = {{"max_abs_dev", worst}, {"tolerance", 1e-9}};
  return r;
}

}  // namespace detail

inline ValidationReport validate(const ValidationOptions& opt = {}) {
  ValidationReport report;
  report.checks.push_back(detail::check_ber_closed_form());
  report.checks.push_back(detail::check_chain(opt));
  report.checks.push_back(detail::check_capture(opt));
  report.checks.push_back(detail::check_bianchi_reduction());
  report.checks.push_back(detail::check_fixed_point());
  return report;
}

}  // namespace dcfcap
