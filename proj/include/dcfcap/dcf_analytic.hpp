#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "dcfcap/capture.hpp"
#include "dcfcap/error.hpp"
#include "dcfcap/mac_params.hpp"

namespace dcfcap {

/// Fixed point of the coupled (tau, P_col, P_cap, P_eq) system and the
/// throughput-related quantities derived from it.
struct ModelSolution {
  double tau = 0.0;
  double p_col = 0.0;
  double p_cap = 0.0;
  double p_eq = 0.0;
  double p_e = 0.0;
  double p_t = 0.0;
  double p_s = 0.0;
  double s_mbps = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;
  long iterations = 0;
};

namespace detail {

// sum_{i=0}^{n-1} x^i, evaluated term by term so x = 1 needs no special case.
inline double geometric_sum(double x, int n) {
  double sum = 0.0;
  double term = 1.0;
  for (int i = 0; i < n; ++i) {
    sum += term;
    term *= x;
  }
  return sum;
}

// W/2 * sum_i W_i-weighted stage occupancy, i.e. the part of the
// normalisation shared by both chains:
//   W/2 * ((1 - p) * sum_{i<m} (2p)^i + (2p)^m) + 1/2
// which equals (1-2p)(W+1) + pW(1-(2p)^m) over 2(1-2p) without the pole at p = 1/2.
inline double backoff_denominator(double p_eq, const MacParams& mac) {
  const int m = mac.max_stage;
  const double x = 2.0 * p_eq;
  return 0.5 * mac.w_min * ((1.0 - p_eq) * geometric_sum(x, m) + std::pow(x, m)) + 0.5;
}

inline void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation(std::string(what) + " must be in [0,1]");
}

}  // namespace detail

/// Per-slot transmission probability of the basic-access chain:
///   2(1-2p) / ((1-2p)(W+1) + pW(1-(2p)^m)),  p = P_eq
/// with p = 1/2 handled by the regular form.
inline double tau_two_way(double p_eq, const MacParams& mac) {
  detail::check_probability(p_eq, "p_eq");
  return 1.0 / detail::backoff_denominator(p_eq, mac);
}

/// RTS-attempt probability of the RTS/CTS chain (one data-transmit state per
/// stage). Each RTS that gets through spends one extra chain step in the data
/// state, hence the (1 - P_col) term. Same value as tau_four_way_transcribed
/// but regular at P_eq = 1/2.
inline double tau_four_way(double p_eq, double p_col, double p_e, const MacParams& mac) {
  detail::check_probability(p_eq, "p_eq");
  detail::check_probability(p_col, "p_col");
  detail::check_probability(p_e, "p_e");
  return 1.0 / (detail::backoff_denominator(p_eq, mac) + (1.0 - p_col));
}

/// The RTS/CTS closed form exactly as it is usually quoted:
///   2 P_x / (2(1-P_eq) W (1-(2P_eq)^{m-1}) P_eq + P_x (1-P_col)((1-P_e)(W+1)+2)
///            + P_x (1-P_eq^{m-1}) P_eq + (2^m W + 1) P_x P_eq^m),  P_x = 1 - 2 P_eq.
/// Kept to cross-check tau_four_way; 0/0 at P_eq = 1/2.
inline double tau_four_way_transcribed(double p_eq, double p_col, double p_e, const MacParams& mac) {
  const int m = mac.max_stage;
  const double w = mac.w_min;
  const double px = 1.0 - 2.0 * p_eq;
  const double denom = 2.0 * (1.0 - p_eq) * w * (1.0 - std::pow(2.0 * p_eq, m - 1)) * p_eq +
                       px * (1.0 - p_col) * ((1.0 - p_e) * (w + 1.0) + 2.0) +
                       px * (1.0 - std::pow(p_eq, m - 1)) * p_eq +
                       (std::ldexp(w, m) + 1.0) * px * std::pow(p_eq, m);
  return 2.0 * px / denom;
}

/// b(0,0) of the basic-access chain; the other head states follow as
/// b(i,0) = P_eq^i b(0,0) for i < m and b(m,0) = P_eq^m / (1 - P_eq) b(0,0).
inline double b00_two_way(double p_eq, const MacParams& mac) {
  return (1.0 - p_eq) * tau_two_way(p_eq, mac);
}

/// One evaluation of the coupled equations at a trial tau.
struct SystemEval {
  double p_cap = 0.0;
  double p_col = 0.0;
  double p_eq = 0.0;
  double tau_next = 0.0;
};

class FixedPointSystem {
 public:
  FixedPointSystem(int n, const MacParams& mac, AccessMode mode, double p_e, const CaptureParams& cp)
      : n_(n), mac_(mac), mode_(mode), p_e_(p_e), cp_(cp) {
    if (n < 1) throw ContractViolation("solve_system: n must be >= 1");
    detail::check_probability(p_e, "p_e");
    mac.validate();
    cp.validate();
  }

  SystemEval operator()(double tau) const {
    SystemEval e;
    e.p_cap = capture_total(n_, tau, cp_);
    const double busy = -std::expm1((n_ - 1) * std::log1p(-tau));  // 1 - (1-tau)^(N-1)
    e.p_col = std::clamp(busy - e.p_cap, 0.0, 1.0);
    e.p_eq = std::clamp(e.p_col + p_e_ - p_e_ * e.p_col, 0.0, 1.0);
    e.tau_next = mode_ == AccessMode::TwoWay ? tau_two_way(e.p_eq, mac_)
                                              : tau_four_way(e.p_eq, e.p_col, p_e_, mac_);
    return e;
  }

  int n() const { return n_; }
  double p_e() const { return p_e_; }
  int w_min() const { return mac_.w_min; }

 private:
  int n_;
  MacParams mac_;
  AccessMode mode_;
  double p_e_;
  CaptureParams cp_;
};

struct SolverOptions {
  double damping = 0.5;
  double tolerance = 1e-13;
  long max_iterations = 100000;
  long stall_window = 200;  // iterations without improvement before bisecting
};

namespace detail {

inline ModelSolution finish(const FixedPointSystem& system, double tau, long iterations) {
  const SystemEval e = system(tau);
  ModelSolution s;
  s.tau = tau;
  s.p_cap = e.p_cap;
  s.p_col = e.p_col;
  s.p_eq = e.p_eq;
  s.p_e = system.p_e();
  s.residual = std::abs(e.tau_next - tau);
  s.iterations = iterations;
  const int n = system.n();
  s.p_t = -std::expm1(n * std::log1p(-tau));
  s.p_s = s.p_t > 0.0 ? (n * tau * std::pow(1.0 - tau, n - 1) + s.p_cap) / s.p_t : 0.0;
  return s;
}

}  // namespace detail

/// Solves tau = F(tau) by damped iteration, falling back to bisection on
/// F(tau) - tau when the iteration stalls or oscillates.
inline ModelSolution solve_system(const FixedPointSystem& system, const SolverOptions& opt = {}) {
  double tau = 2.0 / (system.w_min() + 1.0);
  double best = std::numeric_limits<double>::infinity();
  long since_best = 0;
  long it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double next = system(tau).tau_next;
    const double residual = std::abs(next - tau);
    if (residual <= opt.tolerance) return detail::finish(system, tau, it);
    if (residual < best * 0.999) {
      best = residual;
      since_best = 0;
    } else if (++since_best > opt.stall_window) {
      break;
    }
    tau = (1.0 - opt.damping) * tau + opt.damping * next;
  }

  // G(tau) = F(tau) - tau is positive near 0 and negative near 1.
  double lo = 1e-12;
  double hi = 1.0 - 1e-12;
  auto g = [&](double t) { return system(t).tau_next - t; };
  if (!(g(lo) > 0.0) || !(g(hi) < 0.0))
    throw SolverError("solve_system: fixed point not bracketed", tau, best, it);
  for (int k = 0; k < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * hi; ++k, ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  tau = std::abs(g(lo)) < std::abs(g(hi)) ? lo : hi;
  ModelSolution s = detail::finish(system, tau, it);
  if (s.residual > 1e-10)
    throw SolverError("solve_system: did not converge", tau, s.residual, it);
  return s;
}

inline ModelSolution solve_system(int n, const MacParams& mac, AccessMode mode, double p_e,
                                  const CaptureParams& cp) {
  return solve_system(FixedPointSystem(n, mac, mode, p_e, cp));
}

/// Saturation throughput in Mbps (payload bits per microsecond):
///   P_t P_s (1-P_e) E[PL] / ((1-P_t) sigma + P_t (1-P_s) T_c
///                            + P_t P_s (1-P_e) T_s + P_t P_s P_e T_e)
inline double throughput(const ModelSolution& sol, const SlotDurations& sd) {
  const double pt = sol.p_t;
  const double ps = sol.p_s;
  const double pe = sol.p_e;
  const double denom = (1.0 - pt) * sd.sigma + pt * (1.0 - ps) * sd.t_c +
                       pt * ps * (1.0 - pe) * sd.t_s + pt * ps * pe * sd.t_e;
  if (!(denom > 0.0)) throw ContractViolation("throughput: non-positive slot length");
  return pt * ps * (1.0 - pe) * sd.e_pl / denom;
}

/// Solve and attach the throughput for a given payload.
inline ModelSolution analyze(int n, const MacParams& mac, AccessMode mode, double p_e,
                             const CaptureParams& cp, std::int64_t payload_bytes) {
  ModelSolution s = solve_system(n, mac, mode, p_e, cp);
  s.s_mbps = throughput(s, slot_durations(mac, mode, payload_bytes));
  return s;
}

/// Maximum throughput at the optimal minimum window:
///   S_m = E[PL] / (T_s + sigma K + T_c (K (e^{1/K} - 1) - 1)),  K = sqrt(T_c / 2 sigma)
/// T_c = 0 returns E[PL] / T_s.
inline double bianchi_s_max(const MacParams& mac, AccessMode mode, std::int64_t payload_bytes) {
  const SlotDurations sd = slot_durations(mac, mode, payload_bytes);
  if (sd.t_c <= 0.0) return sd.e_pl / sd.t_s;
  const double k = std::sqrt(sd.t_c / (2.0 * sd.sigma));
  return sd.e_pl / (sd.t_s + sd.sigma * k + sd.t_c * (k * std::expm1(1.0 / k) - 1.0));
}

/// Ideal-channel, no-capture reference: the original single-chain model
/// (basic-access tau formula for both modes) with the mode's slot durations.
inline ModelSolution bianchi_reference(int n, const MacParams& mac, AccessMode mode,
                                       std::int64_t payload_bytes) {
  CaptureParams no_capture;
  no_capture.z0 = kInfinity;
  ModelSolution s = solve_system(n, mac, AccessMode::TwoWay, 0.0, no_capture);
  s.s_mbps = throughput(s, slot_durations(mac, mode, payload_bytes));
  return s;
}

}  // namespace dcfcap
