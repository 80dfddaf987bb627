#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcfcap/error.hpp"
#include "dcfcap/units.hpp"

namespace dcfcap {

/// PowerControlled: every station arrives with the same local mean power.
/// Geometric: local mean power follows A * r^-n_p * P_tx.
enum class CaptureMode { PowerControlled, Geometric };

inline std::string to_string(CaptureMode mode) {
  return mode == CaptureMode::PowerControlled ? "power_controlled" : "geometric";
}

inline CaptureMode parse_capture_mode(const std::string& text) {
  if (text == "power_controlled" || text == "PowerControlled") return CaptureMode::PowerControlled;
  if (text == "geometric" || text == "Geometric") return CaptureMode::Geometric;
  throw ConfigError("unknown capture mode '" + text + "'");
}

struct CaptureParams {
  double z0 = kInfinity;  ///< capture ratio (linear); +inf disables capture
  int spreading_factor = 11;
  CaptureMode mode = CaptureMode::PowerControlled;
  double radius_m = 50.0;
  double path_loss_exp = 3.5;
  double path_const = 1.0;
  double tx_power = 1.0;
  double r_min_m = 1.0;

  /// Inverse processing gain of the DSSS correlation receiver.
  double g() const { return 2.0 / (3.0 * spreading_factor); }

  /// SIR threshold a frame must exceed to be decoded during a collision.
  double threshold() const { return z0 * g(); }

  bool capture_enabled() const { return !std::isinf(z0); }

  void validate() const {
    if (!(z0 > 0)) throw ConfigError("z0 must be > 0");
    if (spreading_factor < 1) throw ConfigError("spreading_factor must be >= 1");
    if (!(radius_m > 0)) throw ConfigError("radius_m must be > 0");
    if (!(path_loss_exp >= 2)) throw ConfigError("path_loss_exp must be >= 2");
    if (!(r_min_m > 0) || r_min_m > radius_m) throw ConfigError("r_min_m must be in (0, radius_m]");
  }
};

/// Instantaneous received powers of the frames involved in one collision.
struct CollisionDraw {
  std::vector<double> powers;
  std::vector<std::size_t> station_ids;
};

/// Probability that a given frame survives `interferers` simultaneous frames
/// with i.i.d. Rayleigh fading and equal mean powers: 1 / (1 + z0 g)^i.
inline double capture_conditional(int interferers, const CaptureParams& cp) {
  if (interferers < 0) throw ContractViolation("capture_conditional: interferers must be >= 0");
  if (interferers == 0) return 1.0;
  if (!cp.capture_enabled()) return 0.0;
  return std::exp(-interferers * std::log1p(cp.threshold()));
}

/// Probability that a slot holds a collision of two or more frames in which
/// one frame is captured:
///   sum_{i=1}^{N-1} C(N, i+1) tau^{i+1} (1-tau)^{N-i-1} / (1 + z0 g)^i
inline double capture_total(int n, double tau, const CaptureParams& cp) {
  if (n < 1) throw ContractViolation("capture_total: n must be >= 1");
  if (tau < 0.0 || tau > 1.0) throw ContractViolation("capture_total: tau must be in [0,1]");
  if (n == 1 || tau == 0.0 || !cp.capture_enabled()) return 0.0;

  const double log_survive = std::log1p(cp.threshold());
  if (tau == 1.0) return std::exp(-(n - 1) * log_survive);

  double sum = 0.0;
  if (n <= 50) {
    // C(n, k) by the multiplicative recurrence, exact in double for n <= 50.
    double binom = n;  // C(n, 1)
    for (int i = 1; i <= n - 1; ++i) {
      const int k = i + 1;
      binom = binom * (n - k + 1) / k;
      sum += binom * std::pow(tau, k) * std::pow(1.0 - tau, n - k) *
             std::exp(-i * log_survive);
    }
  } else {
    const double log_tau = std::log(tau);
    const double log_idle = std::log1p(-tau);
    const double lg_n1 = std::lgamma(n + 1.0);
    for (int i = 1; i <= n - 1; ++i) {
      const int k = i + 1;
      const double log_binom = lg_n1 - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
      sum += std::exp(log_binom + k * log_tau + (n - k) * log_idle - i * log_survive);
    }
  }
  return sum;
}

namespace detail {

inline void check_draw(const CollisionDraw& draw) {
  if (draw.powers.size() < 2) throw ContractViolation("resolve_collision: need at least 2 powers");
  if (!draw.station_ids.empty() && draw.station_ids.size() != draw.powers.size())
    throw ContractViolation("resolve_collision: station_ids and powers differ in length");
  for (double p : draw.powers)
    if (!(p > 0)) throw ContractViolation("resolve_collision: powers must be > 0");
}

inline std::size_t id_at(const CollisionDraw& draw, std::size_t index) {
  return draw.station_ids.empty() ? index : draw.station_ids[index];
}

}  // namespace detail

/// Strongest-signal resolution: the station whose SIR exceeds z0 g wins; if
/// several exceed it (possible when z0 g < 1) the largest SIR wins. No winner
/// means a plain collision.
inline std::optional<std::size_t> resolve_collision(const CollisionDraw& draw,
                                                    const CaptureParams& cp) {
  detail::check_draw(draw);
  if (!cp.capture_enabled()) return std::nullopt;
  double total = 0.0;
  for (double p : draw.powers) total += p;

  const double threshold = cp.threshold();
  std::optional<std::size_t> best;
  double best_gamma = 0.0;
  for (std::size_t j = 0; j < draw.powers.size(); ++j) {
    const double gamma = draw.powers[j] / (total - draw.powers[j]);
    if (gamma > threshold && (!best || gamma > best_gamma)) {
      best = j;
      best_gamma = gamma;
    }
  }
  if (!best) return std::nullopt;
  return detail::id_at(draw, *best);
}

/// Locked-receiver resolution: the receiver synchronises on frame `locked`
/// and decodes it iff its SIR exceeds z0 g. With i.i.d. exponential powers the
/// success probability is exactly capture_conditional(size - 1).
inline std::optional<std::size_t> resolve_collision_locked(const CollisionDraw& draw,
                                                           const CaptureParams& cp,
                                                           std::size_t locked) {
  detail::check_draw(draw);
  if (locked >= draw.powers.size()) throw ContractViolation("resolve_collision_locked: bad index");
  if (!cp.capture_enabled()) return std::nullopt;
  double others = 0.0;
  for (std::size_t j = 0; j < draw.powers.size(); ++j)
    if (j != locked) others += draw.powers[j];
  if (draw.powers[locked] / others > cp.threshold()) return detail::id_at(draw, locked);
  return std::nullopt;
}

/// Local mean received power at distance r (clamped to r_min). In
/// PowerControlled mode r is ignored.
inline double mean_power(double r, const CaptureParams& cp) {
  if (cp.mode == CaptureMode::PowerControlled) return cp.path_const * cp.tx_power;
  const double d = std::max(r, cp.r_min_m);
  return cp.path_const * std::pow(d, -cp.path_loss_exp) * cp.tx_power;
}

/// Rayleigh instantaneous power by inversion: -p_o ln(1 - u), u in [0, 1).
inline double draw_station_power(double r, const CaptureParams& cp, double u) {
  if (u < 0.0 || u >= 1.0) throw ContractViolation("draw_station_power: u must be in [0,1)");
  return -mean_power(r, cp) * std::log1p(-u);
}

}  // namespace dcfcap
