#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "dcfcap/error.hpp"

namespace dcfcap {

enum class ModulationKind { DBPSK, DQPSK, CCK5_5, CCK11 };

struct Modulation {
  ModulationKind kind = ModulationKind::DBPSK;

  /// Constellation size; CCK kinds have no BER model here.
  int constellation_size() const {
    switch (kind) {
      case ModulationKind::DBPSK: return 2;
      case ModulationKind::DQPSK: return 4;
      case ModulationKind::CCK5_5:
      case ModulationKind::CCK11: break;
    }
    throw UnimplementedModulation("unimplemented modulation: " + name());
  }

  std::string name() const {
    switch (kind) {
      case ModulationKind::DBPSK: return "DBPSK";
      case ModulationKind::DQPSK: return "DQPSK";
      case ModulationKind::CCK5_5: return "CCK5.5";
      case ModulationKind::CCK11: return "CCK11";
    }
    return "?";
  }
};

inline Modulation parse_modulation(const std::string& text) {
  if (text == "DBPSK" || text == "dbpsk") return {ModulationKind::DBPSK};
  if (text == "DQPSK" || text == "dqpsk") return {ModulationKind::DQPSK};
  if (text == "CCK5.5" || text == "cck5.5") return {ModulationKind::CCK5_5};
  if (text == "CCK11" || text == "cck11") return {ModulationKind::CCK11};
  throw ConfigError("unknown modulation '" + text + "'");
}

/// Link description used to derive the frame error rate of data frames.
/// `snr` is the linear mean SNR per bit (+inf means an error-free channel).
struct LinkModel {
  double snr = 1e6;
  Modulation modulation{};
  std::int64_t payload_bytes = 1024;
  std::int64_t mac_header_bytes = 24;
  std::int64_t plcp_bytes = 16;

  void validate() const {
    if (!(snr > 0)) throw ConfigError("snr must be > 0");
    if (payload_bytes < 1) throw ConfigError("payload_bytes must be >= 1");
    if (mac_header_bytes < 0 || plcp_bytes < 0) throw ConfigError("header sizes must be >= 0");
  }
};

namespace detail {

// Composite 64-point Gauss-Legendre over [a, b] with `panels` equal panels.
template <class F>
double composite_gauss(F&& f, double a, double b, int panels) {
  using Rule = boost::math::quadrature::gauss<double, 64>;
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    sum += Rule::integrate(f, lo, lo + h);
  }
  return sum;
}

// Doubles the panel count until two successive estimates agree to abs_tol.
template <class F>
double integrate_smooth(F&& f, double a, double b, double abs_tol = 1e-13) {
  double previous = composite_gauss(f, a, b, 1);
  for (int panels = 2; panels <= 4096; panels *= 2) {
    const double current = composite_gauss(f, a, b, panels);
    if (std::abs(current - previous) <= abs_tol) return current;
    previous = current;
  }
  return previous;
}

}  // namespace detail

/// Rayleigh-averaged bit error probability for `mod` at mean SNR `snr`.
///
/// MGF form over theta in [0, pi/2]:
///   2/max(log2 M, 2) * sum_{i=1}^{max(M/4,1)} (1/pi) int 1 / (1 + snr log2(M)
///   sin^2((2i-1)pi/M) / sin^2 theta) dtheta
///
/// For M = 2 and M = 4 the prefactor is 1, the sum has one term and the
/// coefficient log2(M) sin^2((2i-1)pi/M) is 1, so both reduce to
/// (1/pi) int sin^2 / (sin^2 + snr), whose closed form is
/// (1 - sqrt(snr / (1 + snr))) / 2.
inline double ber_rayleigh(const Modulation& mod, double snr) {
  const int m = mod.constellation_size();
  if (!(snr > 0)) throw ContractViolation("ber_rayleigh: snr must be > 0");
  if (std::isinf(snr)) return 0.0;

  const double bits = std::log2(static_cast<double>(m));
  const double prefactor = 2.0 / std::max(bits, 2.0);
  const int terms = std::max(m / 4, 1);
  double sum = 0.0;
  for (int i = 1; i <= terms; ++i) {
    const double s = std::sin((2 * i - 1) * std::numbers::pi / m);
    const double coeff = snr * bits * s * s;
    auto integrand = [coeff](double theta) {
      const double s2 = std::sin(theta) * std::sin(theta);
      return s2 / (s2 + coeff);
    };
    sum += detail::integrate_smooth(integrand, 0.0, std::numbers::pi / 2) / std::numbers::pi;
  }
  return std::clamp(prefactor * sum, 0.0, 0.5);
}

/// 1 - (1 - ber)^bits, accurate for tiny ber.
inline double block_error(double ber, double bits) {
  if (ber <= 0.0 || bits <= 0.0) return 0.0;
  if (ber >= 1.0) return 1.0;
  return -std::expm1(bits * std::log1p(-ber));
}

/// Frame error rate from the two bit error rates: the PLCP part always goes
/// at the lowest rate (DBPSK), data and MAC header at the link modulation.
inline double fer_from_ber(double ber_plcp, double ber_data, const LinkModel& link) {
  const double plcp_ok = 1.0 - block_error(ber_plcp, 8.0 * link.plcp_bytes);
  const double data_ok =
      1.0 - block_error(ber_data, 8.0 * (link.payload_bytes + link.mac_header_bytes));
  return std::clamp(1.0 - plcp_ok * data_ok, 0.0, 1.0);
}

inline double fer(const LinkModel& link) {
  link.validate();
  const double ber_plcp = ber_rayleigh(Modulation{ModulationKind::DBPSK}, link.snr);
  const double ber_data = link.modulation.kind == ModulationKind::DBPSK
                              ? ber_plcp
                              : ber_rayleigh(link.modulation, link.snr);
  return fer_from_ber(ber_plcp, ber_data, link);
}

}  // namespace dcfcap
