#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "dcfcap/error.hpp"

namespace dcfcap {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// dB -> linear power ratio. +inf maps to +inf.
inline double db_to_linear(double db) {
  if (std::isinf(db)) return db > 0 ? kInfinity : 0.0;
  return std::pow(10.0, db / 10.0);
}

inline double linear_to_db(double ratio) {
  return 10.0 * std::log10(ratio);
}

/// Parses a dB literal; accepts "inf" / "+inf" / "infinity" as +inf.
inline double parse_db(const std::string& text) {
  if (text == "inf" || text == "+inf" || text == "infinity" || text == "Inf") return kInfinity;
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a dB value: '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("not a dB value: '" + text + "'");
  return value;
}

}  // namespace dcfcap
