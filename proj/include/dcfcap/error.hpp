#pragma once

#include <stdexcept>
#include <string>

namespace dcfcap {

/// Invalid or inconsistent user configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class UnimplementedModulation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The fixed-point solver gave up. Carries the last iterate so callers can
/// report how far off it was.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double last_tau, double residual, long iterations)
      : std::runtime_error(what),
        last_tau_(last_tau),
        residual_(residual),
        iterations_(iterations) {}

  double last_tau() const noexcept { return last_tau_; }
  double residual() const noexcept { return residual_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double last_tau_;
  double residual_;
  long iterations_;
};

}  // namespace dcfcap
