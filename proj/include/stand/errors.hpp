// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace stand {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Boundary control e_r(s,t) exceeds the maximum thinning rate mid-arc.
class InfeasibleBoundary : public std::runtime_error {
  public:
    InfeasibleBoundary(double t, double required, double e_max)
        : std::runtime_error("boundary control " + std::to_string(required) +
                             " exceeds e_max " + std::to_string(e_max) +
                             " at t=" + std::to_string(t)),
          time(t), required_rate(required) {}
    double time;
    double required_rate;
};

/// Initial state lies outside the validity domain (n < n_min or r >= 1).
class NonViable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// RDI never reaches 1 within the model horizon under zero cutting.
class NoCrossing : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The boundary arc cannot bring n down to n_min within the model horizon.
class NoReach : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Threshold undefined for the given growth function (e.g. gamma_upper >= 1).
class Undefined : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NoFeasiblePolicy : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Scenario file error, carrying the offending line (0 when not line-bound).
class ConfigError : public std::runtime_error {
  public:
    ConfigError(int line, const std::string& msg)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_(line) {}
    int line() const noexcept { return line_; }

  private:
    int line_;
};

} // namespace stand
