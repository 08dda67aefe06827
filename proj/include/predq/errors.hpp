#pragma once

#include <stdexcept>
#include <string>

namespace predq {

// Base class for all library errors so callers can catch predq failures
// wholesale while still distinguishing the categories below (the CLI maps
// them to distinct exit codes).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid user-supplied configuration: bad parameter values, unknown keys,
// malformed config files.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// A mathematical precondition on the inputs fails (outside the domain of an
// operation): e.g. evaluating a conditional mean where the predicted-time
// density vanishes.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

// The offered load makes the requested steady-state quantity infinite.
class UnstableError : public Error {
 public:
  explicit UnstableError(const std::string& msg, double rho_)
      : Error(msg), rho(rho_) {}
  double rho;  // the offending utilization
};

// Adaptive quadrature failed to reach the requested tolerance. Carries the
// best available estimate and its residual error bound so callers may still
// use the partial result deliberately.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& msg, double best, double resid)
      : Error(msg), best_estimate(best), residual(resid) {}
  double best_estimate;
  double residual;
};

// Busy-period analysis degenerates: the probability that a job initiates a
// level-q busy period is (numerically) zero, so initiator moments are
// undefined at that level.
class DegenerateInitiatorError : public DomainError {
 public:
  explicit DegenerateInitiatorError(const std::string& msg)
      : DomainError(msg) {}
};

}  // namespace predq
