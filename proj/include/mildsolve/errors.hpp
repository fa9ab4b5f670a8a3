#ifndef MILDSOLVE_ERRORS_HPP
#define MILDSOLVE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mildsolve {

// Base of every error thrown by the library. `kind()` is a stable tag used in
// diagnostic JSON.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

// Caller broke a precondition (dimension mismatch, unordered grid, ...).
class ContractError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract_violation"; }
};

// Argument outside the mathematical domain (t outside (0,T], x <= 0 for Γ).
class DomainError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain_error"; }
};

// Non-finite intermediate or result.
class NumericError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric_error"; }
};

class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double partial, double last)
      : Error(what), partial_sum(partial), last_term(last) {}
  const char* kind() const noexcept override { return "convergence_error"; }

  double partial_sum;
  double last_term;
};

// Picard iteration did not contract as certified.
class NonContractionError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "non_contraction"; }
};

// An iterate left the certified ball.
class BallViolationError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "ball_violation"; }
};

// Certificate inputs make the window unsound (e.g. M_alpha infinite).
class UnsoundConfigurationError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsound_configuration"; }
};

class GluingError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "gluing_error"; }
};

class ConfigError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "config_error"; }
};

class AuditError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "audit_failure"; }
};

class IoError : public Error {
public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

}  // namespace mildsolve

#endif  // MILDSOLVE_ERRORS_HPP
