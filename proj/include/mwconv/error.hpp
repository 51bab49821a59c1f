#pragma once

#include <stdexcept>
#include <string>

namespace mwconv {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input value (negative rate, zero density, ...). Validation class.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A closed-form or perturbative predictor was asked outside its regime.
class RegimeError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Configuration text or command-line value rejected.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Base of numerical failures (exit code 2 at the CLI).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// No coupling connects the ground states, so the steady state is not unique.
class DegenerateSteadyState : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError {
 public:
  ConditioningError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double last_good_zeta)
      : NumericalError(what), last_good_zeta_(last_good_zeta) {}
  double last_good_zeta() const noexcept { return last_good_zeta_; }

 private:
  double last_good_zeta_;
};

}  // namespace mwconv
