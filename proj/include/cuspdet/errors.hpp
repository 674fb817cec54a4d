#pragma once

#include <stdexcept>
#include <string>

namespace cuspdet {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (negative order, x <= 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A problem instance (operator spec, potential, basis) violates one of its invariants.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// A computation could not reach its accuracy target or hit a guard.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Least-squares fit failed: rank deficiency, too few samples, or residual above ceiling.
class FitError : public NumericalError {
 public:
  FitError(const std::string& what, double condition_number)
      : NumericalError(what), condition_number_(condition_number) {}
  double condition_number() const noexcept { return condition_number_; }

 private:
  double condition_number_;
};

/// -z^2 sits (numerically) on the spectrum: the Wronskian of the fundamental system vanishes.
class EigenvalueProximity : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A truncation radius was too small; carries the radius that would satisfy the guard.
class TruncationError : public NumericalError {
 public:
  TruncationError(const std::string& what, double suggested)
      : NumericalError(what), suggested_(suggested) {}
  double suggested() const noexcept { return suggested_; }

 private:
  double suggested_;
};

}  // namespace cuspdet
