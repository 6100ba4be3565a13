#pragma once

#include <stdexcept>
#include <string>

namespace ccpt {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad value, inconsistent sizes, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation failed numerically (non-finite state, failed convergence, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Raised by critical_point when the Kerr coefficient vanishes.
class NoCriticalPoint : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Raised when an operation requires a bistable drive but only one steady state exists.
class NoBistability : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Raised when a phase is requested for a vanishing complex amplitude.
class UndefinedPhase : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Raised when a fit is attempted on data that cannot constrain its parameters.
class IllConditionedFit : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace ccpt
