#pragma once

#include <stdexcept>
#include <string>

namespace pursuit {

// Base for every error raised by the library. The CLI maps these onto exit
// codes, so each subclass corresponds to one failure category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Lookup outside a stored window.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or insufficient configuration (grid, index range, horizon).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violating a declared invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Non-finite value produced during a computation.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Admissibility problem with no solution for the given parameters.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace pursuit
