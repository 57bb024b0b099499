#pragma once

#include <stdexcept>
#include <string>

namespace snls {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument to an operation (p < 1, m <= 0, t index out of range, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two fields that must share a grid do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or Inf.
class NumericFailure : public Error {
 public:
  NumericFailure(const std::string& what, double time = 0.0)
      : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Explicit stepping refused because dt * max|k|^2 exceeds the stability bound.
class CflViolation : public Error {
 public:
  using Error::Error;
};

/// Picard window shrank below the minimum length without contracting.
class NoContraction : public Error {
 public:
  using Error::Error;
};

/// Configuration text rejected; the message names the offending key or value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A run left the regime an operation is defined for (e.g. a blowup where a
/// global solution was required).
class RegimeError : public Error {
 public:
  using Error::Error;
};

}  // namespace snls
