#ifndef TAXLEVY_ERRORS_HPP
#define TAXLEVY_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace taxlevy {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (negative theta,
/// a barrier above a*(x), a point violating 0 <= y <= theta < x, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The operation exists but not for this input kind (second derivative of a
/// numerically inverted scale function, non-monotone tax profile, ...).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure ran out of budget before meeting its tolerance.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double estimate, double error_estimate)
      : Error(what), estimate_(estimate), error_estimate_(error_estimate) {}

  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double estimate_;
  double error_estimate_;
};

/// Malformed or incomplete run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Broken internal invariant; should be unreachable for valid inputs.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace taxlevy

#endif  // TAXLEVY_ERRORS_HPP
