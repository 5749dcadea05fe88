#pragma once

#include <stdexcept>
#include <string>

namespace ergocert {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (bad shapes, negative rates, reducible
/// model where irreducibility is required, off-grid times).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A computed quantity contradicts an identity that must hold.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// An audit step of a certificate failed at a specific time.
class AuditFailure : public InconsistencyError {
 public:
  AuditFailure(const std::string& what, double time, double margin)
      : InconsistencyError(what), time_(time), margin_(margin) {}

  double time() const noexcept { return time_; }
  double margin() const noexcept { return margin_; }

 private:
  double time_;
  double margin_;
};

}  // namespace ergocert
