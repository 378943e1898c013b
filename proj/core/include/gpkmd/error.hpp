#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gpkmd {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV, JSON).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error(what), row_(row) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  /// 1-based line number of the offending row, 0 when not applicable.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_ = 0;
};

/// Too few snapshots for the requested operation.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the operation's domain (dimension mismatch, bad index, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The GP system matrix could not be factorized even after jitter.
class FitError : public Error {
 public:
  FitError(const std::string& what, double condition_estimate)
      : Error(what), condition_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Two Ritz values coincide, so the Vandermonde system is singular.
class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

/// The reference-task component of a Ritz vector is (numerically) zero.
class ReferenceDegenerateError : public Error {
 public:
  using Error::Error;
};

/// ODE integration diverged or the step size underflowed.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_valid_time)
      : Error(what), last_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_time_; }

 private:
  double last_time_;
};

/// Newton iteration for the power-flow equilibrium did not converge.
class EquilibriumError : public Error {
 public:
  EquilibriumError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Invalid configuration value or unreadable/unwritable file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gpkmd
