#pragma once

#include <stdexcept>
#include <string>

namespace bgp {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension-mismatch"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid-argument"; }
};

/// Cholesky failed even after the largest jitter was tried.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, double jitter_tried)
      : Error(what), jitter_tried_(jitter_tried) {}
  const char* kind() const noexcept override { return "factorization-failure"; }
  double jitter_tried() const noexcept { return jitter_tried_; }

 private:
  double jitter_tried_;
};

class NumericError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "numeric-error"; }
};

class DegeneratePendingPoint : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "degenerate-pending-point"; }
};

/// Raised when every posterior sample carries zero weight.
class NoAdmissibleSample : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "no-admissible-sample"; }
};

class UnsupportedKernel : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported-kernel"; }
};

class UnknownBenchmark : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unknown-benchmark"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config-error"; }
};

}  // namespace bgp
