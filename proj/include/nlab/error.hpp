#pragma once

#include <stdexcept>
#include <string>

namespace nlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (unknown family, bad key, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Grid too coarse to resolve a kernel or stencil.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Mismatched shapes or plans; programming errors on the caller side.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A requested region is not covered by the available grid or box.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Missing snapshots or checkpoints for a post-processing request.
class SchedulingError : public Error {
 public:
  using Error::Error;
};

/// Barrier constants cannot satisfy the requested constraints.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// Iterative method failed to converge within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Shooting bracket does not straddle the sought transition.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// Root finding met a non-monotone response; carries the probe table.
class AmbiguousError : public Error {
 public:
  using Error::Error;
};

/// Two convolution engines disagreed beyond tolerance.
class OracleMismatch : public Error {
 public:
  using Error::Error;
};

/// Time step rejected by an admissibility test.
class StepRejected : public Error {
 public:
  StepRejected(const std::string& what, double suggested_dt)
      : Error(what), suggested_dt_(suggested_dt) {}

  double suggested_dt() const noexcept { return suggested_dt_; }

 private:
  double suggested_dt_;
};

}  // namespace nlab
