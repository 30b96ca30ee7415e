#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A sample lies outside the chart or the conic domain, or an input
/// violates a domain precondition (e.g. a near-zero direction vector).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The fundamental tensor is (numerically) degenerate at a sample.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// A function produced a non-finite value during evaluation.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// An ODE integration could not be completed at the requested tolerance.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A field along a curve left the admissible cone where it had to stay inside.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// A numerical precondition of an operation failed (e.g. a connection that
/// does not satisfy the vertical property required by the Jacobi equation).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed call (empty sample set, mismatched dimensions, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler
