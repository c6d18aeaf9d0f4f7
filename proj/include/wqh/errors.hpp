#pragma once

#include <stdexcept>
#include <string>

namespace wqh {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct NotHermitian : Error {
  using Error::Error;
};

struct ClosureDiverged : Error {
  using Error::Error;
};

struct NotAnAlgebra : Error {
  using Error::Error;
};

struct NonCommutingFactors : Error {
  using Error::Error;
};

struct SizeCapExceeded : Error {
  using Error::Error;
};

/// Raised when a tower fails one of its construction-time checks.
/// Carries the identifier of the failing invariant and the measured residual.
struct InvariantViolation : Error {
  std::string invariant_id;
  double residual;
  InvariantViolation(const std::string& id, double r)
      : Error("invariant violated: " + id + " (residual " + std::to_string(r) + ")"),
        invariant_id(id),
        residual(r) {}
};

struct NonDivisibleDimension : Error {
  using Error::Error;
};

struct NotAnEmbedding : Error {
  using Error::Error;
};

struct RankMismatch : Error {
  using Error::Error;
};

struct NotInLevel : Error {
  using Error::Error;
};

struct InsufficientLevels : Error {
  using Error::Error;
};

struct InvalidLevels : Error {
  using Error::Error;
};

struct NotScalarRange : Error {
  using Error::Error;
};

/// Input does not lie in the required (relative commutant) domain.
struct NotInDomain : Error {
  double residual;
  NotInDomain(const std::string& what, double r)
      : Error(what + " (membership residual " + std::to_string(r) + ")"), residual(r) {}
};

struct SingularSystem : Error {
  using Error::Error;
};

struct SingularGram : Error {
  using Error::Error;
};

struct NotScalarIndex : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct UnknownOp : Error {
  using Error::Error;
};

struct UnknownFormat : Error {
  using Error::Error;
};

}  // namespace wqh
