#pragma once

#include <stdexcept>
#include <string>

namespace specdiff {

/// Base class for all library errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad user-facing input: malformed config, unknown key, out-of-range parameter.
struct ConfigError : Error {
  using Error::Error;
};

/// Numerical failure: quadrature did not converge, step size underflow, etc.
struct NumericError : Error {
  using Error::Error;
};

/// Filesystem failure while writing outputs.
struct IoError : Error {
  using Error::Error;
};

/// Evaluation point sits on (or too close to) the boundary of a
/// fixed-reflection-count region, where derivative formulas are discontinuous.
struct OnRegionBoundary : NumericError {
  using NumericError::NumericError;
};

/// Chord length underflow in the closed-form disk map (near-tangential ray).
struct GrazingUnderflow : NumericError {
  using NumericError::NumericError;
};

/// Reflection count exceeded the safety cap in the ray tracer.
struct ReflectionCapExceeded : NumericError {
  using NumericError::NumericError;
};

/// Boundary point passed where an interior point is required.
struct PointOnBoundary : NumericError {
  using NumericError::NumericError;
};

/// Coincident points passed to a two-point kernel.
struct CoincidentPoints : NumericError {
  using NumericError::NumericError;
};

/// Test function violates the Neumann compatibility condition needed for s >= 1/2.
struct NeumannViolation : NumericError {
  using NumericError::NumericError;
};

/// Density input with negative values.
struct NegativeDensity : NumericError {
  using NumericError::NumericError;
};

/// Not enough samples for a statistical estimator.
struct TooFewSamples : NumericError {
  using NumericError::NumericError;
};

/// Singular-integral quadrature failed its internal consistency check.
struct QuadratureNotConverged : NumericError {
  using NumericError::NumericError;
};

/// Sub-step halving hit its limit without reaching an acceptable displacement.
struct StepTooLarge : NumericError {
  using NumericError::NumericError;
};

}  // namespace specdiff
