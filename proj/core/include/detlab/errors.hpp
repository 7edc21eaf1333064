#pragma once

#include <stdexcept>
#include <string>

namespace detlab {

/// Base class of every failure detlab reports through exceptions.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Evaluation was requested on (or too close to) a known singular set.
struct OnSingularSet : Error {
  using Error::Error;
};

/// A matrix that must be positive semi-definite is not, at the given tolerance.
struct NotPSD : Error {
  using Error::Error;
};

/// An exponent equation has no admissible solution.
struct InvalidExponent : Error {
  using Error::Error;
};

/// An integrand returned a non-finite value at a quadrature node.
struct NonFiniteSample : Error {
  using Error::Error;
};

/// A function that must be non-negative was negative beyond tolerance.
struct NegativeInput : Error {
  using Error::Error;
};

/// A perturbed quadratic potential could not be rescaled to stay convex.
struct ConvexityMarginViolated : Error {
  using Error::Error;
};

/// Threshold fitting was requested on data with no local singularity.
struct NotSingular : Error {
  using Error::Error;
};

/// A field metric needs divergences that neither field can provide.
struct DivergenceUnavailable : Error {
  using Error::Error;
};

}  // namespace detlab
