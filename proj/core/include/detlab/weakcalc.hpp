#pragma once

// Weak (distributional) identity checks: row-wise divergence of matrix fields
// against compactly supported test functions, the integration-by-parts Hessian
// identity, and the distributional Jacobian of gradient maps.
//
// Test functions are C^2 polynomial bumps rather than mollifier exponentials:
// every pairing here uses at most two derivatives, and polynomial bumps are
// integrated exactly by moderate-order Gauss rules.

#include "detlab/fields.hpp"
#include "detlab/matkit.hpp"
#include "detlab/quadrature.hpp"

namespace detlab::weakcalc {

using fields::GradientMap;
using fields::MatrixField;
using fields::ScalarField;
using matkit::Vec;
using quadrature::IntegrationScheme;

/// eta(x) = amplitude ((1 - |x-center|^2/radius^2)_+)^k, k >= 3.
using TestFunction = fields::PolyBump;

struct WeakDivergence {
  Vec residual;              // r_i = int sum_j A_ij d_j eta dx
  double denominator = 0.0;  // int |A|_F |grad eta| dx
  double normalized = 0.0;   // |residual|_2 / denominator
};

/// Pairs the field row-wise with grad eta. For a divergence-free field the
/// residual vanishes up to quadrature error, which shrinks under scheme
/// refinement. Both the residual and the normalizing integral are accumulated
/// over the same nodes in one pass.
WeakDivergence weak_divergence(const MatrixField& a, const TestFunction& eta,
                               const IntegrationScheme& scheme);

Vec weak_divergence_residual(const MatrixField& a, const TestFunction& eta,
                             const IntegrationScheme& scheme);

/// | int f d^2_{ij} eta - int eta (Hf)_{ij} |.
double weak_hessian_residual(const ScalarField& f, const TestFunction& eta, int i, int j,
                             const IntegrationScheme& scheme);

/// -(1/n) int (cof(grad u) u, grad eta) dx.
double distributional_jacobian(const GradientMap& u, const TestFunction& eta,
                               const IntegrationScheme& scheme);

/// Central-difference row divergence at a point where the field is smooth.
Vec fd_divergence(const MatrixField& a, const Vec& x, double h);

}  // namespace detlab::weakcalc
