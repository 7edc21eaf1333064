#pragma once

// Gradient-image masses of radial convex functions, the f log(1+f) Hardy-type
// norm for non-negative functions, and the smoothed-cone blow-up series: as
// the smoothing width shrinks, the determinant's mass near the tip stays
// bounded (it converges to the volume of the unit ball) while its Hardy norm
// grows without bound.

#include <functional>
#include <span>
#include <vector>

#include "detlab/quadrature.hpp"

namespace detlab::measures {

using quadrature::Domain;
using quadrature::IntegrationScheme;
using quadrature::ScalarFn;

/// Convex radial profile r -> g(r), described by its right derivative (the
/// sup of the subdifferential; deriv_right(0) is the radius of the
/// subdifferential ball at the origin). `value` may be empty when only masses
/// are needed.
struct RadialProfile {
  std::function<double(double)> value;
  std::function<double(double)> deriv_right;
};

RadialProfile cone_profile();                        // g(r) = r
RadialProfile quadratic_profile();                   // g(r) = r^2/2
RadialProfile smoothed_cone_profile(double eps);     // g(r) = sqrt(r^2+eps^2)
/// g' interpolates linearly through (knots[i], slopes[i]) with slopes
/// non-decreasing and non-negative; constant beyond the last knot.
RadialProfile piecewise_quadratic_profile(std::vector<double> knots,
                                          std::vector<double> slopes);

/// Lebesgue measure of the gradient image of the ball B_r for the radial
/// convex function g(|x|): omega_n (sup dg(r))^n, including the
/// subdifferential fill-in at the origin.
double ma_mass_radial(const RadialProfile& profile, double r, int n);

/// int f log(1+f) over the domain. f must be non-negative: node values below
/// -1e-12 throw NegativeInput, roundoff negatives are clamped to zero.
double hardy_norm(const ScalarFn& f, int n, const Domain& domain,
                  const IntegrationScheme& scheme);

struct BlowupRow {
  double eps = 0.0;
  double mass_half_ball = 0.0;   // int_{B_{1/2}} det(H sqrt(r^2+eps^2))
  double hardy_unit_ball = 0.0;  // int_{B_1} det log(1+det)
};

/// Evaluates the smoothed cone along a strictly decreasing list of widths in
/// (0, 1/4]. The mass column tends to omega_n; the Hardy column grows like
/// log(1/eps).
std::vector<BlowupRow> hardy_blowup_series(std::span<const double> eps_list, int n,
                                           const IntegrationScheme& scheme);

}  // namespace detlab::measures
