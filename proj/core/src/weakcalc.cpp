#include "detlab/weakcalc.hpp"

#include <cmath>
#include <limits>

namespace detlab::weakcalc {

namespace {

// Integration region for a pairing against eta: a ball around the field's
// refinement center covering supp(eta), dyadically refined inside the field's
// shell radius so singular sets and branch interfaces sit on panel boundaries.
struct Region {
  Vec center;
  double shell_radius;
  double outer_radius;
  // Radii where the spheres around `center` touch the support boundary of the
  // test function; integrands lose smoothness there.
  std::vector<double> breakpoints;
};

Region pairing_region(const Vec& field_center, double field_shell_radius,
                      const TestFunction& eta) {
  Region region;
  if (field_center.dim() == eta.center.dim()) {
    region.center = field_center;
  } else {
    region.center = eta.center;
  }
  const double offset = norm(eta.center - region.center);
  region.outer_radius = offset + eta.radius;
  region.shell_radius = std::min(field_shell_radius, region.outer_radius);
  // Spheres around the center are tangent to the support boundary at
  // |offset - radius| (the outer tangency offset + radius is the domain edge).
  const double inner_touch = std::abs(offset - eta.radius);
  if (inner_touch > 0.0) region.breakpoints.push_back(inner_touch);
  return region;
}

Region pairing_region(const MatrixField& a, const TestFunction& eta) {
  if (a.domain.kind == quadrature::Domain::Kind::Ball) {
    return pairing_region(a.domain.center, a.domain.shell_radius, eta);
  }
  return pairing_region(eta.center, std::numeric_limits<double>::infinity(), eta);
}

}  // namespace

WeakDivergence weak_divergence(const MatrixField& a, const TestFunction& eta,
                               const IntegrationScheme& scheme) {
  const int n = a.n;
  const Region region = pairing_region(a, eta);

  const quadrature::MultiFn integrand = [&](const Vec& x, std::span<double> out) {
    const auto m = a.eval(x);
    const Vec grad = eta.gradient(x);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += m(i, j) * grad[j];
      out[static_cast<std::size_t>(i)] = s;
    }
    out[static_cast<std::size_t>(n)] = frobenius_norm(m) * norm(grad);
  };

  const std::vector<double> totals = quadrature::integrate_ball_multi(
      integrand, n + 1, n, scheme, region.shell_radius, region.outer_radius, region.center,
      region.breakpoints);

  WeakDivergence result;
  result.residual = Vec(n);
  for (int i = 0; i < n; ++i) result.residual[i] = totals[static_cast<std::size_t>(i)];
  result.denominator = totals[static_cast<std::size_t>(n)];
  result.normalized = (result.denominator > 0.0) ? norm(result.residual) / result.denominator
                                                 : norm(result.residual);
  return result;
}

Vec weak_divergence_residual(const MatrixField& a, const TestFunction& eta,
                             const IntegrationScheme& scheme) {
  return weak_divergence(a, eta, scheme).residual;
}

double weak_hessian_residual(const ScalarField& f, const TestFunction& eta, int i, int j,
                             const IntegrationScheme& scheme) {
  const Region region = pairing_region(f.center, f.shell_radius, eta);
  const quadrature::MultiFn integrand = [&](const Vec& x, std::span<double> out) {
    out[0] = f.value(x) * eta.second(x, i, j);
    out[1] = eta.value(x) * f.hessian(x)(i, j);
  };
  const std::vector<double> totals = quadrature::integrate_ball_multi(
      integrand, 2, f.n, scheme, region.shell_radius, region.outer_radius, region.center,
      region.breakpoints);
  return std::abs(totals[0] - totals[1]);
}

double distributional_jacobian(const GradientMap& u, const TestFunction& eta,
                               const IntegrationScheme& scheme) {
  const Region region = pairing_region(u.center, u.shell_radius, eta);
  const quadrature::ScalarFn integrand = [&](const Vec& x) {
    return dot(u.cof_gradient(x) * u.map(x), eta.gradient(x));
  };
  const double total = quadrature::integrate_ball(integrand, u.n, scheme, region.shell_radius,
                                                  region.outer_radius, region.center,
                                                  region.breakpoints)
                           .total;
  return -total / static_cast<double>(u.n);
}

Vec fd_divergence(const MatrixField& a, const Vec& x, double h) {
  const int n = a.n;
  Vec div(n);
  for (int j = 0; j < n; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const auto mp = a.eval(xp);
    const auto mm = a.eval(xm);
    for (int i = 0; i < n; ++i) div[i] += (mp(i, j) - mm(i, j)) / (2.0 * h);
  }
  return div;
}

}  // namespace detlab::weakcalc
