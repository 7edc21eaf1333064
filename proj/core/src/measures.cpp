#include "detlab/measures.hpp"

#include <algorithm>
#include <cmath>

#include "detlab/fields.hpp"

namespace detlab::measures {

RadialProfile cone_profile() {
  RadialProfile p;
  p.value = [](double r) { return r; };
  p.deriv_right = [](double) { return 1.0; };
  return p;
}

RadialProfile quadratic_profile() {
  RadialProfile p;
  p.value = [](double r) { return 0.5 * r * r; };
  p.deriv_right = [](double r) { return r; };
  return p;
}

RadialProfile smoothed_cone_profile(double eps) {
  if (eps <= 0.0) throw Error("smoothed_cone_profile: eps must be positive");
  RadialProfile p;
  p.value = [eps](double r) { return std::sqrt(r * r + eps * eps); };
  p.deriv_right = [eps](double r) { return r / std::sqrt(r * r + eps * eps); };
  return p;
}

RadialProfile piecewise_quadratic_profile(std::vector<double> knots, std::vector<double> slopes) {
  if (knots.size() != slopes.size() || knots.size() < 2) {
    throw Error("piecewise_quadratic_profile: need matching knot/slope lists, size >= 2");
  }
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (!(knots[i] < knots[i + 1])) throw Error("piecewise_quadratic_profile: knots must increase");
    if (slopes[i] > slopes[i + 1]) throw Error("piecewise_quadratic_profile: slopes must not decrease");
  }
  if (slopes.front() < 0.0) throw Error("piecewise_quadratic_profile: slopes must be non-negative");
  RadialProfile p;
  p.deriv_right = [knots = std::move(knots), slopes = std::move(slopes)](double r) {
    if (r <= knots.front()) return slopes.front();
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      if (r <= knots[i + 1]) {
        const double t = (r - knots[i]) / (knots[i + 1] - knots[i]);
        return slopes[i] + t * (slopes[i + 1] - slopes[i]);
      }
    }
    return slopes.back();
  };
  return p;
}

double ma_mass_radial(const RadialProfile& profile, double r, int n) {
  if (r <= 0.0) throw Error("ma_mass_radial: r must be positive");
  const double slope = std::max(0.0, profile.deriv_right(r));
  return quadrature::unit_ball_volume(n) * std::pow(slope, n);
}

double hardy_norm(const ScalarFn& f, int n, const Domain& domain,
                  const IntegrationScheme& scheme) {
  const ScalarFn integrand = [&f](const quadrature::Vec& x) {
    double v = f(x);
    if (v < -1e-12) throw NegativeInput("hardy_norm: integrand is negative at a node");
    v = std::max(v, 0.0);
    return v * std::log1p(v);
  };
  return quadrature::integrate_domain(integrand, n, domain, scheme);
}

std::vector<BlowupRow> hardy_blowup_series(std::span<const double> eps_list, int n,
                                           const IntegrationScheme& scheme) {
  if (eps_list.empty()) throw Error("hardy_blowup_series: empty eps list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0 && eps_list[i] <= 0.25))
      throw Error("hardy_blowup_series: widths must lie in (0, 1/4]");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
      throw Error("hardy_blowup_series: widths must strictly decrease");
  }

  std::vector<BlowupRow> rows;
  rows.reserve(eps_list.size());
  const quadrature::Vec origin = quadrature::Vec::zero(n);
  for (const double eps : eps_list) {
    const fields::SmoothedCone cone(eps, n);
    const ScalarFn det_fn = [cone](const quadrature::Vec& x) { return cone.eval(x).det_hessian; };
    BlowupRow row;
    row.eps = eps;
    row.mass_half_ball =
        quadrature::integrate_ball(det_fn, n, scheme, 0.5, 0.5, origin).total;
    row.hardy_unit_ball =
        hardy_norm(det_fn, n, Domain::ball(origin, 1.0, 1.0), scheme);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace detlab::measures
