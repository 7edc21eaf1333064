#include "detlab/inequalities.hpp"

#include <algorithm>
#include <cmath>

#include "detlab/corpus.hpp"
#include "detlab/rng.hpp"
#include "detlab/weakcalc.hpp"

namespace detlab::inequalities {

using matkit::SymMatrix;
using quadrature::Domain;

ExponentData exponents(double p, int n) {
  if (p < 1.0) throw Error("exponents: p must be >= 1");
  if (n < 2) throw Error("exponents: n must be >= 2");
  ExponentData data;
  data.p = p;
  data.n = n;
  const double pn1 = p * (n - 1);
  data.p_star = std::max(0.0, (pn1 - n) / pn1);
  data.gain_exponent = 1.0 / (1.0 - data.p_star);
  data.serre_exponent = 1.0 / (n - 1);
  if (p > 1.0 && p < static_cast<double>(n)) {
    data.open_question_pprime = 1.0 / (1.0 / p - 1.0 / n);
  }
  return data;
}

double serre_gap(const PeriodicField& field, const IntegrationScheme& scheme) {
  const int n = field.dim();
  const double root = 1.0 / static_cast<double>(n - 1);
  const SymMatrix mean_a = quadrature::integrate_torus(
      quadrature::MatrixFn([&field](const Vec& x) { return field.eval(x); }), n, scheme);
  const double mean_detpow = quadrature::integrate_torus(
      quadrature::ScalarFn([&field, root](const Vec& x) {
        return std::pow(std::max(0.0, det(field.eval(x))), root);
      }),
      n, scheme);
  return std::pow(std::max(0.0, det(mean_a)), root) - mean_detpow;
}

namespace {

bool domains_match(const Domain& a, const Domain& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Domain::Kind::Ball:
      return a.radius == b.radius && norm(a.center - b.center) == 0.0;
    case Domain::Kind::Cube:
      return norm(a.lo - b.lo) == 0.0 && norm(a.hi - b.hi) == 0.0;
    case Domain::Kind::Torus:
      return true;
  }
  return false;
}

double lp_norm_over_domain(const quadrature::ScalarFn& g, int n, const Domain& d, double p,
                           const IntegrationScheme& scheme) {
  const quadrature::ScalarFn integrand = [&](const Vec& x) { return std::pow(g(x), p); };
  return std::pow(quadrature::integrate_domain(integrand, n, d, scheme), 1.0 / p);
}

}  // namespace

double field_distance(const MatrixField& a, const MatrixField& b, double p,
                      const IntegrationScheme& scheme) {
  if (a.n != b.n) throw Error("field_distance: dimension mismatch");
  if (!domains_match(a.domain, b.domain)) throw Error("field_distance: fields must share a domain");

  Domain region = a.domain;
  if (region.kind == Domain::Kind::Ball) {
    region.shell_radius = std::min(a.domain.shell_radius, b.domain.shell_radius);
  }

  const double norm_diff = lp_norm_over_domain(
      [&](const Vec& x) { return frobenius_norm(a.eval(x) - b.eval(x)); }, a.n, region, p,
      scheme);

  double div_term = 0.0;
  if (!(a.divergence_free && b.divergence_free)) {
    const bool a_ok = a.divergence_free || static_cast<bool>(a.divergence);
    const bool b_ok = b.divergence_free || static_cast<bool>(b.divergence);
    if (!a_ok || !b_ok) {
      throw DivergenceUnavailable("field_distance: no closed-form divergence available");
    }
    const auto div_of = [](const MatrixField& f, const Vec& x) {
      return f.divergence ? f.divergence(x) : Vec::zero(f.n);
    };
    div_term = lp_norm_over_domain(
        [&](const Vec& x) { return norm(div_of(a, x) - div_of(b, x)); }, a.n, region, p, scheme);
  }
  return norm_diff + div_term;
}

Verdict counterexample_verdict(double p, int n, double eps, double beta, double delta,
                               const Vec& x0, const IntegrationScheme& scheme,
                               std::uint64_t seed) {
  const ExponentData expo = exponents(p, n);
  const fields::BumpField field = fields::BumpField::construct(p, n, beta, delta, eps, x0, scheme);

  Verdict verdict;
  verdict.p = p;
  verdict.n = n;
  verdict.eps = eps;
  verdict.beta = beta;
  verdict.delta = delta;
  verdict.x0 = x0;
  verdict.seed = seed;
  verdict.scheme = scheme;
  verdict.target_threshold = expo.gain_exponent + eps;

  Rng rng(seed);

  // (i) quadratic tail: phi(x) = x^T S x and H phi = 2S, exactly, at exterior
  // samples beta/2 < |x - x0| <= 2 beta.
  {
    const SymMatrix& s = field.quadratic_tail();
    const double tail_coeff = 2.0 * s(0, 0);
    double max_dev = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double r = field.beta() * rng.uniform(0.55, 2.0);
      const Vec x = x0 + r * corpus::random_unit(rng, n);
      const double quadratic = dot(x, s * x);
      const double dev_value =
          std::abs(field.value(x) - quadratic) / (1.0 + std::abs(quadratic));
      const auto jet = field.eval(x);
      double dev_hess = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double expected = (i == j) ? tail_coeff : 0.0;
          dev_hess = std::max(dev_hess, std::abs(jet.hessian(i, j) - expected));
        }
      max_dev = std::max(max_dev, std::max(dev_value, dev_hess / (1.0 + tail_coeff)));
    }
    verdict.tail_max_deviation = max_dev;
    verdict.property_i = max_dev <= verdict.tol_tail;
  }

  // (ii) measured cofactor L^p norm against delta.
  verdict.cof_lp_norm = field.cof_lp_norm(p, scheme);
  verdict.delta = delta;
  verdict.property_ii = verdict.cof_lp_norm <= delta;

  // (iii) blow-up threshold of det(H phi) = det^{1/(n-1)}(cof(H phi)) at x0,
  // from the shell slope; plus non-convergent shells at the target exponent.
  {
    const quadrature::ScalarFn det_fn = [&field](const Vec& x) {
      return field.eval(x).det_hessian;
    };
    const quadrature::LpReport fit = quadrature::lp_dyadic(
        det_fn, 1.0, n, scheme, field.quadratic_tail_radius(), field.quadratic_tail_radius(), x0);
    verdict.fitted_threshold = quadrature::fit_threshold(fit, n);
    const quadrature::LpReport at_threshold = quadrature::lp_dyadic(
        det_fn, verdict.target_threshold, n, scheme, field.quadratic_tail_radius(),
        field.quadratic_tail_radius(), x0);
    verdict.diverges_at_threshold = !at_threshold.converged;
    const double rel =
        std::abs(verdict.fitted_threshold - verdict.target_threshold) / verdict.target_threshold;
    verdict.property_iii = rel <= verdict.tol_threshold_rel && verdict.diverges_at_threshold;
  }

  // Pointwise determinant monotonicity: det(A + M(x)) >= det(M(x)) for a
  // random PSD shift A, sampled across the singular region and the tail.
  {
    const SymMatrix shift = corpus::random_psd(rng, n);
    double min_gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100; ++k) {
      const double r = field.beta() * std::pow(2.0, rng.uniform(-18.0, 1.0));
      const Vec x = x0 + r * corpus::random_unit(rng, n);
      const SymMatrix m = field.eval(x).cof_hessian;
      min_gap = std::min(min_gap, det(shift + m) - det(m));
    }
    verdict.minkowski_min_gap = min_gap;
    verdict.minkowski_step = min_gap >= -verdict.tol_minkowski;
  }

  // Weak divergence of the cofactor field over a seeded bump corpus.
  {
    const MatrixField cof = fields::cofactor_field(field);
    const auto bumps =
        corpus::random_bumps_in_ball(rng, x0, field.quadratic_tail_radius(), 10);
    double worst = 0.0;
    for (const auto& eta : bumps) {
      worst = std::max(worst, weakcalc::weak_divergence(cof, eta, scheme).normalized);
    }
    verdict.max_normalized_residual = worst;
    verdict.divergence_free = worst <= verdict.tol_divergence;
  }

  return verdict;
}

DiagonalReport diagonal_report(const DiagonalField& field, double p,
                               const IntegrationScheme& scheme) {
  const int n = field.dim();
  const Domain cube = field.support_cube();
  const double root = 1.0 / static_cast<double>(n - 1);

  DiagonalReport report;
  report.lhs = lp_norm_over_domain(
      [&](const Vec& x) { return std::pow(std::abs(det(field.eval(x).first)), root); }, n, cube,
      p, scheme);
  report.div_norm = lp_norm_over_domain(
      [&](const Vec& x) { return norm(field.divergence(x)); }, n, cube, p, scheme);
  // Zero field: both norms vanish; report ratio 0 rather than 0/0.
  report.ratio = report.div_norm > 0.0
                     ? report.lhs / std::pow(report.div_norm, n * root)
                     : 0.0;
  return report;
}

std::function<double(const Vec&)> axis_marginal(const DiagonalField& field, int axis, double p,
                                                int gl_order) {
  const int n = field.dim();
  if (axis < 0 || axis >= n) throw Error("axis_marginal: axis out of range");
  const fields::PolyBump profile = field.profiles()[static_cast<std::size_t>(axis)];
  const double lo = profile.center[axis] - profile.radius;
  const double hi = profile.center[axis] + profile.radius;
  const quadrature::GaussRule& rule = quadrature::gauss_legendre(gl_order);

  return [profile, axis, p, lo, hi, &rule, n](const Vec& hat) {
    Vec x(n);
    int e = 0;
    for (int d = 0; d < n; ++d) {
      if (d == axis) continue;
      x[d] = hat[e++];
    }
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::vector<double> contribs;
    contribs.reserve(rule.nodes.size());
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      x[axis] = mid + half * rule.nodes[k];
      const double d = profile.gradient(x)[axis];
      contribs.push_back(half * rule.weights[k] * std::pow(std::abs(d), p));
    }
    return quadrature::pairwise_sum(contribs);
  };
}

double loomis_whitney_gap(const std::vector<std::function<double(const Vec&)>>& g, int n,
                          const quadrature::Domain& cube, const IntegrationScheme& scheme) {
  if (static_cast<int>(g.size()) != n) throw Error("loomis_whitney_gap: need n functions");
  if (cube.kind != Domain::Kind::Cube) throw Error("loomis_whitney_gap: domain must be a cube");
  const int res = scheme.grid_resolution;
  const double root = 1.0 / static_cast<double>(n - 1);

  const auto checked = [](double v) {
    if (v < -1e-12) throw NegativeInput("loomis_whitney_gap: negative sample");
    return std::max(v, 0.0);
  };

  // Marginal L^1 norms on the faces, with the same per-axis midpoint rule the
  // full cube uses, so the n = 2 product case factorizes exactly.
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int m = n - 1;
    Vec lo(m), hi(m);
    int e = 0;
    for (int d = 0; d < n; ++d) {
      if (d == i) continue;
      lo[e] = cube.lo[d];
      hi[e] = cube.hi[d];
      ++e;
    }
    norms[static_cast<std::size_t>(i)] = quadrature::integrate_cube(
        [&](const Vec& hat) { return checked(g[static_cast<std::size_t>(i)](hat)); }, m, lo, hi,
        res);
  }

  const double integral = quadrature::integrate_cube(
      [&](const Vec& x) {
        double prod = 1.0;
        for (int i = 0; i < n; ++i) {
          Vec hat(n - 1);
          int e = 0;
          for (int d = 0; d < n; ++d) {
            if (d == i) continue;
            hat[e++] = x[d];
          }
          prod *= std::pow(checked(g[static_cast<std::size_t>(i)](hat)), root);
        }
        return prod;
      },
      n, cube.lo, cube.hi, res);

  double product = 1.0;
  for (int i = 0; i < n; ++i) product *= std::pow(norms[static_cast<std::size_t>(i)], root);
  return product - integral;
}

}  // namespace detlab::inequalities
