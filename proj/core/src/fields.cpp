#include "detlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "detlab/inequalities.hpp"

namespace detlab::fields {

using matkit::cofactor;

RadialConvexFn::RadialConvexFn(double alpha, int n) : alpha_(alpha), n_(n) {
  Vec::check_dim(n);
  if (alpha < 0.0) throw Error("RadialConvexFn: alpha must be >= 0");
}

double RadialConvexFn::value(const Vec& x) const {
  const double r = norm(x);
  if (r <= 1.0) return std::pow(r, 1.0 + alpha_) + 0.5 * (alpha_ - 1.0);
  return 0.5 * (1.0 + alpha_) * r * r;
}

Vec RadialConvexFn::gradient(const Vec& x) const {
  const double r = norm(x);
  if (r <= 1.0) return ((1.0 + alpha_) * std::pow(r, alpha_ - 1.0)) * x;
  return (1.0 + alpha_) * x;
}

RadialJet RadialConvexFn::eval(const Vec& x) const {
  const double r = norm(x);
  if (std::abs(r) <= kSingularTol || std::abs(r - 1.0) <= kSingularTol) {
    throw OnSingularSet("RadialConvexFn: |x| within tolerance of {0, 1}");
  }
  RadialJet jet;
  jet.gradient = Vec(n_);
  jet.hessian = SymMatrix(n_);
  const double a1 = 1.0 + alpha_;
  if (r < 1.0) {
    const double ra1 = std::pow(r, alpha_ - 1.0);
    const double ra3 = std::pow(r, alpha_ - 3.0);
    jet.value = std::pow(r, 1.0 + alpha_) + 0.5 * (alpha_ - 1.0);
    jet.gradient = (a1 * ra1) * x;
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) {
        const double diag = (i == j) ? ra1 : 0.0;
        jet.hessian.set(i, j, a1 * (diag + (alpha_ - 1.0) * ra3 * x[i] * x[j]));
      }
    jet.det_hessian = alpha_ * std::pow(a1, n_) * std::pow(r, n_ * (alpha_ - 1.0));
  } else {
    jet.value = 0.5 * a1 * r * r;
    jet.gradient = a1 * x;
    jet.hessian = SymMatrix::scaled_identity(n_, a1);
    jet.det_hessian = std::pow(a1, n_);
  }
  jet.cof_hessian = cofactor(jet.hessian);
  return jet;
}

BumpField::BumpField(int n, double alpha, double beta, const Vec& x0, double scale_c)
    : n_(n), alpha_(alpha), beta_(beta), x0_(x0), c_(scale_c) {
  Vec::check_dim(n);
  if (beta <= 0.0 || scale_c <= 0.0) throw Error("BumpField: beta and c must be positive");
  if (x0.dim() != n) throw Error("BumpField: x0 has wrong dimension");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidExponent("BumpField: alpha must be in (0,1)");
  hscale_ = 4.0 * c_ / (beta_ * beta_);
  tail_coeff_ = hscale_ * (1.0 + alpha_);
  tail_ = SymMatrix::scaled_identity(n_, 0.5 * tail_coeff_);
}

double BumpField::omega_radius() const { return std::max(1.0, beta_); }

namespace {

// Frobenius norm of cof(H f_alpha) on 0 < r < 1 is
//   (1+alpha)^{n-1} sqrt(1 + (n-1) alpha^2) r^{(alpha-1)(n-1)};
// the direction factor is constant because the cofactor has eigenvalue 1
// along x and alpha across it, up to the shared power of r.
double inner_cof_frobenius_coeff(double alpha, int n) {
  return std::pow(1.0 + alpha, n - 1) * std::sqrt(1.0 + (n - 1) * alpha * alpha);
}

}  // namespace

double BumpField::cof_lp_norm(double p, const IntegrationScheme& scheme) const {
  const double half_beta = 0.5 * beta_;
  const double omega = omega_radius();
  const quadrature::ScalarFn integrand = [this, p](const Vec& x) {
    return std::pow(frobenius_norm(eval(x).cof_hessian), p);
  };
  // Shells resolve the singular ball B_{beta/2}(x0); constant-cofactor outer
  // region is integrated exactly below instead of by panels.
  const quadrature::BallLedger inner =
      quadrature::integrate_ball(integrand, n_, scheme, half_beta, half_beta, x0_);

  // Closed-form remainder of the omitted innermost ball B_{t}(x0), where the
  // integrand is exactly a power of |x - x0|.
  const double t = half_beta * std::pow(0.5, scheme.dyadic_depth);
  const double s_exp = (alpha_ - 1.0) * (n_ - 1) * p;
  const double cof_coeff = std::pow(hscale_, n_ - 1) * inner_cof_frobenius_coeff(alpha_, n_) *
                           std::pow(2.0 / beta_, (alpha_ - 1.0) * (n_ - 1));
  const auto remainder = quadrature::ball_power_integral(s_exp, n_, t);
  if (!remainder) throw Error("cof_lp_norm: cofactor is not p-integrable at the center");
  const double inner_tail = std::pow(cof_coeff, p) * (*remainder);

  // Outside B_{beta/2}(x0) the cofactor is tail_coeff^{n-1} Id exactly.
  const double const_norm = std::pow(tail_coeff_, n_ - 1) * std::sqrt(static_cast<double>(n_));
  const double outer_volume =
      quadrature::unit_ball_volume(n_) * (std::pow(omega, n_) - std::pow(half_beta, n_));
  const double outer = std::pow(const_norm, p) * outer_volume;

  return std::pow(inner.total + inner_tail + outer, 1.0 / p);
}

BumpField BumpField::construct(double p, int n, double beta, double delta, double eps,
                               const Vec& x0, const IntegrationScheme& scheme) {
  if (p < 1.0) throw Error("BumpField::construct: p must be >= 1");
  if (beta <= 0.0 || delta <= 0.0 || eps <= 0.0)
    throw InvalidExponent("BumpField::construct: beta, delta, eps must be positive");
  const double gain = inequalities::exponents(p, n).gain_exponent;
  const double alpha = 1.0 - 1.0 / (gain + eps);
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidExponent("BumpField::construct: alpha equation has no solution in (0,1)");

  BumpField unit(n, alpha, beta, x0, 1.0);
  const double norm_at_unit = unit.cof_lp_norm(p, scheme);
  // cof(H(c phi)) = c^{n-1} cof(H phi), so the norm scales by c^{n-1}.
  const double c = std::pow(delta / (2.0 * norm_at_unit), 1.0 / (n - 1));
  return BumpField(n, alpha, beta, x0, c);
}

double BumpField::value(const Vec& x) const {
  Vec y = (2.0 / beta_) * (x - x0_);
  const double affine =
      2.0 * (1.0 + alpha_) / (beta_ * beta_) * (norm2(x0_) - 2.0 * dot(x, x0_));
  return c_ * (RadialConvexFn(alpha_, n_).value(y) - affine);
}

RadialJet BumpField::eval(const Vec& x) const {
  Vec y = (2.0 / beta_) * (x - x0_);
  const double ry = norm(y);
  if (std::abs(ry) <= RadialConvexFn::kSingularTol ||
      std::abs(ry - 1.0) <= RadialConvexFn::kSingularTol) {
    throw OnSingularSet("BumpField: 2(x-x0)/beta within tolerance of the singular set");
  }
  RadialJet jet;
  jet.gradient = Vec(n_);
  jet.hessian = SymMatrix(n_);
  const double a1 = 1.0 + alpha_;
  const double affine =
      2.0 * a1 / (beta_ * beta_) * (norm2(x0_) - 2.0 * dot(x, x0_));
  if (ry < 1.0) {
    const double ra1 = std::pow(ry, alpha_ - 1.0);
    const double ra3 = std::pow(ry, alpha_ - 3.0);
    jet.value = c_ * (std::pow(ry, 1.0 + alpha_) + 0.5 * (alpha_ - 1.0) - affine);
    jet.gradient = c_ * ((2.0 / beta_) * a1 * ra1 * y + (4.0 * a1 / (beta_ * beta_)) * x0_);
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) {
        const double diag = (i == j) ? ra1 : 0.0;
        jet.hessian.set(i, j, hscale_ * a1 * (diag + (alpha_ - 1.0) * ra3 * y[i] * y[j]));
      }
    jet.det_hessian =
        alpha_ * std::pow(a1, n_) * std::pow(ry, n_ * (alpha_ - 1.0)) * std::pow(hscale_, n_);
  } else {
    jet.value = c_ * (0.5 * a1 * ry * ry - affine);
    jet.gradient = c_ * ((2.0 / beta_) * a1 * y + (4.0 * a1 / (beta_ * beta_)) * x0_);
    jet.hessian = SymMatrix::scaled_identity(n_, tail_coeff_);
    jet.det_hessian = std::pow(tail_coeff_, n_);
  }
  jet.cof_hessian = cofactor(jet.hessian);
  return jet;
}

SmoothedCone::SmoothedCone(double eps_width, int n) : eps_(eps_width), n_(n) {
  Vec::check_dim(n);
  if (eps_width <= 0.0) throw Error("SmoothedCone: eps must be positive");
}

double SmoothedCone::value(const Vec& x) const {
  return std::sqrt(norm2(x) + eps_ * eps_);
}

RadialJet SmoothedCone::eval(const Vec& x) const {
  const double s2 = norm2(x) + eps_ * eps_;
  const double s = std::sqrt(s2);
  RadialJet jet;
  jet.value = s;
  jet.gradient = (1.0 / s) * x;
  jet.hessian = SymMatrix(n_);
  const double inv_s3 = 1.0 / (s2 * s);
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) {
      const double diag = (i == j) ? (1.0 / s) : 0.0;
      jet.hessian.set(i, j, diag - x[i] * x[j] * inv_s3);
    }
  jet.det_hessian = eps_ * eps_ * std::pow(s2, -0.5 * (n_ + 2));
  jet.cof_hessian = cofactor(jet.hessian);
  return jet;
}

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int margin_grid_resolution(int n) { return n <= 3 ? 64 : 16; }

double min_eig_on_grid(const SymMatrix& s_base, const std::vector<TrigTerm>& terms,
                       double scale, int n) {
  const int res = margin_grid_resolution(n);
  double worst = std::numeric_limits<double>::infinity();
  Vec x(n);
  std::array<int, matkit::kMaxDim> idx{};
  while (true) {
    for (int d = 0; d < n; ++d) x[d] = static_cast<double>(idx[static_cast<std::size_t>(d)]) / res;
    SymMatrix h = s_base;
    for (const TrigTerm& t : terms) {
      double kx = 0.0;
      for (int d = 0; d < n; ++d) kx += t.freq[static_cast<std::size_t>(d)] * x[d];
      const double coeff = -scale * t.amplitude * kTwoPi * kTwoPi * std::cos(kTwoPi * kx);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          h.set(i, j, h(i, j) + coeff * t.freq[static_cast<std::size_t>(i)] *
                                    t.freq[static_cast<std::size_t>(j)]);
    }
    worst = std::min(worst, matkit::sym_eigenvalues(h).front());
    int d = n - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == res) idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  return worst;
}

}  // namespace

PeriodicField::PeriodicField(const SymMatrix& s_base, std::vector<TrigTerm> terms, double scale)
    : s_base_(s_base), terms_(std::move(terms)), scale_(scale) {
  for (TrigTerm& t : terms_) t.amplitude *= scale;
  scale_ = scale;
}

PeriodicField PeriodicField::construct(const SymMatrix& s_base, std::vector<TrigTerm> terms,
                                       double margin) {
  const int n = s_base.dim();
  const double base_min = matkit::sym_eigenvalues(s_base).front();
  if (base_min < margin) {
    throw ConvexityMarginViolated("PeriodicField: base matrix eigenvalue below margin");
  }
  if (terms.empty()) return PeriodicField(s_base, std::move(terms), 1.0);

  const double full_min = min_eig_on_grid(s_base, terms, 1.0, n);
  double scale = 1.0;
  if (full_min < margin) {
    // By concavity of the minimal eigenvalue, scaling the perturbation by
    // t = (base_min - margin)/deficit keeps the grid minimum above margin.
    const double deficit = base_min - full_min;
    scale = (base_min - margin) / deficit;
  }
  if (min_eig_on_grid(s_base, terms, scale, n) < margin) {
    throw ConvexityMarginViolated("PeriodicField: rescaling failed to reach the margin");
  }
  return PeriodicField(s_base, std::move(terms), scale);
}

bool PeriodicField::constant() const {
  for (const TrigTerm& t : terms_) {
    if (t.amplitude != 0.0) {
      for (int d = 0; d < dim(); ++d)
        if (t.freq[static_cast<std::size_t>(d)] != 0) return false;
    }
  }
  return true;
}

double PeriodicField::perturbation(const Vec& x) const {
  double v = 0.0;
  for (const TrigTerm& t : terms_) {
    double kx = 0.0;
    for (int d = 0; d < dim(); ++d) kx += t.freq[static_cast<std::size_t>(d)] * x[d];
    v += t.amplitude * std::cos(kTwoPi * kx);
  }
  return v;
}

SymMatrix PeriodicField::hessian_potential(const Vec& x) const {
  const int n = dim();
  SymMatrix h = s_base_;
  for (const TrigTerm& t : terms_) {
    double kx = 0.0;
    for (int d = 0; d < n; ++d) kx += t.freq[static_cast<std::size_t>(d)] * x[d];
    const double coeff = -t.amplitude * kTwoPi * kTwoPi * std::cos(kTwoPi * kx);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        h.set(i, j, h(i, j) + coeff * t.freq[static_cast<std::size_t>(i)] *
                                  t.freq[static_cast<std::size_t>(j)]);
  }
  return h;
}

SymMatrix PeriodicField::eval(const Vec& x) const { return cofactor(hessian_potential(x)); }

PolyBump::PolyBump(const Vec& center_, double radius_, int power_, double amplitude_)
    : center(center_), radius(radius_), power(power_), amplitude(amplitude_) {
  if (radius <= 0.0) throw Error("PolyBump: radius must be positive");
  if (power < 3) throw Error("PolyBump: power must be >= 3 for C^2 regularity");
}

double PolyBump::value(const Vec& x) const {
  const double u = 1.0 - norm2(x - center) / (radius * radius);
  if (u <= 0.0) return 0.0;
  return amplitude * std::pow(u, power);
}

Vec PolyBump::gradient(const Vec& x) const {
  const Vec d = x - center;
  const double u = 1.0 - norm2(d) / (radius * radius);
  if (u <= 0.0) return Vec::zero(dim());
  const double coeff = -2.0 * amplitude * power * std::pow(u, power - 1) / (radius * radius);
  return coeff * d;
}

double PolyBump::second(const Vec& x, int i, int j) const {
  const Vec d = x - center;
  const double r2 = radius * radius;
  const double u = 1.0 - norm2(d) / r2;
  if (u <= 0.0) return 0.0;
  const double k = static_cast<double>(power);
  double s = 4.0 * amplitude * k * (k - 1.0) * std::pow(u, power - 2) * d[i] * d[j] / (r2 * r2);
  if (i == j) s -= 2.0 * amplitude * k * std::pow(u, power - 1) / r2;
  return s;
}

DiagonalField::DiagonalField(std::vector<PolyBump> profiles) : profiles_(std::move(profiles)) {
  const int n = static_cast<int>(profiles_.size());
  Vec::check_dim(n);
  for (const PolyBump& b : profiles_) {
    if (b.dim() != n) throw Error("DiagonalField: profile dimension mismatch");
  }
}

std::pair<SymMatrix, Vec> DiagonalField::eval(const Vec& x) const {
  const int n = dim();
  SymMatrix a(n);
  Vec div(n);
  for (int i = 0; i < n; ++i) {
    a.set(i, i, profiles_[static_cast<std::size_t>(i)].value(x));
    div[i] = profiles_[static_cast<std::size_t>(i)].gradient(x)[i];
  }
  return {a, div};
}

Vec DiagonalField::divergence(const Vec& x) const { return eval(x).second; }

Domain DiagonalField::support_cube() const {
  const int n = dim();
  Vec lo(n), hi(n);
  for (int d = 0; d < n; ++d) {
    lo[d] = std::numeric_limits<double>::infinity();
    hi[d] = -std::numeric_limits<double>::infinity();
  }
  for (const PolyBump& b : profiles_) {
    for (int d = 0; d < n; ++d) {
      lo[d] = std::min(lo[d], b.center[d] - b.radius);
      hi[d] = std::max(hi[d], b.center[d] + b.radius);
    }
  }
  return Domain::cube(lo, hi);
}

MatrixField cofactor_field(const RadialConvexFn& f, double domain_radius) {
  MatrixField field;
  field.n = f.dim();
  field.domain = Domain::ball(Vec::zero(f.dim()), domain_radius, 1.0);
  field.eval = [f](const Vec& x) { return f.eval(x).cof_hessian; };
  field.divergence_free = true;
  return field;
}

MatrixField cofactor_field(const BumpField& f) {
  MatrixField field;
  field.n = f.dim();
  field.domain = Domain::ball(f.center(), f.omega_radius(), f.quadratic_tail_radius());
  field.eval = [f](const Vec& x) { return f.eval(x).cof_hessian; };
  field.divergence_free = true;
  return field;
}

MatrixField cofactor_field(const SmoothedCone& f, double domain_radius) {
  MatrixField field;
  field.n = f.dim();
  field.domain = Domain::ball(Vec::zero(f.dim()), domain_radius, domain_radius);
  field.eval = [f](const Vec& x) { return f.eval(x).cof_hessian; };
  field.divergence_free = true;
  return field;
}

MatrixField as_field(const PeriodicField& f) {
  MatrixField field;
  field.n = f.dim();
  field.domain = Domain::torus(f.dim());
  field.eval = [f](const Vec& x) { return f.eval(x); };
  field.divergence_free = true;
  return field;
}

MatrixField as_field(const DiagonalField& f) {
  MatrixField field;
  field.n = f.dim();
  field.domain = f.support_cube();
  field.eval = [f](const Vec& x) { return f.eval(x).first; };
  field.divergence = [f](const Vec& x) { return f.divergence(x); };
  field.divergence_free = false;
  return field;
}

MatrixField constant_field(const SymMatrix& a, const Domain& domain) {
  MatrixField field;
  field.n = a.dim();
  field.domain = domain;
  field.eval = [a](const Vec&) { return a; };
  field.divergence_free = true;
  return field;
}

ScalarField as_scalar_field(const RadialConvexFn& f) {
  ScalarField s;
  s.n = f.dim();
  s.value = [f](const Vec& x) { return f.value(x); };
  s.hessian = [f](const Vec& x) { return f.eval(x).hessian; };
  s.center = Vec::zero(f.dim());
  s.shell_radius = 1.0;
  return s;
}

ScalarField as_scalar_field(const BumpField& f) {
  ScalarField s;
  s.n = f.dim();
  s.value = [f](const Vec& x) { return f.value(x); };
  s.hessian = [f](const Vec& x) { return f.eval(x).hessian; };
  s.center = f.center();
  s.shell_radius = f.quadratic_tail_radius();
  return s;
}

ScalarField as_scalar_field(const SmoothedCone& f) {
  ScalarField s;
  s.n = f.dim();
  s.value = [f](const Vec& x) { return f.value(x); };
  s.hessian = [f](const Vec& x) { return f.eval(x).hessian; };
  s.center = Vec::zero(f.dim());
  s.shell_radius = 1.0;
  return s;
}

GradientMap gradient_map(const RadialConvexFn& f) {
  GradientMap g;
  g.n = f.dim();
  g.map = [f](const Vec& x) { return f.gradient(x); };
  g.cof_gradient = [f](const Vec& x) { return f.eval(x).cof_hessian; };
  g.center = Vec::zero(f.dim());
  g.shell_radius = 1.0;
  return g;
}

}  // namespace detlab::fields
