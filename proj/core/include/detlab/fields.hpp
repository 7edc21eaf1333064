#pragma once

// The explicit function and field families the laboratory studies, all with
// closed-form derivatives:
//
//   RadialConvexFn   r^{1+a} glued to a quadratic at r = 1 (convex, C^1),
//                    Hessian singular at the origin for a < 1;
//   BumpField        the localized rescaling of RadialConvexFn whose Hessian
//                    is exactly a multiple of the identity outside a ball;
//   SmoothedCone     sqrt(r^2 + eps^2), the closed-form convex smoothing of
//                    the cone r;
//   PeriodicField    cofactors of Hessians of (1/2) x^T S x + trig polynomial,
//                    Z^n-periodic, divergence-free, PSD by construction;
//   DiagonalField    diag of compactly supported scalar bumps, with exact
//                    divergence.

#include <functional>
#include <vector>

#include "detlab/errors.hpp"
#include "detlab/matkit.hpp"
#include "detlab/quadrature.hpp"

namespace detlab::fields {

using matkit::SymMatrix;
using matkit::Vec;
using quadrature::Domain;
using quadrature::IntegrationScheme;

/// Pointwise value, gradient and second-order data of a convex function.
struct RadialJet {
  double value = 0.0;
  Vec gradient;
  SymMatrix hessian;
  double det_hessian = 0.0;   // closed form, not det(hessian) recomputed
  SymMatrix cof_hessian;      // cofactor of the hessian
};

/// f(x) = |x|^{1+alpha} + (alpha-1)/2 for |x| <= 1 and (1+alpha)/2 |x|^2
/// beyond; alpha >= 0. Convex, C^1 away from the origin, with
///   H f = (1+alpha) (r^{alpha-1} Id + (alpha-1) r^{alpha-3} x ox x),
///   det H f = alpha (1+alpha)^n r^{n(alpha-1)}
/// on 0 < r < 1 and H f = (1+alpha) Id beyond r = 1.
class RadialConvexFn {
 public:
  static constexpr double kSingularTol = 1e-12;

  RadialConvexFn(double alpha, int n);

  /// Full jet; throws OnSingularSet within kSingularTol of r in {0, 1}.
  RadialJet eval(const Vec& x) const;
  /// Value only; continuous everywhere, no singular-set guard.
  double value(const Vec& x) const;
  /// Gradient only; defined for r > 0.
  Vec gradient(const Vec& x) const;

  double alpha() const { return alpha_; }
  int dim() const { return n_; }

 private:
  double alpha_;
  int n_;
};

/// Localized convex bump: a rescaled RadialConvexFn plus an affine correction,
/// equal to x^T S x exactly outside the ball of radius beta/2 around x0 (the
/// construction is usually stated with the looser radius beta; both radii are
/// exposed). The cofactor of its Hessian has a prescribed small L^p norm and a
/// prescribed determinant blow-up exponent at x0.
class BumpField {
 public:
  /// Direct construction with an explicit scale c.
  BumpField(int n, double alpha, double beta, const Vec& x0, double scale_c);

  /// Solves 1/(1-alpha) = 1/(1-p*) + eps for alpha (throws InvalidExponent if
  /// alpha lands outside (0,1)), then picks the scale c so that the measured
  /// cofactor L^p norm over the ball Omega = B_{max(1,beta)}(x0) is delta/2:
  /// the norm at c = 1 is measured by dyadic quadrature and c is set by the
  /// exact homogeneity cof(H(c phi)) = c^{n-1} cof(H phi); the factor 2 guards
  /// against quadrature error in the contract `norm <= delta`.
  static BumpField construct(double p, int n, double beta, double delta, double eps,
                             const Vec& x0, const IntegrationScheme& scheme);

  /// Jet at x; throws OnSingularSet if 2(x-x0)/beta has norm within 1e-12 of
  /// {0, 1}.
  RadialJet eval(const Vec& x) const;
  double value(const Vec& x) const;

  /// Frobenius L^p norm of the Hessian cofactor over Omega, by dyadic
  /// quadrature plus the closed-form remainder of the innermost ball.
  double cof_lp_norm(double p, const IntegrationScheme& scheme) const;

  const SymMatrix& quadratic_tail() const { return tail_; }  // S
  double quadratic_tail_radius() const { return 0.5 * beta_; }
  double stated_tail_radius() const { return beta_; }
  double omega_radius() const;

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double scale() const { return c_; }
  const Vec& center() const { return x0_; }
  int dim() const { return n_; }

 private:
  int n_;
  double alpha_;
  double beta_;
  Vec x0_;
  double c_;
  double hscale_;      // 4c/beta^2: H phi = hscale * H f_alpha(2(x-x0)/beta)
  double tail_coeff_;  // hscale (1+alpha): H phi outside B_{beta/2} is tail_coeff * Id
  SymMatrix tail_;     // S = tail_coeff/2 * Id
};

/// g(r) = sqrt(r^2 + eps^2): smooth, convex, converging uniformly to the cone
/// r as eps -> 0. Hessian eigenvalues eps^2 (r^2+eps^2)^{-3/2} (radial) and
/// (r^2+eps^2)^{-1/2} (tangential), det = eps^2 (r^2+eps^2)^{-(n+2)/2}.
class SmoothedCone {
 public:
  SmoothedCone(double eps_width, int n);

  RadialJet eval(const Vec& x) const;  // smooth everywhere, never throws
  double value(const Vec& x) const;

  double eps() const { return eps_; }
  int dim() const { return n_; }

 private:
  double eps_;
  int n_;
};

/// One term amplitude * cos(2 pi freq . x) of a trigonometric perturbation.
struct TrigTerm {
  std::array<int, matkit::kMaxDim> freq{};
  double amplitude = 0.0;
};

/// x -> cof(H((1/2) x^T S x + psi(x))) with psi a trig polynomial. The field is
/// Z^n-periodic, symmetric, PSD, and divergence-free row-wise. Construction
/// rescales psi so the minimal Hessian eigenvalue on a verification grid keeps
/// a positive margin; throws ConvexityMarginViolated if the base matrix alone
/// cannot provide it.
class PeriodicField {
 public:
  static PeriodicField construct(const SymMatrix& s_base, std::vector<TrigTerm> terms,
                                 double margin = 1e-6);

  SymMatrix eval(const Vec& x) const;               // cof(H phi)(x)
  SymMatrix hessian_potential(const Vec& x) const;  // H phi(x)
  double perturbation(const Vec& x) const;          // psi(x), after rescaling

  bool constant() const;
  double applied_scale() const { return scale_; }
  const SymMatrix& base() const { return s_base_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  int dim() const { return s_base_.dim(); }

 private:
  PeriodicField(const SymMatrix& s_base, std::vector<TrigTerm> terms, double scale);

  SymMatrix s_base_;
  std::vector<TrigTerm> terms_;  // amplitudes already rescaled
  double scale_ = 1.0;
};

/// amplitude * ((1 - |x-center|^2/radius^2)_+)^power. power >= 3 keeps the
/// second derivatives continuous across the support boundary.
struct PolyBump {
  Vec center;
  double radius = 1.0;
  int power = 4;
  double amplitude = 1.0;

  PolyBump() = default;
  PolyBump(const Vec& center, double radius, int power, double amplitude);

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  double second(const Vec& x, int i, int j) const;
  int dim() const { return center.dim(); }
};

/// A = diag(f_1, ..., f_n) with compactly supported scalar bumps f_i; the
/// divergence (d_1 f_1, ..., d_n f_n) is available in closed form.
class DiagonalField {
 public:
  explicit DiagonalField(std::vector<PolyBump> profiles);

  std::pair<SymMatrix, Vec> eval(const Vec& x) const;
  Vec divergence(const Vec& x) const;

  const std::vector<PolyBump>& profiles() const { return profiles_; }
  /// Axis-aligned cube containing every profile's support.
  Domain support_cube() const;
  int dim() const { return static_cast<int>(profiles_.size()); }

 private:
  std::vector<PolyBump> profiles_;
};

/// Type-erased handle for a symmetric matrix field: the map itself, its
/// integration domain (whose ball variant carries the dyadic-refinement
/// center and radius), and what is known about its divergence.
struct MatrixField {
  int n = 0;
  Domain domain;
  quadrature::MatrixFn eval;
  std::function<Vec(const Vec&)> divergence;  // empty unless closed form known
  bool divergence_free = false;
};

MatrixField cofactor_field(const RadialConvexFn& f, double domain_radius = 2.0);
MatrixField cofactor_field(const BumpField& f);
MatrixField cofactor_field(const SmoothedCone& f, double domain_radius = 1.0);
MatrixField as_field(const PeriodicField& f);
MatrixField as_field(const DiagonalField& f);
MatrixField constant_field(const SymMatrix& a, const Domain& domain);

/// Scalar function with closed-form Hessian, for weak-identity checks.
struct ScalarField {
  int n = 0;
  quadrature::ScalarFn value;
  quadrature::MatrixFn hessian;
  Vec center;                // dyadic-refinement center
  double shell_radius = 1.0; // radius of the dyadic region around it
};

ScalarField as_scalar_field(const RadialConvexFn& f);
ScalarField as_scalar_field(const BumpField& f);
ScalarField as_scalar_field(const SmoothedCone& f);

/// Vector map u with closed-form cof(grad u), for distributional Jacobians.
struct GradientMap {
  int n = 0;
  std::function<Vec(const Vec&)> map;
  quadrature::MatrixFn cof_gradient;
  Vec center;
  double shell_radius = 1.0;
};

GradientMap gradient_map(const RadialConvexFn& f);

}  // namespace detlab::fields
