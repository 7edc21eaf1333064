#pragma once

// Singularity-aware numerical integration.
//
// Integrals over balls are split into dyadic annuli R 2^{-k-1} < r <= R 2^{-k},
// k = 0..K-1, so a power-type singularity at the center shows up as a geometric
// law in the per-shell sums: for |g| ~ r^s the ratio of consecutive shells of
// |g|^p is exactly 2^{-(s p + n)}. Shell sums therefore both integrate g and
// expose its local exponent, which is how L^q membership thresholds are
// estimated (integrating *at* the threshold is hopeless, the slope is not).
//
// All reductions are pairwise over a fixed index order, so results are
// bit-deterministic for a fixed scheme.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "detlab/errors.hpp"
#include "detlab/matkit.hpp"

namespace detlab::quadrature {

using matkit::SymMatrix;
using matkit::Vec;

using ScalarFn = std::function<double(const Vec&)>;
using MatrixFn = std::function<SymMatrix(const Vec&)>;
/// Writes m values for one sample point; used to integrate several coupled
/// integrands in a single pass over the nodes.
using MultiFn = std::function<void(const Vec&, std::span<double>)>;

struct IntegrationScheme {
  /// Number of dyadic annuli; the innermost shell ends at R 2^{-dyadic_depth}.
  int dyadic_depth = 20;
  /// Gauss-Legendre order in the radial direction of each annulus.
  int radial_nodes = 16;
  /// Azimuthal node count for the sphere rule (n=2: equally spaced angles;
  /// n=3: product of Gauss-Legendre in cos(theta) with angular_nodes/2 nodes
  /// and angular_nodes equal angles). For n=4 there is no sphere rule: shells
  /// are integrated by tensor Gauss nodes on the enclosing cube, windowed by
  /// the annulus indicator, which costs roughly first-order accuracy. Keep
  /// n=4 quadrature out of tight-tolerance paths.
  int angular_nodes = 64;
  /// Per-axis resolution of the cube/torus grids.
  int grid_resolution = 64;
  /// Summation policy; fixed.
  static constexpr const char* summation = "pairwise";
};

/// Deterministic pairwise reduction over a fixed index tree.
double pairwise_sum(std::span<const double> values);

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);
/// Surface measure of the unit sphere S^{n-1} (= n * unit_ball_volume(n)).
double unit_sphere_area(int n);

/// Integral of |x|^s over the ball B_R: n omega_n R^{s+n} / (s+n), or nullopt
/// when s + n <= 0 (divergent).
std::optional<double> ball_power_integral(double s, int n, double R);

struct GaussRule {
  std::vector<double> nodes;    // on (-1, 1)
  std::vector<double> weights;  // positive, sum to 2
};
/// Cached Gauss-Legendre rule of the given order.
const GaussRule& gauss_legendre(int order);

struct BallLedger {
  std::vector<double> shell_integrals;  // k = 0 outermost .. K-1 innermost
  double outer_integral = 0.0;          // geometric panels beyond the shell radius
  double total = 0.0;
};

/// Integral of g over B_{outer_radius}(center) minus the ball of radius
/// shell_radius * 2^{-K}. Dyadic shells cover (shell_radius 2^{-K},
/// shell_radius]; the remaining annulus (shell_radius, outer_radius] is covered
/// by smooth geometric panels whose boundaries sit at shell_radius * 2^j, so
/// a radius-shell_radius interface of the integrand is never crossed by a
/// panel. Radial breakpoints (radii where the integrand loses smoothness, e.g.
/// a test-function support boundary) further split the panels that contain
/// them; split parts of a dyadic shell still accumulate into that shell's
/// ledger entry. Throws NonFiniteSample if g is non-finite at a node.
BallLedger integrate_ball(const ScalarFn& g, int n, const IntegrationScheme& scheme,
                          double shell_radius = 1.0, double outer_radius = 1.0,
                          const Vec& center = Vec(),
                          std::span<const double> radial_breakpoints = {});

/// Same node set as integrate_ball, evaluating m coupled integrands at once.
/// Returns the m totals; reduction order matches the scalar version.
std::vector<double> integrate_ball_multi(const MultiFn& g, int m, int n,
                                         const IntegrationScheme& scheme,
                                         double shell_radius = 1.0,
                                         double outer_radius = 1.0,
                                         const Vec& center = Vec(),
                                         std::span<const double> radial_breakpoints = {});

/// Mean of a Z^n-periodic function over the unit torus (rectangle rule on
/// grid_resolution^n nodes; spectrally accurate by periodicity).
double integrate_torus(const ScalarFn& g, int n, const IntegrationScheme& scheme);
SymMatrix integrate_torus(const MatrixFn& g, int n, const IntegrationScheme& scheme);

/// Composite midpoint rule on [lo, hi]^dim with resolution nodes per axis.
double integrate_cube(const ScalarFn& g, int dim, const Vec& lo, const Vec& hi,
                      int resolution);

struct LpReport {
  double p = 1.0;
  std::vector<double> shell_integrals;  // of |g|^p, outermost first
  double outer_integral = 0.0;
  bool converged = false;    // tail_ratio < 1 - 1e-3
  double fitted_exponent = 0.0;  // s in |g| ~ r^s near the center
  double threshold_q = 0.0;  // n/(-s) if s < 0, +inf sentinel otherwise
  double tail_ratio = 0.0;   // innermost shell / previous shell
  double shell_radius = 1.0;

  double total() const;
};

/// Shell ledger of |g|^p with exponent analysis. The local exponent s of |g|
/// is fitted by least squares on the logarithms of the deepest shells, and the
/// L^q membership threshold near the center is n/(-s).
LpReport lp_dyadic(const ScalarFn& g, double p, int n, const IntegrationScheme& scheme,
                   double shell_radius = 1.0, double outer_radius = 1.0,
                   const Vec& center = Vec());

/// Membership sup-exponent n/(-s) from a fitted report. Throws NotSingular if
/// the fitted exponent is >= 0.
double fit_threshold(const LpReport& report, int n);

/// Integration domains used by field metrics and norms.
struct Domain {
  enum class Kind { Ball, Cube, Torus };
  Kind kind = Kind::Ball;
  Vec center;         // Ball
  double radius = 1;  // Ball: outer radius
  double shell_radius = 1;  // Ball: dyadic-refinement radius (<= radius)
  Vec lo, hi;         // Cube

  static Domain ball(const Vec& center, double radius, double shell_radius);
  static Domain cube(const Vec& lo, const Vec& hi);
  static Domain torus(int n);
};

/// Integral of g over a domain, dispatching to the ball/cube/torus rules.
/// (Torus domains integrate over one period cell, i.e. return the mean.)
double integrate_domain(const ScalarFn& g, int n, const Domain& d,
                        const IntegrationScheme& scheme);

}  // namespace detlab::quadrature
