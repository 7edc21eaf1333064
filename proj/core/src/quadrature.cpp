#include "detlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace detlab::quadrature {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 16) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double unit_ball_volume(int n) {
  switch (n) {
    case 1:
      return 2.0;
    case 2:
      return kPi;
    case 3:
      return 4.0 * kPi / 3.0;
    case 4:
      return kPi * kPi / 2.0;
    default:
      throw Error("unit_ball_volume: n out of range");
  }
}

double unit_sphere_area(int n) { return static_cast<double>(n) * unit_ball_volume(n); }

std::optional<double> ball_power_integral(double s, int n, double R) {
  if (R <= 0.0) throw Error("ball_power_integral: R must be positive");
  if (s + n <= 0.0) return std::nullopt;
  return unit_sphere_area(n) * std::pow(R, s + n) / (s + n);
}

namespace {

GaussRule compute_gauss(int order) {
  if (order < 1) throw Error("gauss_legendre: order must be >= 1");
  GaussRule rule;
  rule.nodes.assign(static_cast<std::size_t>(order), 0.0);
  rule.weights.assign(static_cast<std::size_t>(order), 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Root of P_order near cos(pi (i + 0.75)/(order + 0.5)), refined by Newton.
    double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (2 * i + 1 == order) x = 0.0;  // middle node of odd rules
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(order - 1 - i)] = x;
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.weights[static_cast<std::size_t>(order - 1 - i)] = w;
    rule.weights[static_cast<std::size_t>(i)] = w;
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
  static std::map<int, GaussRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss(order)).first;
  return it->second;
}

namespace {

double checked(double v) {
  if (!std::isfinite(v)) throw NonFiniteSample("non-finite integrand sample");
  return v;
}

Vec origin_or(const Vec& center, int n) {
  if (center.dim() == 0) return Vec::zero(n);
  return center;
}

struct RadialSegment {
  double lo, hi;
  int shell_index;  // 0..K-1 for dyadic shells, -1 for outer panels
};

// Dyadic shells down from `shell_radius`, then geometric panels up to
// `outer_radius`; panel boundaries sit at shell_radius * 2^j. Panels that
// contain a breakpoint are split there, keeping integrands piecewise smooth
// per panel; split parts keep their shell index.
std::vector<RadialSegment> make_segments(double shell_radius, double outer_radius, int depth,
                                         std::span<const double> breakpoints) {
  std::vector<RadialSegment> segments;
  {
    std::vector<RadialSegment> shells;
    double hi = shell_radius;
    for (int k = 0; k < depth; ++k) {
      const double lo = 0.5 * hi;
      shells.push_back({lo, hi, k});
      hi = lo;
    }
    // innermost first is not needed; keep outermost-first order
    segments = std::move(shells);
  }
  double lo = shell_radius;
  while (lo < outer_radius * (1.0 - 1e-15)) {
    const double next = std::min(2.0 * lo, outer_radius);
    segments.push_back({lo, next, -1});
    lo = next;
  }

  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  std::sort(cuts.begin(), cuts.end());
  for (const double cut : cuts) {
    for (std::size_t s = 0; s < segments.size(); ++s) {
      RadialSegment& seg = segments[s];
      const double margin = 1e-12 * seg.hi;
      if (cut > seg.lo + margin && cut < seg.hi - margin) {
        const RadialSegment upper = {cut, seg.hi, seg.shell_index};
        seg.hi = cut;
        segments.insert(segments.begin() + static_cast<std::ptrdiff_t>(s) + 1, upper);
        break;
      }
    }
  }
  return segments;
}

// Invokes f(x, w) for every node of the product rule on the annulus
// lo < r <= hi around `center`, in a fixed order.
template <typename F>
void for_each_annulus_node(int n, const IntegrationScheme& scheme, const Vec& center,
                           double lo, double hi, F&& f) {
  if (n == 4) {
    // Tensor Gauss nodes on the enclosing cube, windowed by the annulus.
    const GaussRule& g = gauss_legendre(scheme.radial_nodes);
    const std::size_t m = g.nodes.size();
    const double scale = hi;
    const double wscale = scale * scale * scale * scale;
    for (std::size_t i0 = 0; i0 < m; ++i0)
      for (std::size_t i1 = 0; i1 < m; ++i1)
        for (std::size_t i2 = 0; i2 < m; ++i2)
          for (std::size_t i3 = 0; i3 < m; ++i3) {
            Vec x(4);
            x[0] = scale * g.nodes[i0];
            x[1] = scale * g.nodes[i1];
            x[2] = scale * g.nodes[i2];
            x[3] = scale * g.nodes[i3];
            const double r = norm(x);
            if (r <= lo || r > hi) continue;
            const double w =
                wscale * g.weights[i0] * g.weights[i1] * g.weights[i2] * g.weights[i3];
            f(center + x, w);
          }
    return;
  }

  const GaussRule& radial = gauss_legendre(scheme.radial_nodes);
  const double mid = 0.5 * (hi + lo);
  const double halfwidth = 0.5 * (hi - lo);

  if (n == 2) {
    const int m = std::max(4, scheme.angular_nodes);
    const double wang = 2.0 * kPi / m;
    for (std::size_t ir = 0; ir < radial.nodes.size(); ++ir) {
      const double r = mid + halfwidth * radial.nodes[ir];
      const double wr = halfwidth * radial.weights[ir] * r;  // r^{n-1} = r
      for (int j = 0; j < m; ++j) {
        const double theta = 2.0 * kPi * (j + 0.5) / m;
        Vec x(2);
        x[0] = r * std::cos(theta);
        x[1] = r * std::sin(theta);
        f(center + x, wr * wang);
      }
    }
    return;
  }

  // n == 3: Gauss-Legendre in cos(theta) x equal angles in phi.
  const int mphi = std::max(4, scheme.angular_nodes);
  const int lz = std::max(2, scheme.angular_nodes / 2);
  const GaussRule& polar = gauss_legendre(lz);
  const double wphi = 2.0 * kPi / mphi;
  for (std::size_t ir = 0; ir < radial.nodes.size(); ++ir) {
    const double r = mid + halfwidth * radial.nodes[ir];
    const double wr = halfwidth * radial.weights[ir] * r * r;
    for (std::size_t iz = 0; iz < polar.nodes.size(); ++iz) {
      const double z = polar.nodes[iz];
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      for (int j = 0; j < mphi; ++j) {
        const double phi = 2.0 * kPi * (j + 0.5) / mphi;
        Vec x(3);
        x[0] = r * rho * std::cos(phi);
        x[1] = r * rho * std::sin(phi);
        x[2] = r * z;
        f(center + x, wr * polar.weights[iz] * wphi);
      }
    }
  }
}

}  // namespace

BallLedger integrate_ball(const ScalarFn& g, int n, const IntegrationScheme& scheme,
                          double shell_radius, double outer_radius, const Vec& center,
                          std::span<const double> radial_breakpoints) {
  if (scheme.dyadic_depth < 1) throw Error("integrate_ball: dyadic_depth must be >= 1");
  if (shell_radius <= 0.0) throw Error("integrate_ball: shell_radius must be positive");
  const Vec c = origin_or(center, n);

  const std::vector<RadialSegment> segments =
      make_segments(shell_radius, outer_radius, scheme.dyadic_depth, radial_breakpoints);

  BallLedger ledger;
  ledger.shell_integrals.assign(static_cast<std::size_t>(scheme.dyadic_depth), 0.0);
  std::vector<double> contribs;
  std::vector<double> panel_values;
  for (const RadialSegment& seg : segments) {
    contribs.clear();
    for_each_annulus_node(n, scheme, c, seg.lo, seg.hi,
                          [&](const Vec& x, double w) { contribs.push_back(w * checked(g(x))); });
    const double value = pairwise_sum(contribs);
    if (seg.shell_index >= 0) {
      ledger.shell_integrals[static_cast<std::size_t>(seg.shell_index)] += value;
    } else {
      panel_values.push_back(value);
    }
  }
  ledger.outer_integral = pairwise_sum(panel_values);

  std::vector<double> all = ledger.shell_integrals;
  all.push_back(ledger.outer_integral);
  ledger.total = pairwise_sum(all);
  return ledger;
}

std::vector<double> integrate_ball_multi(const MultiFn& g, int m, int n,
                                         const IntegrationScheme& scheme, double shell_radius,
                                         double outer_radius, const Vec& center,
                                         std::span<const double> radial_breakpoints) {
  const Vec c = origin_or(center, n);
  const std::vector<RadialSegment> all =
      make_segments(shell_radius, outer_radius, scheme.dyadic_depth, radial_breakpoints);

  std::vector<std::vector<double>> segment_values(static_cast<std::size_t>(m));
  std::vector<std::vector<double>> contribs(static_cast<std::size_t>(m));
  std::vector<double> buffer(static_cast<std::size_t>(m));

  for (const RadialSegment& seg : all) {
    for (auto& v : contribs) v.clear();
    for_each_annulus_node(n, scheme, c, seg.lo, seg.hi, [&](const Vec& x, double w) {
      g(x, std::span<double>(buffer));
      for (int i = 0; i < m; ++i)
        contribs[static_cast<std::size_t>(i)].push_back(w * checked(buffer[static_cast<std::size_t>(i)]));
    });
    for (int i = 0; i < m; ++i)
      segment_values[static_cast<std::size_t>(i)].push_back(
          pairwise_sum(contribs[static_cast<std::size_t>(i)]));
  }

  std::vector<double> totals(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i)
    totals[static_cast<std::size_t>(i)] = pairwise_sum(segment_values[static_cast<std::size_t>(i)]);
  return totals;
}

double integrate_torus(const ScalarFn& g, int n, const IntegrationScheme& scheme) {
  const int res = scheme.grid_resolution;
  if (res < 1) throw Error("integrate_torus: grid_resolution must be >= 1");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(std::pow(res, n)));
  Vec x(n);
  std::array<int, matkit::kMaxDim> idx{};
  while (true) {
    for (int d = 0; d < n; ++d) x[d] = static_cast<double>(idx[static_cast<std::size_t>(d)]) / res;
    values.push_back(checked(g(x)));
    int d = n - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == res) idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  return pairwise_sum(values) / static_cast<double>(values.size());
}

SymMatrix integrate_torus(const MatrixFn& g, int n, const IntegrationScheme& scheme) {
  const int res = scheme.grid_resolution;
  if (res < 1) throw Error("integrate_torus: grid_resolution must be >= 1");
  const int entries = n * (n + 1) / 2;
  std::vector<std::vector<double>> values(static_cast<std::size_t>(entries));
  Vec x(n);
  std::array<int, matkit::kMaxDim> idx{};
  while (true) {
    for (int d = 0; d < n; ++d) x[d] = static_cast<double>(idx[static_cast<std::size_t>(d)]) / res;
    const SymMatrix m = g(x);
    int e = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) values[static_cast<std::size_t>(e++)].push_back(checked(m(i, j)));
    int d = n - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == res) idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  SymMatrix mean(n);
  const double count = static_cast<double>(values.front().size());
  int e = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      mean.set(i, j, pairwise_sum(values[static_cast<std::size_t>(e++)]) / count);
  return mean;
}

double integrate_cube(const ScalarFn& g, int dim, const Vec& lo, const Vec& hi, int resolution) {
  if (resolution < 1) throw Error("integrate_cube: resolution must be >= 1");
  double cell = 1.0;
  for (int d = 0; d < dim; ++d) cell *= (hi[d] - lo[d]) / resolution;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(std::pow(resolution, dim)));
  Vec x(dim);
  std::array<int, matkit::kMaxDim> idx{};
  while (true) {
    for (int d = 0; d < dim; ++d)
      x[d] = lo[d] + (hi[d] - lo[d]) * (idx[static_cast<std::size_t>(d)] + 0.5) / resolution;
    values.push_back(checked(g(x)));
    int d = dim - 1;
    while (d >= 0 && ++idx[static_cast<std::size_t>(d)] == resolution)
      idx[static_cast<std::size_t>(d--)] = 0;
    if (d < 0) break;
  }
  return cell * pairwise_sum(values);
}

double LpReport::total() const {
  std::vector<double> all = shell_integrals;
  all.push_back(outer_integral);
  return pairwise_sum(all);
}

LpReport lp_dyadic(const ScalarFn& g, double p, int n, const IntegrationScheme& scheme,
                   double shell_radius, double outer_radius, const Vec& center) {
  if (p < 1.0) throw Error("lp_dyadic: p must be >= 1");
  const ScalarFn integrand = [&](const Vec& x) { return std::pow(std::abs(g(x)), p); };
  const BallLedger ledger = integrate_ball(integrand, n, scheme, shell_radius, outer_radius, center);

  LpReport report;
  report.p = p;
  report.shell_integrals = ledger.shell_integrals;
  report.outer_integral = ledger.outer_integral;
  report.shell_radius = shell_radius;

  const std::size_t K = report.shell_integrals.size();
  const double last = report.shell_integrals[K - 1];
  const double prev = report.shell_integrals[K - 2];
  if (prev == 0.0) {
    report.tail_ratio = (last == 0.0) ? 0.0 : kInf;
  } else {
    report.tail_ratio = last / prev;
  }
  report.converged = report.tail_ratio < 1.0 - 1e-3;

  // Least-squares slope of log(shell) vs k over the deepest shells; for
  // |g| ~ r^s the shells obey shell_k ~ 2^{-k (s p + n)}.
  const std::size_t window = std::min(K, std::max<std::size_t>(4, K / 2));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (std::size_t k = K - window; k < K; ++k) {
    const double v = report.shell_integrals[k];
    if (!(v > 0.0) || !std::isfinite(v)) continue;
    const double xk = static_cast<double>(k);
    const double yk = std::log(v);
    sx += xk;
    sy += yk;
    sxx += xk * xk;
    sxy += xk * yk;
    ++used;
  }
  if (used >= 3) {
    const double slope = (used * sxy - sx * sy) / (used * sxx - sx * sx);
    report.fitted_exponent = (-slope / std::numbers::ln2 - n) / p;
  } else {
    report.fitted_exponent = std::numeric_limits<double>::quiet_NaN();
  }
  report.threshold_q =
      (report.fitted_exponent < 0.0) ? n / (-report.fitted_exponent) : kInf;
  return report;
}

double fit_threshold(const LpReport& report, int n) {
  if (!(report.fitted_exponent < 0.0)) {
    throw NotSingular("fit_threshold: fitted exponent is not negative");
  }
  return n / (-report.fitted_exponent);
}

Domain Domain::ball(const Vec& center, double radius, double shell_radius) {
  Domain d;
  d.kind = Kind::Ball;
  d.center = center;
  d.radius = radius;
  d.shell_radius = shell_radius;
  return d;
}

Domain Domain::cube(const Vec& lo, const Vec& hi) {
  Domain d;
  d.kind = Kind::Cube;
  d.lo = lo;
  d.hi = hi;
  return d;
}

Domain Domain::torus(int n) {
  Domain d;
  d.kind = Kind::Torus;
  d.center = Vec::zero(n);
  return d;
}

double integrate_domain(const ScalarFn& g, int n, const Domain& d,
                        const IntegrationScheme& scheme) {
  switch (d.kind) {
    case Domain::Kind::Ball:
      return integrate_ball(g, n, scheme, std::min(d.shell_radius, d.radius), d.radius, d.center)
          .total;
    case Domain::Kind::Cube:
      return integrate_cube(g, n, d.lo, d.hi, scheme.grid_resolution);
    case Domain::Kind::Torus:
      return integrate_torus(g, n, scheme);
  }
  throw Error("integrate_domain: unknown domain kind");
}

}  // namespace detlab::quadrature
