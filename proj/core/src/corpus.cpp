#include "detlab/corpus.hpp"

#include <algorithm>
#include <cmath>

namespace detlab::corpus {

Vec random_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

Vec random_unit(Rng& rng, int n) {
  while (true) {
    Vec v = random_vec(rng, n, -1.0, 1.0);
    const double r = norm(v);
    if (r > 0.1) return (1.0 / r) * v;
  }
}

Matrix random_matrix(Rng& rng, int n, double lo, double hi) {
  Matrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

Matrix random_int_matrix(Rng& rng, int n, int lo, int hi) {
  Matrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = static_cast<double>(rng.uniform_int(lo, hi));
  return m;
}

SymMatrix random_psd(Rng& rng, int n) {
  SymMatrix g(n);
  for (int k = 0; k < n + 1; ++k) {
    const Vec v = random_vec(rng, n, -1.0, 1.0);
    g += SymMatrix::outer(v);
  }
  return g;
}

fields::PeriodicField random_periodic_field(Rng& rng, int n) {
  // Base matrix: a convex mix of the identity and a normalized random Gram
  // matrix, so the smallest eigenvalue stays at least 1/2.
  SymMatrix gram = random_psd(rng, n);
  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += gram(i, i);
  gram *= static_cast<double>(n) / std::max(trace, 1e-12);
  SymMatrix s_base = SymMatrix::scaled_identity(n, 0.5) + 0.5 * gram;

  const int count = rng.uniform_int(1, 3);
  std::vector<fields::TrigTerm> terms;
  for (int t = 0; t < count; ++t) {
    fields::TrigTerm term;
    bool nonzero = false;
    while (!nonzero) {
      for (int d = 0; d < n; ++d) {
        term.freq[static_cast<std::size_t>(d)] = rng.uniform_int(-2, 2);
        if (term.freq[static_cast<std::size_t>(d)] != 0) nonzero = true;
      }
    }
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    term.amplitude = sign * rng.uniform(0.01, 0.05);
    terms.push_back(term);
  }
  return fields::PeriodicField::construct(s_base, std::move(terms));
}

fields::DiagonalField random_diagonal_field(Rng& rng, int n) {
  std::vector<PolyBump> profiles;
  for (int i = 0; i < n; ++i) {
    const Vec center = random_vec(rng, n, -0.3, 0.3);
    const double radius = rng.uniform(0.4, 0.8);
    profiles.emplace_back(center, radius, 4, rng.uniform(0.5, 1.5));
  }
  return fields::DiagonalField(std::move(profiles));
}

std::vector<PolyBump> random_bumps_in_ball(Rng& rng, const Vec& center, double R, int count) {
  const int n = center.dim();
  std::vector<PolyBump> bumps;
  for (int k = 0; k < count; ++k) {
    const double rho = rng.uniform(0.0, 0.5 * R);
    const Vec c = center + rho * random_unit(rng, n);
    double radius = rng.uniform(0.2 * R, 0.4 * R);
    radius = std::min(radius, 0.95 * R - rho);
    bumps.emplace_back(c, radius, 6, rng.uniform(0.5, 2.0));
  }
  return bumps;
}

std::vector<std::function<double(const Vec&)>> random_marginal_functions(
    Rng& rng, int n, const quadrature::Domain& cube) {
  std::vector<std::function<double(const Vec&)>> fns;
  for (int i = 0; i < n; ++i) {
    // The i-th function lives on the cube face with coordinate i dropped.
    const int m = n - 1;
    Vec lo(m), hi(m);
    int e = 0;
    for (int d = 0; d < n; ++d) {
      if (d == i) continue;
      lo[e] = cube.lo[d];
      hi[e] = cube.hi[d];
      ++e;
    }
    std::vector<PolyBump> bumps;
    for (int b = 0; b < 2; ++b) {
      Vec c(m);
      double min_half = 1e9;
      for (int d = 0; d < m; ++d) {
        const double half = 0.5 * (hi[d] - lo[d]);
        c[d] = 0.5 * (lo[d] + hi[d]) + rng.uniform(-0.4, 0.4) * half;
        min_half = std::min(min_half, half);
      }
      bumps.emplace_back(c, rng.uniform(0.4, 0.9) * min_half, 4, rng.uniform(0.5, 2.0));
    }
    fns.push_back([bumps](const Vec& x) {
      double s = 0.0;
      for (const PolyBump& b : bumps) s += b.value(x);
      return s;
    });
  }
  return fns;
}

}  // namespace detlab::corpus
