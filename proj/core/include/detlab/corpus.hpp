#pragma once

// Seeded random instances used by verification suites and the CLI. A fixed
// seed fixes every corpus bit-for-bit.

#include <functional>
#include <vector>

#include "detlab/fields.hpp"
#include "detlab/matkit.hpp"
#include "detlab/rng.hpp"

namespace detlab::corpus {

using fields::PolyBump;
using matkit::Matrix;
using matkit::SymMatrix;
using matkit::Vec;

Vec random_vec(Rng& rng, int n, double lo, double hi);
Vec random_unit(Rng& rng, int n);
Matrix random_matrix(Rng& rng, int n, double lo, double hi);
Matrix random_int_matrix(Rng& rng, int n, int lo, int hi);
/// Gram matrix of n+1 random vectors: PSD by construction.
SymMatrix random_psd(Rng& rng, int n);

/// Trig-perturbed quadratic potential with a convexity margin; amplitudes are
/// randomized and then rescaled by the constructor as needed.
fields::PeriodicField random_periodic_field(Rng& rng, int n);

fields::DiagonalField random_diagonal_field(Rng& rng, int n);

/// C^2 test bumps whose supports stay inside B_{0.95 R}(center).
std::vector<PolyBump> random_bumps_in_ball(Rng& rng, const Vec& center, double R, int count);

/// Non-negative non-product functions of n-1 variables on the projected cube.
std::vector<std::function<double(const Vec&)>> random_marginal_functions(
    Rng& rng, int n, const quadrature::Domain& cube);

}  // namespace detlab::corpus
