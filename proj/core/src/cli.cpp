#include "detlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "detlab/corpus.hpp"
#include "detlab/fields.hpp"
#include "detlab/inequalities.hpp"
#include "detlab/matkit.hpp"
#include "detlab/measures.hpp"
#include "detlab/quadrature.hpp"
#include "detlab/rng.hpp"
#include "detlab/weakcalc.hpp"

namespace detlab::cli {

using json = nlohmann::ordered_json;
using matkit::SymMatrix;
using matkit::Vec;
using quadrature::IntegrationScheme;

namespace {

// ---------------------------------------------------------------------------
// config plumbing
// ---------------------------------------------------------------------------

Vec default_x0(int n) {
  const double pattern[matkit::kMaxDim] = {0.3, -0.1, 0.2, -0.2};
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = pattern[i];
  return x;
}

std::vector<double> default_eps_list() {
  std::vector<double> eps;
  for (int k = 4; k <= 10; ++k) eps.push_back(std::pow(2.0, -k));
  return eps;
}

std::vector<double> default_r_list() {
  std::vector<double> r;
  for (int k = 1; k <= 10; ++k) r.push_back(0.1 * k);
  return r;
}

RunConfig normalized(RunConfig config) {
  if (config.x0.empty()) {
    const Vec x = default_x0(config.n);
    for (int i = 0; i < config.n; ++i) config.x0.push_back(x[i]);
  }
  if (config.eps_list.empty()) config.eps_list = default_eps_list();
  if (config.r_list.empty()) config.r_list = default_r_list();
  return config;
}

Vec vec_from(const std::vector<double>& values, int n, const char* what) {
  if (static_cast<int>(values.size()) != n) {
    throw Error(std::string(what) + ": expected " + std::to_string(n) + " components");
  }
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = values[static_cast<std::size_t>(i)];
  return v;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const char* where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) throw Error(std::string(where) + ": unknown key \"" + item.key() + "\"");
  }
}

json scheme_to_json(const IntegrationScheme& scheme) {
  json j;
  j["dyadic_depth"] = scheme.dyadic_depth;
  j["radial_nodes"] = scheme.radial_nodes;
  j["angular_nodes"] = scheme.angular_nodes;
  j["grid_resolution"] = scheme.grid_resolution;
  j["summation"] = IntegrationScheme::summation;
  return j;
}

IntegrationScheme scheme_from_json(const json& j) {
  reject_unknown_keys(
      j, {"dyadic_depth", "radial_nodes", "angular_nodes", "grid_resolution", "summation"},
      "scheme");
  IntegrationScheme scheme;
  if (j.contains("dyadic_depth")) scheme.dyadic_depth = j["dyadic_depth"].get<int>();
  if (j.contains("radial_nodes")) scheme.radial_nodes = j["radial_nodes"].get<int>();
  if (j.contains("angular_nodes")) scheme.angular_nodes = j["angular_nodes"].get<int>();
  if (j.contains("grid_resolution")) scheme.grid_resolution = j["grid_resolution"].get<int>();
  if (j.contains("summation") && j["summation"].get<std::string>() != "pairwise") {
    throw Error("scheme: only pairwise summation is supported");
  }
  return scheme;
}

json config_to_json_obj(const RunConfig& config) {
  json j;
  j["subcommand"] = config.subcommand;
  j["n"] = config.n;
  j["p"] = config.p;
  j["eps"] = config.eps;
  j["alpha"] = config.alpha;
  j["beta"] = config.beta;
  j["delta"] = config.delta;
  j["x0"] = config.x0;
  j["eps_list"] = config.eps_list;
  j["r_list"] = config.r_list;
  j["profile"] = config.profile;
  j["i"] = config.deriv_i;
  j["j"] = config.deriv_j;
  j["count"] = config.count;
  if (config.field_json.empty()) {
    j["field"] = nullptr;
  } else {
    j["field"] = json::parse(config.field_json);
  }
  j["scheme"] = scheme_to_json(config.scheme);
  j["seed"] = config.seed;
  j["format"] = config.format;
  return j;
}

RunConfig config_from_json_obj(const json& j) {
  reject_unknown_keys(j,
                      {"subcommand", "n", "p", "eps", "alpha", "beta", "delta", "x0", "eps_list",
                       "r_list", "profile", "i", "j", "count", "field", "scheme", "seed",
                       "format"},
                      "config");
  RunConfig config;
  if (!j.contains("subcommand")) throw Error("config: missing \"subcommand\"");
  config.subcommand = j["subcommand"].get<std::string>();
  if (j.contains("n")) config.n = j["n"].get<int>();
  if (j.contains("p")) config.p = j["p"].get<double>();
  if (j.contains("eps")) config.eps = j["eps"].get<double>();
  if (j.contains("alpha")) config.alpha = j["alpha"].get<double>();
  if (j.contains("beta")) config.beta = j["beta"].get<double>();
  if (j.contains("delta")) config.delta = j["delta"].get<double>();
  if (j.contains("x0")) config.x0 = j["x0"].get<std::vector<double>>();
  if (j.contains("eps_list")) config.eps_list = j["eps_list"].get<std::vector<double>>();
  if (j.contains("r_list")) config.r_list = j["r_list"].get<std::vector<double>>();
  if (j.contains("profile")) config.profile = j["profile"].get<std::string>();
  if (j.contains("i")) config.deriv_i = j["i"].get<int>();
  if (j.contains("j")) config.deriv_j = j["j"].get<int>();
  if (j.contains("count")) config.count = j["count"].get<int>();
  if (j.contains("field") && !j["field"].is_null()) config.field_json = j["field"].dump();
  if (j.contains("scheme")) config.scheme = scheme_from_json(j["scheme"]);
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("format")) config.format = j["format"].get<std::string>();
  if (config.format != "json" && config.format != "csv") {
    throw Error("config: format must be \"json\" or \"csv\"");
  }
  return config;
}

// ---------------------------------------------------------------------------
// field-description records
// ---------------------------------------------------------------------------

struct FieldHandle {
  std::string family;
  int n = 0;
  std::optional<fields::RadialConvexFn> f_alpha;
  std::optional<fields::BumpField> bump;
  std::optional<fields::SmoothedCone> smoothed_cone;
  std::optional<fields::PeriodicField> periodic;
  std::optional<fields::DiagonalField> diagonal;
};

SymMatrix sym_from_json(const json& j, int n, const char* where) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw Error(std::string(where) + ": expected an " + std::to_string(n) + "x" +
                std::to_string(n) + " array");
  }
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw Error(std::string(where) + ": ragged matrix");
    }
    for (int k = i; k < n; ++k) {
      const double upper = row[static_cast<std::size_t>(k)].get<double>();
      const double lower = j[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)].get<double>();
      if (upper != lower) throw Error(std::string(where) + ": matrix must be symmetric");
      m.set(i, k, upper);
    }
  }
  return m;
}

FieldHandle parse_field(const std::string& text, const IntegrationScheme& scheme) {
  const json j = json::parse(text);
  if (!j.is_object() || !j.contains("family") || !j.contains("n")) {
    throw Error("field record: need at least {family, n}");
  }
  FieldHandle handle;
  handle.family = j["family"].get<std::string>();
  handle.n = j["n"].get<int>();
  const int n = handle.n;

  if (handle.family == "f_alpha") {
    reject_unknown_keys(j, {"family", "n", "alpha"}, "field record");
    handle.f_alpha.emplace(j.value("alpha", 0.5), n);
  } else if (handle.family == "bump") {
    reject_unknown_keys(j, {"family", "n", "p", "beta", "delta", "eps", "x0"}, "field record");
    const Vec x0 = vec_from(j["x0"].get<std::vector<double>>(), n, "field record x0");
    handle.bump = fields::BumpField::construct(j["p"].get<double>(), n, j["beta"].get<double>(),
                                               j["delta"].get<double>(), j["eps"].get<double>(),
                                               x0, scheme);
  } else if (handle.family == "smoothed_cone") {
    reject_unknown_keys(j, {"family", "n", "eps"}, "field record");
    handle.smoothed_cone.emplace(j["eps"].get<double>(), n);
  } else if (handle.family == "periodic") {
    reject_unknown_keys(j, {"family", "n", "s_base", "terms"}, "field record");
    const SymMatrix s_base = sym_from_json(j["s_base"], n, "field record s_base");
    std::vector<fields::TrigTerm> terms;
    for (const auto& tj : j["terms"]) {
      reject_unknown_keys(tj, {"freq", "amplitude"}, "field record term");
      fields::TrigTerm term;
      const auto freq = tj["freq"].get<std::vector<int>>();
      if (static_cast<int>(freq.size()) != n) throw Error("field record: freq length mismatch");
      for (int d = 0; d < n; ++d) term.freq[static_cast<std::size_t>(d)] = freq[static_cast<std::size_t>(d)];
      term.amplitude = tj["amplitude"].get<double>();
      terms.push_back(term);
    }
    handle.periodic = fields::PeriodicField::construct(s_base, std::move(terms));
  } else if (handle.family == "diagonal") {
    reject_unknown_keys(j, {"family", "n", "profiles"}, "field record");
    std::vector<fields::PolyBump> profiles;
    for (const auto& pj : j["profiles"]) {
      reject_unknown_keys(pj, {"center", "radius", "power", "amplitude"}, "field record profile");
      profiles.emplace_back(vec_from(pj["center"].get<std::vector<double>>(), n, "profile center"),
                            pj["radius"].get<double>(), pj.value("power", 4),
                            pj.value("amplitude", 1.0));
    }
    handle.diagonal.emplace(std::move(profiles));
  } else {
    throw Error("field record: unknown family \"" + handle.family + "\"");
  }
  return handle;
}

// ---------------------------------------------------------------------------
// small numeric helpers
// ---------------------------------------------------------------------------

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
    syy += y[i] * y[i];
  }
  LineFit fit;
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / m;
  const double ss_tot = syy - sy * sy / m;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

// Derivative checks cascade: the gradient is compared against central
// differences of values, the Hessian against central differences of the
// gradient. Second differences of values would sit on the eps/h^2
// cancellation floor (~1e-5 relative at h = 1e-5), masking real defects.

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  const int n = x.dim();
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

matkit::Matrix fd_hessian(const std::function<Vec(const Vec&)>& grad, const Vec& x, double h) {
  const int n = x.dim();
  matkit::Matrix m(n);
  for (int j = 0; j < n; ++j) {
    Vec xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vec gp = grad(xp);
    const Vec gm = grad(xm);
    for (int i = 0; i < n; ++i) m(i, j) = (gp[i] - gm[i]) / (2.0 * h);
  }
  return m;
}

double rel_dev(const matkit::Matrix& got, const SymMatrix& want) {
  return frobenius_norm(got - want.matrix()) / std::max(frobenius_norm(want), 1e-30);
}

double rel_dev_vec(const Vec& got, const Vec& want) {
  return norm(got - want) / std::max(norm(want), 1e-30);
}

// A sample radius in (0.05, 0.95) or (1.05, 2): both branches of the radial
// families, away from the interface and the origin.
double two_window_radius(Rng& rng) {
  const double u = rng.uniform();
  if (u < 0.5) return 0.05 + 0.9 * (2.0 * u);
  return 1.05 + 0.95 * (2.0 * (u - 0.5));
}

void add(std::vector<CheckResult>& rows, const std::string& check, double value, double target,
         double tolerance, bool pass) {
  rows.push_back({check, value, target, tolerance, pass});
}

/// pass iff value <= target + tolerance
void add_upper(std::vector<CheckResult>& rows, const std::string& check, double value,
               double target, double tolerance) {
  add(rows, check, value, target, tolerance, value <= target + tolerance);
}

/// pass iff value >= target - tolerance
void add_lower(std::vector<CheckResult>& rows, const std::string& check, double value,
               double target, double tolerance) {
  add(rows, check, value, target, tolerance, value >= target - tolerance);
}

void add_info(std::vector<CheckResult>& rows, const std::string& check, double value) {
  add(rows, check, value, value, 0.0, true);
}

// ---------------------------------------------------------------------------
// subcommand runners
// ---------------------------------------------------------------------------

void run_exponents(const RunConfig& config, Report& report) {
  const auto data = inequalities::exponents(config.p, config.n);
  auto& rows = report.results;
  add_info(rows, "p_star", data.p_star);
  add_info(rows, "gain_exponent", data.gain_exponent);
  add_info(rows, "serre_exponent", data.serre_exponent);
  if (data.open_question_pprime) add_info(rows, "open_question_pprime", *data.open_question_pprime);
  add_upper(rows, "gain_identity_residual",
            std::abs(data.gain_exponent * (1.0 - data.p_star) - 1.0), 0.0, 1e-12);
  const double kink = static_cast<double>(config.n) / (config.n - 1);
  const bool below = config.p <= kink + 1e-15;
  add(rows, "kink_consistency", below == (data.p_star == 0.0) ? 1.0 : 0.0, 1.0, 0.0,
      below == (data.p_star == 0.0));
}

void run_verify_matkit(const RunConfig& config, Report& report) {
  Rng rng(config.seed);
  auto& rows = report.results;

  double worst_identity = 0.0;
  for (int n = 2; n <= 4; ++n) {
    for (int k = 0; k < config.count * 10; ++k) {
      const auto m = corpus::random_matrix(rng, n, -10.0, 10.0);
      auto prod = matkit::Matrix::zero(n);
      const auto cof = matkit::cofactor(m);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) s += m(i, l) * cof(l, j);
          prod(i, j) = s;
        }
      const double d = det(m);
      for (int i = 0; i < n; ++i) prod(i, i) -= d;
      const double scale = 1.0 + std::pow(max_abs(m), n);
      worst_identity = std::max(worst_identity, max_abs(prod) / scale);
    }
  }
  add_upper(rows, "cofactor_identity_residual", worst_identity, 0.0, 1e-11);

  double worst_transpose = 0.0;
  for (int n = 2; n <= 4; ++n) {
    for (int k = 0; k < config.count * 10; ++k) {
      const auto m = corpus::random_matrix(rng, n, -2.0, 2.0);
      worst_transpose = std::max(
          worst_transpose,
          max_abs(matkit::cofactor(m.transposed()) - matkit::cofactor(m).transposed()));
    }
  }
  add_upper(rows, "cofactor_transpose_residual", worst_transpose, 0.0, 1e-12);

  double worst_lemma = 0.0;
  for (int n = 2; n <= 4; ++n) {
    for (int k = 0; k < config.count * 10; ++k) {
      const auto a = corpus::random_matrix(rng, n, -3.0, 3.0);
      const Vec u = corpus::random_vec(rng, n, -2.0, 2.0);
      const Vec v = corpus::random_vec(rng, n, -2.0, 2.0);
      const double lhs = det(a + matkit::Matrix::outer(u, v));
      worst_lemma = std::max(worst_lemma,
                             matkit::det_lemma_residual(a, u, v) / (1.0 + std::abs(lhs)));
    }
  }
  add_upper(rows, "det_lemma_relative_residual", worst_lemma, 0.0, 1e-12);

  double min_gap = std::numeric_limits<double>::infinity();
  for (int n = 2; n <= 3; ++n) {
    for (int k = 0; k < config.count * 20; ++k) {
      const auto a = corpus::random_psd(rng, n);
      const auto b = corpus::random_psd(rng, n);
      min_gap = std::min(min_gap, matkit::minkowski_gap(a, b));
    }
  }
  add_lower(rows, "minkowski_min_gap", min_gap, 0.0, 1e-10);

  double worst_prop = 0.0;
  for (int n = 2; n <= 3; ++n) {
    for (const double lambda : {0.0, 0.7, 2.4}) {
      const auto a = corpus::random_psd(rng, n);
      worst_prop = std::max(worst_prop, std::abs(matkit::minkowski_gap(a, lambda * a)));
    }
  }
  add_upper(rows, "minkowski_proportional_equality", worst_prop, 0.0, 1e-10);

  const bool indefinite_rejected =
      !matkit::psd_check(SymMatrix::diagonal(Vec{1.0, -1.0}), 1e-10);
  add(rows, "psd_indefinite_detected", indefinite_rejected ? 1.0 : 0.0, 1.0, 0.0,
      indefinite_rejected);
  const bool identity_ok = matkit::psd_check(SymMatrix::identity(3), 0.0);
  add(rows, "psd_identity_accepted", identity_ok ? 1.0 : 0.0, 1.0, 0.0, identity_ok);
}

FieldHandle field_for(const RunConfig& config) {
  if (!config.field_json.empty()) return parse_field(config.field_json, config.scheme);
  FieldHandle handle;
  if (config.subcommand == "divergence-check") {
    handle.family = "bump";
    handle.n = config.n;
    handle.bump = fields::BumpField::construct(config.p, config.n, config.beta, config.delta,
                                               config.eps, vec_from(config.x0, config.n, "x0"),
                                               config.scheme);
  } else {
    handle.family = "f_alpha";
    handle.n = config.n;
    handle.f_alpha.emplace(config.alpha, config.n);
  }
  return handle;
}

void run_fields_check(const RunConfig& config, Report& report) {
  const FieldHandle handle = field_for(config);
  Rng rng(config.seed);
  auto& rows = report.results;
  const int n = handle.n;
  const double fd_step = 1e-5;

  if (handle.family == "f_alpha") {
    const auto& f = *handle.f_alpha;
    double jump = 0.0;
    for (int k = 0; k < 16; ++k) {
      const Vec dir = corpus::random_unit(rng, n);
      jump = std::max(jump, std::abs(f.value((1.0 - 1e-8) * dir) - f.value((1.0 + 1e-8) * dir)));
    }
    add_upper(rows, "interface_continuity_jump", jump, 0.0, 1e-6);

    double worst_fd = 0.0, worst_det = 0.0, min_eig = std::numeric_limits<double>::infinity();
    for (int k = 0; k < config.count * 4; ++k) {
      const Vec x = two_window_radius(rng) * corpus::random_unit(rng, n);
      const auto jet = f.eval(x);
      worst_fd = std::max(
          worst_fd, rel_dev(fd_hessian([&f](const Vec& y) { return f.value(y); }, x, fd_step),
                            jet.hessian));
      worst_det = std::max(worst_det, std::abs(jet.det_hessian - det(jet.hessian)) /
                                          std::max(std::abs(jet.det_hessian), 1e-30));
      min_eig = std::min(min_eig, matkit::sym_eigenvalues(jet.cof_hessian).front());
    }
    add_upper(rows, "hessian_fd_relative_deviation", worst_fd, 0.0, 1e-6);
    add_upper(rows, "det_formula_relative_deviation", worst_det, 0.0, 1e-10);
    add_lower(rows, "cofactor_min_eigenvalue", min_eig, 0.0, 1e-10);
  } else if (handle.family == "bump") {
    const auto& f = *handle.bump;
    const SymMatrix& s = f.quadratic_tail();
    const double tail_coeff = 2.0 * s(0, 0);
    double tail_value_dev = 0.0, tail_hess_dev = 0.0;
    for (int k = 0; k < 20; ++k) {
      const double r = f.beta() * rng.uniform(0.55, 2.0);
      const Vec x = f.center() + r * corpus::random_unit(rng, n);
      const double quadratic = dot(x, s * x);
      tail_value_dev = std::max(tail_value_dev, std::abs(f.value(x) - quadratic) /
                                                    (1.0 + std::abs(quadratic)));
      const auto jet = f.eval(x);
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          const double expected = (i == j) ? tail_coeff : 0.0;
          tail_hess_dev =
              std::max(tail_hess_dev, std::abs(jet.hessian(i, j) - expected) / (1.0 + tail_coeff));
        }
    }
    add_upper(rows, "tail_value_deviation", tail_value_dev, 0.0, 1e-12);
    add_upper(rows, "tail_hessian_deviation", tail_hess_dev, 0.0, 1e-12);

    double worst_fd = 0.0;
    double min_eig = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 20; ++k) {
      const double ry = two_window_radius(rng);
      const Vec x = f.center() + (0.5 * f.beta() * ry) * corpus::random_unit(rng, n);
      const auto jet = f.eval(x);
      worst_fd = std::max(
          worst_fd, rel_dev(fd_hessian([&f](const Vec& y) { return f.value(y); }, x, fd_step),
                            jet.hessian));
      min_eig = std::min(min_eig, matkit::sym_eigenvalues(jet.cof_hessian).front());
    }
    add_upper(rows, "hessian_fd_relative_deviation", worst_fd, 0.0, 1e-6);
    add_lower(rows, "cofactor_min_eigenvalue", min_eig, 0.0, 1e-10);
    add_upper(rows, "cofactor_lp_norm", f.cof_lp_norm(config.p, config.scheme), config.delta, 0.0);
  } else if (handle.family == "smoothed_cone") {
    const auto& f = *handle.smoothed_cone;
    double worst_fd = 0.0, worst_det = 0.0, min_eig = std::numeric_limits<double>::infinity();
    for (int k = 0; k < config.count * 2; ++k) {
      const Vec x = rng.uniform(0.0, 1.5) * corpus::random_unit(rng, n);
      const auto jet = f.eval(x);
      worst_fd = std::max(
          worst_fd, rel_dev(fd_hessian([&f](const Vec& y) { return f.value(y); }, x, fd_step),
                            jet.hessian));
      worst_det = std::max(worst_det, std::abs(jet.det_hessian - det(jet.hessian)) /
                                          std::max(std::abs(jet.det_hessian), 1e-30));
      min_eig = std::min(min_eig, matkit::sym_eigenvalues(jet.cof_hessian).front());
    }
    add_upper(rows, "hessian_fd_relative_deviation", worst_fd, 0.0, 1e-6);
    add_upper(rows, "det_formula_relative_deviation", worst_det, 0.0, 1e-10);
    add_lower(rows, "cofactor_min_eigenvalue", min_eig, 0.0, 1e-10);
  } else if (handle.family == "periodic") {
    const auto& f = *handle.periodic;
    double periodicity = 0.0;
    double min_eig = std::numeric_limits<double>::infinity();
    for (int k = 0; k < config.count * 10; ++k) {
      const Vec x = corpus::random_vec(rng, n, -1.0, 1.0);
      const SymMatrix a = f.eval(x);
      min_eig = std::min(min_eig, matkit::sym_eigenvalues(a).front());
      for (int d = 0; d < n; ++d) {
        Vec shifted = x;
        shifted[d] += 1.0;
        periodicity = std::max(periodicity, max_abs(f.eval(shifted) - a));
      }
    }
    add_upper(rows, "periodicity_deviation", periodicity, 0.0, 1e-12);
    add_lower(rows, "field_min_eigenvalue", min_eig, 0.0, 1e-10);

    const fields::MatrixField field = fields::as_field(f);
    Vec cell_center(n);
    for (int d = 0; d < n; ++d) cell_center[d] = 0.5;
    double worst = 0.0;
    for (const auto& eta : corpus::random_bumps_in_ball(rng, cell_center, 0.45, 5)) {
      worst = std::max(worst, weakcalc::weak_divergence(field, eta, config.scheme).normalized);
    }
    add_upper(rows, "weak_divergence_normalized", worst, 0.0, 1e-5);
  } else if (handle.family == "diagonal") {
    const auto& f = *handle.diagonal;
    const auto cube = f.support_cube();
    double worst_fd = 0.0;
    for (int k = 0; k < config.count * 4; ++k) {
      Vec x(n);
      for (int d = 0; d < n; ++d) x[d] = rng.uniform(cube.lo[d], cube.hi[d]);
      const Vec closed = f.divergence(x);
      Vec fd(n);
      for (int d = 0; d < n; ++d) {
        Vec xp = x, xm = x;
        xp[d] += fd_step;
        xm[d] -= fd_step;
        fd[d] = (f.eval(xp).first(d, d) - f.eval(xm).first(d, d)) / (2.0 * fd_step);
      }
      worst_fd = std::max(worst_fd, norm(fd - closed) / std::max(norm(closed), 1.0));
    }
    add_upper(rows, "divergence_fd_relative_deviation", worst_fd, 0.0, 1e-6);

    double outside = 0.0;
    for (int k = 0; k < 20; ++k) {
      Vec x(n);
      for (int d = 0; d < n; ++d) x[d] = cube.hi[d] + rng.uniform(0.1, 1.0);
      outside = std::max(outside, max_abs(f.eval(x).first) + norm(f.divergence(x)));
    }
    add_upper(rows, "outside_support_zero", outside, 0.0, 0.0);
  }
}

void run_lp_scan(const RunConfig& config, Report& report) {
  const FieldHandle handle = field_for(config);
  auto& rows = report.results;
  const int n = handle.n;

  quadrature::ScalarFn det_fn;
  Vec center = Vec::zero(n);
  double shell_radius = 1.0;
  std::optional<double> analytic_threshold;
  if (handle.family == "f_alpha") {
    const auto f = *handle.f_alpha;
    det_fn = [f](const Vec& x) { return f.eval(x).det_hessian; };
    if (f.alpha() > 0.0) analytic_threshold = 1.0 / (1.0 - f.alpha());
  } else if (handle.family == "bump") {
    const auto f = *handle.bump;
    det_fn = [f](const Vec& x) { return f.eval(x).det_hessian; };
    center = f.center();
    shell_radius = f.quadratic_tail_radius();
    analytic_threshold = 1.0 / (1.0 - f.alpha());
  } else if (handle.family == "smoothed_cone") {
    const auto f = *handle.smoothed_cone;
    det_fn = [f](const Vec& x) { return f.eval(x).det_hessian; };
  } else {
    throw Error("lp-scan: supported families are f_alpha, bump, smoothed_cone");
  }

  const auto lp = quadrature::lp_dyadic(det_fn, config.p, n, config.scheme, shell_radius,
                                        shell_radius, center);
  add_info(rows, "fitted_exponent", lp.fitted_exponent);
  add_info(rows, "tail_ratio", lp.tail_ratio);
  add_info(rows, "converged", lp.converged ? 1.0 : 0.0);
  add_info(rows, "total", lp.total());
  if (analytic_threshold) {
    const double q = quadrature::fit_threshold(lp, n);
    add_upper(rows, "threshold_relative_error", std::abs(q - *analytic_threshold) / *analytic_threshold,
              0.0, 0.02);
    add_info(rows, "threshold_q", q);
  } else {
    add_info(rows, "threshold_q", lp.threshold_q);
  }
}

void run_divergence_check(const RunConfig& config, Report& report) {
  const FieldHandle handle = field_for(config);
  Rng rng(config.seed);
  auto& rows = report.results;

  fields::MatrixField field;
  Vec corpus_center;
  double corpus_radius = 0.0;
  if (handle.family == "bump") {
    field = fields::cofactor_field(*handle.bump);
    corpus_center = handle.bump->center();
    corpus_radius = handle.bump->quadratic_tail_radius();
  } else if (handle.family == "f_alpha") {
    field = fields::cofactor_field(*handle.f_alpha);
    corpus_center = Vec::zero(handle.n);
    corpus_radius = 0.95;
  } else if (handle.family == "smoothed_cone") {
    field = fields::cofactor_field(*handle.smoothed_cone);
    corpus_center = Vec::zero(handle.n);
    corpus_radius = 1.0;
  } else if (handle.family == "periodic") {
    field = fields::as_field(*handle.periodic);
    corpus_center = Vec(handle.n);
    for (int d = 0; d < handle.n; ++d) corpus_center[d] = 0.5;
    corpus_radius = 0.45;
  } else {
    throw Error("divergence-check: diagonal fields are not divergence-free");
  }

  double worst = 0.0;
  const auto bumps = corpus::random_bumps_in_ball(rng, corpus_center, corpus_radius, config.count);
  for (std::size_t k = 0; k < bumps.size(); ++k) {
    const double normalized = weakcalc::weak_divergence(field, bumps[k], config.scheme).normalized;
    add_upper(rows, "normalized_residual[" + std::to_string(k) + "]", normalized, 0.0, 1e-5);
    worst = std::max(worst, normalized);
  }
  add_upper(rows, "max_normalized_residual", worst, 0.0, 1e-5);
}

void run_weak_hessian(const RunConfig& config, Report& report) {
  auto& rows = report.results;
  const fields::RadialConvexFn f(config.alpha, config.n);
  const fields::ScalarField field = fields::as_scalar_field(f);
  weakcalc::TestFunction eta(0.2 * Vec::unit(config.n, 0), 0.6, 4, 1.0);
  const double residual =
      weakcalc::weak_hessian_residual(field, eta, config.deriv_i, config.deriv_j, config.scheme);
  const double tol = config.alpha == 0.0 ? 1e-4 : 1e-5;
  add_upper(rows, "weak_hessian_residual", residual, 0.0, tol);
}

void run_serre_check(const RunConfig& config, Report& report) {
  Rng rng(config.seed);
  auto& rows = report.results;

  const auto constant =
      fields::PeriodicField::construct(SymMatrix::identity(config.n), {});
  const double constant_gap = inequalities::serre_gap(constant, config.scheme);
  add_upper(rows, "constant_field_gap_abs", std::abs(constant_gap), 0.0, 1e-8);

  double max_gap = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < config.count; ++k) {
    const auto field = corpus::random_periodic_field(rng, config.n);
    const double gap = inequalities::serre_gap(field, config.scheme);
    add_lower(rows, "gap_nonneg[" + std::to_string(k) + "]", gap, 0.0, 1e-8);
    max_gap = std::max(max_gap, gap);
  }
  add_info(rows, "max_gap", max_gap);
}

void run_counterexample(const RunConfig& config, Report& report) {
  auto& rows = report.results;
  const Vec x0 = vec_from(config.x0, config.n, "x0");
  const auto verdict = inequalities::counterexample_verdict(
      config.p, config.n, config.eps, config.beta, config.delta, x0, config.scheme, config.seed);

  add(rows, "tail_max_deviation", verdict.tail_max_deviation, 0.0, verdict.tol_tail,
      verdict.property_i);
  add(rows, "cofactor_lp_norm", verdict.cof_lp_norm, verdict.delta, 0.0, verdict.property_ii);
  add(rows, "fitted_threshold", verdict.fitted_threshold, verdict.target_threshold,
      verdict.tol_threshold_rel * verdict.target_threshold,
      std::abs(verdict.fitted_threshold - verdict.target_threshold) <=
          verdict.tol_threshold_rel * verdict.target_threshold);
  add(rows, "diverges_at_threshold", verdict.diverges_at_threshold ? 1.0 : 0.0, 1.0, 0.0,
      verdict.diverges_at_threshold);
  add(rows, "minkowski_min_gap", verdict.minkowski_min_gap, 0.0, verdict.tol_minkowski,
      verdict.minkowski_step);
  add(rows, "max_normalized_divergence_residual", verdict.max_normalized_residual, 0.0,
      verdict.tol_divergence, verdict.divergence_free);
}

void run_hardy_scan(const RunConfig& config, Report& report) {
  auto& rows = report.results;
  const auto series =
      measures::hardy_blowup_series(config.eps_list, config.n, config.scheme);

  report.series_columns = {"epsilon", "mass", "hardy"};
  for (const auto& row : series) {
    report.series_rows.push_back({row.eps, row.mass_half_ball, row.hardy_unit_ball});
  }

  const double omega = quadrature::unit_ball_volume(config.n);
  add_upper(rows, "mass_relative_error_at_min_eps",
            std::abs(series.back().mass_half_ball - omega) / omega, 0.0, 0.05);

  bool increasing = true;
  for (std::size_t i = 1; i < series.size(); ++i) {
    increasing = increasing && series[i].hardy_unit_ball > series[i - 1].hardy_unit_ball;
  }
  add(rows, "hardy_strictly_increasing", increasing ? 1.0 : 0.0, 1.0, 0.0, increasing);

  std::vector<double> log_inv_eps, hardy;
  for (const auto& row : series) {
    log_inv_eps.push_back(std::log(1.0 / row.eps));
    hardy.push_back(row.hardy_unit_ball);
  }
  const LineFit fit = least_squares(log_inv_eps, hardy);
  add_lower(rows, "hardy_log_fit_r2", fit.r2, 0.99, 0.0);
  add(rows, "hardy_log_fit_slope", fit.slope, 0.0, 0.0, fit.slope > 0.0);
  // Soft cross-check only: the growth rate is proven, its constant is not.
  add_info(rows, "hardy_slope_over_n_omega_soft", fit.slope / (config.n * omega));
}

void run_ma_mass(const RunConfig& config, Report& report) {
  auto& rows = report.results;
  measures::RadialProfile profile;
  if (config.profile == "cone") {
    profile = measures::cone_profile();
  } else if (config.profile == "quadratic") {
    profile = measures::quadratic_profile();
  } else if (config.profile == "smoothed_cone") {
    profile = measures::smoothed_cone_profile(config.eps);
  } else {
    throw Error("ma-mass: profile must be cone, quadratic or smoothed_cone");
  }

  report.series_columns = {"r", "mass"};
  std::vector<double> masses;
  for (const double r : config.r_list) {
    const double mass = measures::ma_mass_radial(profile, r, config.n);
    report.series_rows.push_back({r, mass});
    masses.push_back(mass);
  }

  bool monotone = true;
  for (std::size_t i = 1; i < masses.size(); ++i) {
    if (config.r_list[i] > config.r_list[i - 1] && masses[i] < masses[i - 1] - 1e-12)
      monotone = false;
  }
  add(rows, "mass_monotone_in_r", monotone ? 1.0 : 0.0, 1.0, 0.0, monotone);

  if (config.profile == "cone") {
    const double omega = quadrature::unit_ball_volume(config.n);
    double dev = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) dev = std::max(dev, std::abs(masses[i] - omega));
    add_upper(rows, "cone_atom_constancy", dev, 0.0, 1e-12);
  }
}

void run_diagonal_check(const RunConfig& config, Report& report) {
  auto& rows = report.results;
  std::optional<fields::DiagonalField> field;
  if (!config.field_json.empty()) {
    auto handle = parse_field(config.field_json, config.scheme);
    if (handle.family != "diagonal") throw Error("diagonal-check: field must be diagonal");
    field = std::move(handle.diagonal);
  } else {
    Rng rng(config.seed);
    field = corpus::random_diagonal_field(rng, config.n);
  }

  const auto base = inequalities::diagonal_report(*field, config.p, config.scheme);
  add_info(rows, "lhs", base.lhs);
  add_info(rows, "div_norm", base.div_norm);
  add_info(rows, "ratio", base.ratio);
  add(rows, "ratio_finite", std::isfinite(base.ratio) ? 1.0 : 0.0, 1.0, 0.0,
      std::isfinite(base.ratio));

  std::vector<fields::PolyBump> scaled = field->profiles();
  for (auto& bump : scaled) bump.amplitude *= 2.0;
  const auto doubled = inequalities::diagonal_report(fields::DiagonalField(scaled), config.p,
                                                     config.scheme);
  const double rel = base.ratio > 0.0 ? std::abs(doubled.ratio - base.ratio) / base.ratio : 0.0;
  add_upper(rows, "ratio_scale_invariance", rel, 0.0, 1e-8);
}

void run_loomis_whitney(const RunConfig& config, Report& report) {
  Rng rng(config.seed);
  auto& rows = report.results;
  const int n = config.n;
  Vec lo(n), hi(n);
  for (int d = 0; d < n; ++d) {
    lo[d] = 0.0;
    hi[d] = 1.0;
  }
  const auto cube = quadrature::Domain::cube(lo, hi);

  double max_gap = -std::numeric_limits<double>::infinity();
  double max_abs_gap = 0.0;
  for (int k = 0; k < config.count; ++k) {
    const auto fns = corpus::random_marginal_functions(rng, n, cube);
    const double gap = inequalities::loomis_whitney_gap(fns, n, cube, config.scheme);
    add_lower(rows, "gap_nonneg[" + std::to_string(k) + "]", gap, 0.0, 1e-8);
    max_gap = std::max(max_gap, gap);
    max_abs_gap = std::max(max_abs_gap, std::abs(gap));
  }
  add_info(rows, "max_gap", max_gap);
  if (n == 2) {
    // In the plane the integrand factorizes, so the inequality is an identity.
    add_upper(rows, "product_case_equality", max_abs_gap, 0.0, 1e-8);
  }
}

Report execute(const RunConfig& raw) {
  const RunConfig config = normalized(raw);
  Report report;
  report.config = config;
  report.version = kVersion;

  if (config.subcommand == "exponents") {
    run_exponents(config, report);
  } else if (config.subcommand == "verify-matkit") {
    run_verify_matkit(config, report);
  } else if (config.subcommand == "fields-check") {
    run_fields_check(config, report);
  } else if (config.subcommand == "lp-scan") {
    run_lp_scan(config, report);
  } else if (config.subcommand == "divergence-check") {
    run_divergence_check(config, report);
  } else if (config.subcommand == "weak-hessian") {
    run_weak_hessian(config, report);
  } else if (config.subcommand == "serre-check") {
    run_serre_check(config, report);
  } else if (config.subcommand == "counterexample") {
    run_counterexample(config, report);
  } else if (config.subcommand == "hardy-scan") {
    run_hardy_scan(config, report);
  } else if (config.subcommand == "ma-mass") {
    run_ma_mass(config, report);
  } else if (config.subcommand == "diagonal-check") {
    run_diagonal_check(config, report);
  } else if (config.subcommand == "loomis-whitney") {
    run_loomis_whitney(config, report);
  } else {
    throw Error("unknown subcommand \"" + config.subcommand + "\"");
  }
  return report;
}

std::string csv_number(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace

bool Report::all_passed() const {
  for (const CheckResult& row : results) {
    if (!row.pass) return false;
  }
  return true;
}

std::string report_to_string(const Report& report) {
  if (report.config.format == "csv") {
    std::ostringstream out;
    out << "# config: " << config_to_json_obj(report.config).dump() << "\n";
    out << "# version: " << report.version << "\n";
    if (!report.series_columns.empty()) {
      for (std::size_t c = 0; c < report.series_columns.size(); ++c) {
        if (c) out << ",";
        out << report.series_columns[c];
      }
      out << "\n";
      for (const auto& row : report.series_rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (c) out << ",";
          out << csv_number(row[c]);
        }
        out << "\n";
      }
    } else {
      out << "check,value,target,tolerance,pass\n";
      for (const CheckResult& row : report.results) {
        out << row.check << "," << csv_number(row.value) << "," << csv_number(row.target) << ","
            << csv_number(row.tolerance) << "," << (row.pass ? "true" : "false") << "\n";
      }
    }
    return out.str();
  }

  json j;
  j["config"] = config_to_json_obj(report.config);
  json results = json::array();
  for (const CheckResult& row : report.results) {
    json r;
    r["check"] = row.check;
    r["value"] = row.value;
    r["target"] = row.target;
    r["tolerance"] = row.tolerance;
    r["pass"] = row.pass;
    results.push_back(r);
  }
  j["results"] = results;
  j["version"] = report.version;
  return j.dump(2) + "\n";
}

RunConfig config_from_json(const std::string& json_text) {
  return config_from_json_obj(json::parse(json_text));
}

std::string config_to_json(const RunConfig& config) { return config_to_json_obj(config).dump(); }

RunConfig config_from_report_text(const std::string& report_text) {
  if (!report_text.empty() && report_text.front() == '{') {
    const json j = json::parse(report_text);
    if (!j.contains("config")) throw Error("report: missing embedded config");
    return config_from_json_obj(j["config"]);
  }
  std::istringstream in(report_text);
  std::string line;
  const std::string prefix = "# config: ";
  while (std::getline(in, line)) {
    if (line.rfind(prefix, 0) == 0) {
      return config_from_json_obj(json::parse(line.substr(prefix.size())));
    }
  }
  throw Error("report: no embedded config found");
}

quadrature::IntegrationScheme default_scheme() {
  quadrature::IntegrationScheme scheme;
  if (const char* env = std::getenv("DETLAB_DEFAULT_DEPTH")) {
    char* end = nullptr;
    const long depth = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && depth >= 1 && depth <= 64) {
      scheme.dyadic_depth = static_cast<int>(depth);
    } else {
      std::cerr << "detlab: ignoring invalid DETLAB_DEFAULT_DEPTH=\"" << env << "\"\n";
    }
  }
  return scheme;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {
      "verify-matkit", "fields-check", "lp-scan",   "divergence-check",
      "weak-hessian",  "serre-check",  "counterexample", "hardy-scan",
      "ma-mass",       "diagonal-check", "loomis-whitney", "exponents"};
  return names;
}

int run(const RunConfig& config, Report* out_report) {
  try {
    const Report report = execute(config);
    const std::string text = report_to_string(report);
    if (config.out.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(config.out, std::ios::binary);
      if (!out) throw Error("cannot open output file \"" + config.out + "\"");
      out << text;
    }
    if (out_report) *out_report = report;
    return report.all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "detlab: error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace detlab::cli
