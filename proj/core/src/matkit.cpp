#include "detlab/matkit.hpp"

#include <algorithm>
#include <cmath>

namespace detlab::matkit {

void Vec::check_dim(int n, int lo) {
  if (n < lo || n > kMaxDim) {
    throw Error("dimension must be in {" + std::to_string(lo) + ",..," +
                std::to_string(kMaxDim) + "}, got " + std::to_string(n));
  }
}

Vec::Vec(std::initializer_list<double> vals) {
  n_ = static_cast<int>(vals.size());
  check_dim(n_, 1);
  int i = 0;
  for (double v : vals) a_[static_cast<std::size_t>(i++)] = v;
}

Vec Vec::unit(int n, int axis) {
  Vec e(n);
  e[axis] = 1.0;
  return e;
}

Vec& Vec::operator+=(const Vec& o) {
  for (int i = 0; i < n_; ++i) (*this)[i] += o[i];
  return *this;
}
Vec& Vec::operator-=(const Vec& o) {
  for (int i = 0; i < n_; ++i) (*this)[i] -= o[i];
  return *this;
}
Vec& Vec::operator*=(double s) {
  for (int i = 0; i < n_; ++i) (*this)[i] *= s;
  return *this;
}

Vec operator+(Vec a, const Vec& b) { return a += b; }
Vec operator-(Vec a, const Vec& b) { return a -= b; }
Vec operator*(double s, Vec a) { return a *= s; }

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}
double norm2(const Vec& a) { return dot(a, a); }
double norm(const Vec& a) { return std::sqrt(norm2(a)); }

Matrix Matrix::identity(int n) {
  Matrix m(n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::outer(const Vec& u, const Vec& v) {
  Matrix m(u.dim());
  for (int i = 0; i < u.dim(); ++i)
    for (int j = 0; j < v.dim(); ++j) m(i, j) = u[i] * v[j];
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) t(i, j) = (*this)(j, i);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) += o(i, j);
  return *this;
}
Matrix& Matrix::operator-=(const Matrix& o) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) -= o(i, j);
  return *this;
}
Matrix& Matrix::operator*=(double s) {
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) (*this)(i, j) *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Vec operator*(const Matrix& m, const Vec& x) {
  Vec y(m.dim());
  for (int i = 0; i < m.dim(); ++i) {
    double s = 0.0;
    for (int j = 0; j < m.dim(); ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

SymMatrix SymMatrix::identity(int n) { return scaled_identity(n, 1.0); }

SymMatrix SymMatrix::scaled_identity(int n, double s) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) m.set(i, i, s);
  return m;
}

SymMatrix SymMatrix::diagonal(const Vec& d) {
  SymMatrix m(d.dim());
  for (int i = 0; i < d.dim(); ++i) m.set(i, i, d[i]);
  return m;
}

SymMatrix SymMatrix::outer(const Vec& x) {
  SymMatrix m(x.dim());
  for (int i = 0; i < x.dim(); ++i)
    for (int j = i; j < x.dim(); ++j) m.set(i, j, x[i] * x[j]);
  return m;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  m_ += o.m_;
  return *this;
}
SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  m_ -= o.m_;
  return *this;
}
SymMatrix& SymMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
Vec operator*(const SymMatrix& m, const Vec& x) { return m.matrix() * x; }

namespace {

double det2(double a, double b, double c, double d) { return a * d - b * c; }

double det3x3(const Matrix& m, int r0, int r1, int r2, int c0, int c1, int c2) {
  return m(r0, c0) * det2(m(r1, c1), m(r1, c2), m(r2, c1), m(r2, c2)) -
         m(r0, c1) * det2(m(r1, c0), m(r1, c2), m(r2, c0), m(r2, c2)) +
         m(r0, c2) * det2(m(r1, c0), m(r1, c1), m(r2, c0), m(r2, c1));
}

// Determinant of the (n-1)x(n-1) submatrix of m with row `dr` and column `dc`
// removed.
double minor_det(const Matrix& m, int dr, int dc) {
  const int n = m.dim();
  int rows[3], cols[3];
  int nr = 0, nc = 0;
  for (int i = 0; i < n; ++i) {
    if (i != dr) rows[nr++] = i;
    if (i != dc) cols[nc++] = i;
  }
  switch (n) {
    case 2:
      return m(rows[0], cols[0]);
    case 3:
      return det2(m(rows[0], cols[0]), m(rows[0], cols[1]), m(rows[1], cols[0]),
                  m(rows[1], cols[1]));
    default:
      return det3x3(m, rows[0], rows[1], rows[2], cols[0], cols[1], cols[2]);
  }
}

}  // namespace

double det(const Matrix& m) {
  switch (m.dim()) {
    case 2:
      return det2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    case 3:
      return det3x3(m, 0, 1, 2, 0, 1, 2);
    default: {
      // Expansion along the first row with 3x3 minors.
      double s = 0.0;
      double sign = 1.0;
      for (int j = 0; j < 4; ++j) {
        s += sign * m(0, j) * minor_det(m, 0, j);
        sign = -sign;
      }
      return s;
    }
  }
}

double det(const SymMatrix& m) { return det(m.matrix()); }

Matrix cofactor(const Matrix& m) {
  const int n = m.dim();
  Matrix c(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      c(i, j) = sign * minor_det(m, j, i);
    }
  }
  return c;
}

SymMatrix cofactor(const SymMatrix& m) {
  const int n = m.dim();
  SymMatrix c(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      c.set(i, j, sign * minor_det(m.matrix(), j, i));
    }
  }
  return c;
}

double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}
double frobenius_norm(const SymMatrix& m) { return frobenius_norm(m.matrix()); }

double max_abs(const Matrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) s = std::max(s, std::abs(m(i, j)));
  return s;
}
double max_abs(const SymMatrix& m) { return max_abs(m.matrix()); }

double det_lemma_residual(const Matrix& a, const Vec& u, const Vec& v) {
  const Matrix b = Matrix::outer(u, v);
  const double lhs = det(a + b);
  // <u v^T, cof^T(A)> = v^T cof(A) u
  const double correction = dot(v, cofactor(a) * u);
  return std::abs(lhs - (det(a) + correction));
}

namespace {

// Clamp roundoff-negative determinants of PSD matrices before taking roots.
double nth_root_nonneg(double d, int n) {
  if (d <= 0.0) return 0.0;
  return std::pow(d, 1.0 / static_cast<double>(n));
}

}  // namespace

double minkowski_gap(const SymMatrix& a, const SymMatrix& b, double psd_tol) {
  if (!psd_check(a, psd_tol) || !psd_check(b, psd_tol)) {
    throw NotPSD("minkowski_gap: inputs must be PSD at tolerance " + std::to_string(psd_tol));
  }
  const int n = a.dim();
  return nth_root_nonneg(det(a + b), n) - nth_root_nonneg(det(a), n) -
         nth_root_nonneg(det(b), n);
}

namespace {

std::vector<double> eig2(const SymMatrix& m) {
  const double mean = 0.5 * (m(0, 0) + m(1, 1));
  const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
  const double r = std::sqrt(half_diff * half_diff + m(0, 1) * m(0, 1));
  return {mean - r, mean + r};
}

// Trigonometric solution of the characteristic cubic of a symmetric 3x3.
std::vector<double> eig3(const SymMatrix& m) {
  const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
  if (p1 == 0.0) {
    std::vector<double> d = {m(0, 0), m(1, 1), m(2, 2)};
    std::sort(d.begin(), d.end());
    return d;
  }
  const double q = (m(0, 0) + m(1, 1) + m(2, 2)) / 3.0;
  const double p2 = (m(0, 0) - q) * (m(0, 0) - q) + (m(1, 1) - q) * (m(1, 1) - q) +
                    (m(2, 2) - q) * (m(2, 2) - q) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  SymMatrix bmat = m;
  for (int i = 0; i < 3; ++i) bmat.set(i, i, m(i, i) - q);
  bmat *= (1.0 / p);
  double r = 0.5 * det(bmat);
  r = std::clamp(r, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double two_pi_3 = 2.0943951023931953;
  const double e1 = q + 2.0 * p * std::cos(phi);
  const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * two_pi_3);
  const double e2 = 3.0 * q - e1 - e3;
  std::vector<double> d = {e1, e2, e3};
  std::sort(d.begin(), d.end());
  return d;
}

// Cyclic Jacobi with a fixed sweep order; deterministic.
std::vector<double> eig4(const SymMatrix& m) {
  double a[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = m(i, j);

  const double scale = std::max(max_abs(m), 1e-300);
  const double stop = 1e-30 * scale * scale;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) off += a[i][j] * a[i][j];
    if (off <= stop) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 4; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> d = {a[0][0], a[1][1], a[2][2], a[3][3]};
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

std::vector<double> sym_eigenvalues(const SymMatrix& m) {
  switch (m.dim()) {
    case 2:
      return eig2(m);
    case 3:
      return eig3(m);
    default:
      return eig4(m);
  }
}

bool psd_check(const SymMatrix& m, double tol) {
  if (tol < 0.0) throw Error("psd_check: tol must be >= 0");
  const std::vector<double> ev = sym_eigenvalues(m);
  return ev.front() >= -tol;
}

}  // namespace detlab::matkit
