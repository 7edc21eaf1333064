#pragma once

// Dense kernels for symmetric and general n x n matrices, n in {2,3,4}:
// determinants by cofactor expansion, cofactor (adjugate) matrices, PSD tests,
// the rank-one determinant update identity and the Minkowski determinant gap.
// Everything is fixed-size, allocation-free and re-entrant.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "detlab/errors.hpp"

namespace detlab::matkit {

inline constexpr int kMaxDim = 4;

/// Fixed-capacity vector in R^n, n in {1,..,4}.
class Vec {
 public:
  Vec() = default;
  explicit Vec(int n) : n_(n) { check_dim(n, 1); }
  Vec(std::initializer_list<double> vals);
  static Vec zero(int n) { return Vec(n); }
  static Vec unit(int n, int axis);

  int dim() const { return n_; }
  double& operator[](int i) { return a_[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return a_[static_cast<std::size_t>(i)]; }

  Vec& operator+=(const Vec& o);
  Vec& operator-=(const Vec& o);
  Vec& operator*=(double s);

  static void check_dim(int n, int lo = 2);

 private:
  int n_ = 0;
  std::array<double, kMaxDim> a_{};
};

Vec operator+(Vec a, const Vec& b);
Vec operator-(Vec a, const Vec& b);
Vec operator*(double s, Vec a);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& a);
double norm(const Vec& a);

/// Dense n x n matrix, n in {2,3,4}.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int n) : n_(n) { Vec::check_dim(n); }
  static Matrix zero(int n) { return Matrix(n); }
  static Matrix identity(int n);
  /// u v^T (rank one).
  static Matrix outer(const Vec& u, const Vec& v);

  int dim() const { return n_; }
  double& operator()(int i, int j) { return m_[static_cast<std::size_t>(i * kMaxDim + j)]; }
  double operator()(int i, int j) const { return m_[static_cast<std::size_t>(i * kMaxDim + j)]; }

  Matrix transposed() const;
  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

 private:
  int n_ = 0;
  std::array<double, kMaxDim * kMaxDim> m_{};
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Vec operator*(const Matrix& m, const Vec& x);

/// Symmetric n x n matrix; entries (i,j) and (j,i) are one storage slot, so
/// symmetry holds exactly, never up to rounding.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : m_(n) {}
  static SymMatrix zero(int n) { return SymMatrix(n); }
  static SymMatrix identity(int n);
  static SymMatrix scaled_identity(int n, double s);
  static SymMatrix diagonal(const Vec& d);
  /// x x^T.
  static SymMatrix outer(const Vec& x);

  int dim() const { return m_.dim(); }
  double operator()(int i, int j) const { return m_(i, j); }
  /// Sets entries (i,j) and (j,i).
  void set(int i, int j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }

  const Matrix& matrix() const { return m_; }

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);

 private:
  Matrix m_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);
Vec operator*(const SymMatrix& m, const Vec& x);

/// Determinant by cofactor expansion (exact formulae for n = 2, 3, 4).
double det(const Matrix& m);
double det(const SymMatrix& m);

/// cof(A)_{ij} = (-1)^{i+j} det of A with row j and column i removed, so that
/// A cof(A) = det(A) Id for every A.
Matrix cofactor(const Matrix& m);
/// Same values, but built from the upper triangle so the result is exactly
/// symmetric.
SymMatrix cofactor(const SymMatrix& m);

double frobenius_norm(const Matrix& m);
double frobenius_norm(const SymMatrix& m);
double max_abs(const Matrix& m);
double max_abs(const SymMatrix& m);

/// |det(A + u v^T) - det(A) - <u v^T, cof^T(A)>|; zero in exact arithmetic.
double det_lemma_residual(const Matrix& a, const Vec& u, const Vec& v);

/// det(A+B)^{1/n} - det(A)^{1/n} - det(B)^{1/n}. Non-negative for PSD inputs.
/// Throws NotPSD if either argument fails psd_check at psd_tol.
double minkowski_gap(const SymMatrix& a, const SymMatrix& b, double psd_tol = 1e-10);

/// Eigenvalues in ascending order. Closed-form characteristic polynomial for
/// n <= 3, cyclic Jacobi sweeps for n = 4.
std::vector<double> sym_eigenvalues(const SymMatrix& m);

/// True iff every eigenvalue is >= -tol.
bool psd_check(const SymMatrix& m, double tol = 1e-10);

}  // namespace detlab::matkit
