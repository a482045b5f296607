#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <vector>

#include "projsum/errors.hpp"

namespace projsum {

using cplx = std::complex<double>;

// Dense complex matrix, row-major. Desk scale (n <= 64); no attempt at
// performance beyond the obvious.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {
    assert(rows >= 0 && cols >= 0);
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const cplx& operator()(int i, int j) const {
    return a_[static_cast<size_t>(i) * cols_ + j];
  }

  Matrix operator+(const Matrix& o) const {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    Matrix r(rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
    return r;
  }
  Matrix operator-(const Matrix& o) const {
    assert(rows_ == o.rows_ && cols_ == o.cols_);
    Matrix r(rows_, cols_);
    for (size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
    return r;
  }
  Matrix operator*(const Matrix& o) const {
    assert(cols_ == o.rows_);
    Matrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        const cplx aik = (*this)(i, k);
        if (aik == cplx(0.0)) continue;
        for (int j = 0; j < o.cols_; ++j) r(i, j) += aik * o(k, j);
      }
    return r;
  }
  friend Matrix operator*(const cplx& s, const Matrix& m) {
    Matrix r(m.rows_, m.cols_);
    for (size_t k = 0; k < m.a_.size(); ++k) r.a_[k] = s * m.a_[k];
    return r;
  }
  friend Matrix operator*(double s, const Matrix& m) { return cplx(s) * m; }

  Matrix adjoint() const {
    Matrix r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  cplx trace() const {
    assert(rows_ == cols_);
    cplx t = 0.0;
    for (int i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const cplx& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const cplx& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

  // Column j as a plain vector.
  std::vector<cplx> col(int j) const {
    std::vector<cplx> v(rows_);
    for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  bool is_hermitian(double tol) const {
    if (rows_ != cols_) return false;
    for (int i = 0; i < rows_; ++i)
      for (int j = i; j < cols_; ++j)
        if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
    return true;
  }

 private:
  int rows_, cols_;
  std::vector<cplx> a_;
};

inline Matrix outer(const std::vector<cplx>& u, const std::vector<cplx>& v) {
  Matrix r(static_cast<int>(u.size()), static_cast<int>(v.size()));
  for (int i = 0; i < r.rows(); ++i)
    for (int j = 0; j < r.cols(); ++j) r(i, j) = u[i] * std::conj(v[j]);
  return r;
}

inline std::vector<cplx> mat_vec(const Matrix& m, const std::vector<cplx>& v) {
  assert(m.cols() == static_cast<int>(v.size()));
  std::vector<cplx> r(m.rows(), cplx(0.0));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) r[i] += m(i, j) * v[j];
  return r;
}

inline cplx inner(const std::vector<cplx>& u, const std::vector<cplx>& v) {
  assert(u.size() == v.size());
  cplx s = 0.0;
  for (size_t i = 0; i < u.size(); ++i) s += std::conj(v[i]) * u[i];
  return s;  // <u, v> linear in the first argument
}

inline double vec_norm(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const cplx& x : v) s += std::norm(x);
  return std::sqrt(s);
}

// Hermitian matrix: validated on construction (conjugate symmetry within
// 1e-12 by default), then normalized so entries[i][j] == conj(entries[j][i])
// exactly and diagonal imaginary parts are exactly zero.
class HermitianMatrix {
 public:
  static constexpr double kConstructionTol = 1e-12;

  HermitianMatrix() = default;

  explicit HermitianMatrix(Matrix m, double tol = kConstructionTol) {
    if (m.rows() != m.cols())
      raise(Errc::NotSymmetry, "matrix is not square");
    double scale = std::max(1.0, m.frobenius_norm());
    if (!m.is_hermitian(tol * scale))
      raise(Errc::NotSymmetry, "matrix is not Hermitian within tolerance");
    const int n = m.rows();
    for (int i = 0; i < n; ++i) {
      m(i, i) = cplx(m(i, i).real(), 0.0);
      for (int j = i + 1; j < n; ++j) {
        cplx avg = 0.5 * (m(i, j) + std::conj(m(j, i)));
        m(i, j) = avg;
        m(j, i) = std::conj(avg);
      }
    }
    m_ = std::move(m);
  }

  static HermitianMatrix zero(int n) { return HermitianMatrix(Matrix(n, n)); }
  static HermitianMatrix identity(int n) {
    return HermitianMatrix(Matrix::identity(n));
  }
  static HermitianMatrix diagonal(const std::vector<double>& d) {
    Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (int i = 0; i < m.rows(); ++i) m(i, i) = d[static_cast<size_t>(i)];
    return HermitianMatrix(m);
  }

  int n() const { return m_.rows(); }
  const Matrix& mat() const { return m_; }
  const cplx& operator()(int i, int j) const { return m_(i, j); }

  double trace() const { return m_.trace().real(); }
  double frobenius_norm() const { return m_.frobenius_norm(); }

  HermitianMatrix operator+(const HermitianMatrix& o) const {
    return HermitianMatrix(m_ + o.m_, 1.0);  // exact by construction
  }
  HermitianMatrix operator-(const HermitianMatrix& o) const {
    return HermitianMatrix(m_ - o.m_, 1.0);
  }
  friend HermitianMatrix operator*(double s, const HermitianMatrix& m) {
    return HermitianMatrix(s * m.m_, 1.0);
  }

  HermitianMatrix shifted(double s) const {  // A + s I
    Matrix m = m_;
    for (int i = 0; i < n(); ++i) m(i, i) += s;
    return HermitianMatrix(std::move(m), 1.0);
  }

 private:
  Matrix m_;
};

// Hermitian part (M + M*)/2 of a square matrix; used to re-symmetrize
// products that are Hermitian up to round-off.
inline HermitianMatrix hermitian_part(const Matrix& m) {
  assert(m.rows() == m.cols());
  Matrix h = 0.5 * (m + m.adjoint());
  return HermitianMatrix(std::move(h), 1.0);
}

}  // namespace projsum
