#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "projsum/complex_matrix.hpp"
#include "projsum/errors.hpp"

namespace projsum {

struct SpectralDecomposition {
  std::vector<double> eigenvalues;  // sorted descending, stable ties
  Matrix q;                         // orthonormal columns aligned with eigenvalues
  double source_norm = 0.0;         // operator norm estimate max_i |lambda_i|

  std::vector<cplx> eigenvector(int i) const { return q.col(i); }
};

namespace detail {

// Off-diagonal Frobenius norm.
inline double off_norm(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace detail

// Cyclic Jacobi for Hermitian matrices. Deterministic: fixed sweep order,
// rotation angles from closed forms, eigenvector phase fixed so the first
// component above 1e-12 in modulus is real positive. Sorted descending with
// ties kept in post-sweep diagonal order.
inline SpectralDecomposition eig_hermitian(const HermitianMatrix& A,
                                           double tol = 1e-12,
                                           int max_sweeps = 100) {
  const int n = A.n();
  Matrix a = A.mat();
  Matrix q = Matrix::identity(n);
  const double fnorm = a.frobenius_norm();
  const double thresh = tol * std::max(fnorm, 1e-300);

  int sweep = 0;
  while (detail::off_norm(a) > thresh) {
    if (sweep++ >= max_sweeps)
      raise(Errc::NumericalFailure, "Jacobi sweep cap reached");
    for (int p = 0; p < n - 1; ++p) {
      for (int qi = p + 1; qi < n; ++qi) {
        const cplx apq = a(p, qi);
        const double g = std::abs(apq);
        if (g == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(qi, qi).real();
        const cplx u = apq / g;  // phase so that conj(u)*apq = |apq|
        const double theta = 0.5 * std::atan2(2.0 * g, app - aqq);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        // V differs from I only in the (p, qi) block:
        //   V(p,p) = u c, V(p,qi) = -u s, V(qi,p) = s, V(qi,qi) = c.
        // Update a <- V* a V and q <- q V.
        for (int r = 0; r < n; ++r) {
          const cplx arp = a(r, p), arq = a(r, qi);
          a(r, p) = arp * (u * c) + arq * s;
          a(r, qi) = arp * (-u * s) + arq * c;
        }
        for (int r = 0; r < n; ++r) {
          const cplx apr = a(p, r), aqr = a(qi, r);
          a(p, r) = std::conj(u) * c * apr + s * aqr;
          a(qi, r) = -std::conj(u) * s * apr + c * aqr;
        }
        a(p, qi) = 0.0;
        a(qi, p) = 0.0;
        a(p, p) = cplx(a(p, p).real(), 0.0);
        a(qi, qi) = cplx(a(qi, qi).real(), 0.0);
        for (int r = 0; r < n; ++r) {
          const cplx qrp = q(r, p), qrq = q(r, qi);
          q(r, p) = qrp * (u * c) + qrq * s;
          q(r, qi) = qrp * (-u * s) + qrq * c;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return a(i, i).real() > a(j, j).real();
  });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.q = Matrix(n, n);
  for (int k = 0; k < n; ++k) {
    const int src = order[k];
    out.eigenvalues[k] = a(src, src).real();
    cplx phase = 1.0;
    for (int r = 0; r < n; ++r) {
      if (std::abs(q(r, src)) > 1e-12) {
        phase = std::conj(q(r, src)) / std::abs(q(r, src));
        break;
      }
    }
    for (int r = 0; r < n; ++r) out.q(r, k) = q(r, src) * phase;
  }
  out.source_norm = 0.0;
  for (double lam : out.eigenvalues)
    out.source_norm = std::max(out.source_norm, std::abs(lam));
  return out;
}

}  // namespace projsum
