#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "projsum/complex_matrix.hpp"
#include "projsum/eig.hpp"
#include "projsum/errors.hpp"
#include "projsum/linalg.hpp"

namespace projsum {

struct UnitVector {
  std::vector<cplx> components;

  int dimension() const { return static_cast<int>(components.size()); }

  // Validates ||v|| = 1 within 1e-12.
  static UnitVector checked(std::vector<cplx> v) {
    const double nrm = vec_norm(v);
    if (std::abs(nrm - 1.0) > 1e-12)
      raise(Errc::NotIsotropicWitness, "vector norm " + std::to_string(nrm) + " is not 1");
    return {std::move(v)};
  }

  static UnitVector normalized(std::vector<cplx> v) {
    const double nrm = vec_norm(v);
    if (nrm == 0.0) raise(Errc::ZeroMatrix, "cannot normalize the zero vector");
    for (cplx& x : v) x /= nrm;
    return {std::move(v)};
  }

  Projection as_projection() const { return {hermitian_part(outer(components, components)), 1}; }
};

// Resolution of the identity into mutually orthogonal projections, each
// isotropic for the target: E_j X E_j = 0.
struct IsotropicResolution {
  std::vector<Projection> projections;  // E_j
  HermitianMatrix target;               // X
  std::vector<UnitVector> basis;        // present iff every E_j is rank one
};

// Quadratic form <X xi, xi>.
inline double quadratic_form(const HermitianMatrix& x, const std::vector<cplx>& xi) {
  return inner(mat_vec(x.mat(), xi), xi).real();
}

// Isotropic projection for a self-adjoint unitary U (eigenvalues +1 and -1):
// rank min(p, m) spanned by (e_k + f_k)/sqrt(2), pairing +1-eigenvectors
// with -1-eigenvectors in spectral order.
inline Projection symmetry_isotropic(const HermitianMatrix& U) {
  const Matrix& u = U.mat();
  const int n = U.n();
  const double scale = std::max(1.0, u.frobenius_norm());
  if ((u * u - Matrix::identity(n)).frobenius_norm() > 1e-9 * scale)
    raise(Errc::NotSymmetry, "U^2 != I, not a self-adjoint unitary");
  const SpectralDecomposition d = eig_hermitian(U);
  std::vector<int> plus, minus;
  for (int i = 0; i < n; ++i)
    (d.eigenvalues[i] > 0.0 ? plus : minus).push_back(i);
  if (plus.empty() || minus.empty())
    raise(Errc::Definite, "U = I or U = -I admits no isotropic projection");
  const int r = static_cast<int>(std::min(plus.size(), minus.size()));
  Matrix e(n, n);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < r; ++k) {
    std::vector<cplx> w(n);
    const std::vector<cplx> ek = d.eigenvector(plus[k]);
    const std::vector<cplx> fk = d.eigenvector(minus[k]);
    for (int i = 0; i < n; ++i) w[i] = (ek[i] + fk[i]) * inv_sqrt2;
    e = e + outer(w, w);
  }
  return {hermitian_part(e), r};
}

// Unit vector with <X xi, xi> = 0 for a traceless Hermitian X. Kernel
// shortcut first; otherwise mixes the top positive and bottom negative
// eigenvectors: xi = (sqrt(-mu) e + sqrt(lambda) f) / sqrt(lambda - mu).
inline UnitVector isotropic_vector(const HermitianMatrix& X, double tol) {
  const double fnorm = X.frobenius_norm();
  if (fnorm == 0.0) raise(Errc::ZeroMatrix, "X = 0 has no preferred isotropic vector");
  if (std::abs(X.trace()) > tol * std::max(1.0, fnorm))
    raise(Errc::NotTraceless, "trace " + std::to_string(X.trace()) + " exceeds tolerance");
  const SpectralDecomposition d = eig_hermitian(X);
  const int n = X.n();
  const double rtol = tolerance::rank_tol(d.source_norm);
  for (int i = 0; i < n; ++i)
    if (std::abs(d.eigenvalues[i]) <= rtol)
      return UnitVector::normalized(d.eigenvector(i));
  const double lambda = d.eigenvalues[0];
  // Earliest original index among the minimal eigenvalues: the first
  // position attaining the bottom value (stable descending order).
  int bot = n - 1;
  for (int i = 0; i < n; ++i)
    if (d.eigenvalues[i] == d.eigenvalues[n - 1]) { bot = i; break; }
  const double mu = d.eigenvalues[bot];
  if (lambda <= 0.0 || mu >= 0.0)
    raise(Errc::NotTraceless, "spectrum is one-sided, no isotropic vector exists");
  const std::vector<cplx> e = d.eigenvector(0);
  const std::vector<cplx> f = d.eigenvector(bot);
  const double denom = std::sqrt(lambda - mu);
  const double ce = std::sqrt(-mu) / denom;
  const double cf = std::sqrt(lambda) / denom;
  std::vector<cplx> xi(n);
  for (int i = 0; i < n; ++i) xi[i] = ce * e[i] + cf * f[i];
  return UnitVector::normalized(xi);
}

// Orthogonal projection onto range(Y*) for a witness Y with Y X Y* = 0.
inline Projection support_reduction(const Matrix& y, const HermitianMatrix& X) {
  if (y.frobenius_norm() <= 1e-12) raise(Errc::ZeroMatrix, "witness Y is zero");
  if (y.cols() != X.n())
    raise(Errc::NotIsotropicWitness, "witness column count does not match X");
  const Matrix g = y.adjoint() * y;  // Gram matrix on the domain of Y
  const SpectralDecomposition d = eig_hermitian(hermitian_part(g));
  const double op_sq = std::max(0.0, d.eigenvalues.empty() ? 0.0 : d.eigenvalues[0]);
  const double witness_scale = std::max(1.0, X.frobenius_norm() * op_sq);
  const double residual = (y * X.mat() * y.adjoint()).frobenius_norm();
  if (residual > 1e-9 * witness_scale)
    raise(Errc::NotIsotropicWitness,
          "||Y X Y*|| = " + std::to_string(residual) + " exceeds tolerance");
  // Rank of Y via the Gram matrix G = Y*Y with the core rank rule; working
  // through G keeps the cutoff above the eigensolver noise floor.
  const double gtol = tolerance::rank_tol(op_sq);
  const int n = X.n();
  Matrix e(n, n);
  int rank = 0;
  for (int i = 0; i < n; ++i) {
    if (d.eigenvalues[i] <= gtol) continue;
    e = e + outer(d.eigenvector(i), d.eigenvector(i));
    ++rank;
  }
  Projection proj{hermitian_part(e), rank};
  const Matrix& em = proj.matrix.mat();
  if ((em * X.mat() * em).frobenius_norm() > 1e-8)
    raise(Errc::NotIsotropicWitness, "witness range is not isotropic for X");
  return proj;
}

// FXF expressed on an orthonormal basis of range(F): rank(F) x rank(F).
inline HermitianMatrix compress(const HermitianMatrix& X, const Projection& F) {
  const SpectralDecomposition d = eig_hermitian(F.matrix);
  const int n = X.n();
  const int r = F.rank;
  Matrix c(n, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < n; ++i) c(i, j) = d.q(i, j);
  return hermitian_part(c.adjoint() * X.mat() * c);
}

namespace detail {

// Orthonormal basis of the complement of xi inside C^m: columns H e_j for
// j != t, where H = I - 2uu*/||u||^2 with u = xi + c e_t, t the largest
// component (earliest on ties) and c its phase. H e_t is proportional to xi,
// and beta = ||u||^2 = 2(1 + |xi_t|) never degenerates.
inline Matrix householder_complement(const std::vector<cplx>& xi) {
  const int m = static_cast<int>(xi.size());
  int t = 0;
  for (int i = 1; i < m; ++i)
    if (std::abs(xi[i]) > std::abs(xi[t])) t = i;
  const double at = std::abs(xi[t]);
  const cplx c = at > 0.0 ? xi[t] / at : cplx(1.0);
  std::vector<cplx> u = xi;
  u[t] += c;
  const double beta = 2.0 * (1.0 + at);
  Matrix out(m, m - 1);
  int col = 0;
  for (int j = 0; j < m; ++j) {
    if (j == t) continue;
    // H e_j = e_j - (2 conj(u_j) / beta) u.
    const cplx coeff = 2.0 * std::conj(u[j]) / beta;
    for (int i = 0; i < m; ++i) {
      cplx v = -coeff * u[i];
      if (i == j) v += 1.0;
      out(i, col) = v;
    }
    ++col;
  }
  return out;
}

}  // namespace detail

// Greedy rank-one isotropic resolution: pick an isotropic vector, deflate to
// its orthogonal complement through the Householder basis, recurse on the
// compression (traceless again up to drift), re-embed.
inline IsotropicResolution zero_diagonal_resolution(const HermitianMatrix& X, double tol) {
  if (std::abs(X.trace()) > tol)
    raise(Errc::NotTraceless, "trace " + std::to_string(X.trace()) + " exceeds " +
                                  std::to_string(tol));
  const int n = X.n();
  const double x0 = X.frobenius_norm();
  Matrix embed = Matrix::identity(n);
  HermitianMatrix cur = X;
  std::vector<UnitVector> basis;
  while (true) {
    const int m = cur.n();
    if (m == 0) break;
    if (m == 1 || cur.frobenius_norm() <= 1e-12 * std::max(1.0, x0)) {
      for (int j = 0; j < m; ++j) {
        std::vector<cplx> full = embed.col(j);
        basis.push_back(UnitVector::normalized(full));
      }
      break;
    }
    const UnitVector xi = isotropic_vector(cur, tol);
    basis.push_back(UnitVector::normalized(mat_vec(embed, xi.components)));
    const Matrix comp = detail::householder_complement(xi.components);
    cur = hermitian_part(comp.adjoint() * cur.mat() * comp);
    embed = embed * comp;
  }
  IsotropicResolution out;
  out.target = X;
  out.basis = basis;
  for (const UnitVector& b : basis) out.projections.push_back(b.as_projection());
  return out;
}

}  // namespace projsum
