#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "projsum/complex_matrix.hpp"
#include "projsum/eig.hpp"
#include "projsum/errors.hpp"
#include "projsum/isotropic.hpp"
#include "projsum/linalg.hpp"

namespace projsum {

struct ProjectionList {
  std::vector<Projection> projections;
  HermitianMatrix target;  // finite part (the window matrix in background mode)
  bool background = false;  // identity on an infinite complement, symbolic
  // Background mode only: the window's unit eigenspace. It belongs to the
  // background ("any resolution of the 1-eigenspace into projections fixed
  // by A"), not to the finite list; truncation checks add it back.
  Projection background_window;
};

struct IsometryAssembly {
  std::vector<Matrix> w_list;      // partial isometries W_j
  std::vector<Projection> f_list;  // coordinate range projections F_j
  Matrix b;                        // B = sum W_j
  Matrix v;                        // unitary polar factor, B = V A^{1/2}
};

// A = I + X on an m-dimensional window, identity on an infinite complement.
struct IdentityBackgroundOperator {
  HermitianMatrix finite_part;  // X = X*

  HermitianMatrix window() const { return finite_part.shifted(1.0); }  // I + X
  int window_dim() const { return finite_part.n(); }
};

struct SumCertificate {
  std::string target_hash;  // filled when serialized; empty in-memory otherwise
  double sum_residual = 0.0;
  double idem_max = 0.0;
  double herm_max = 0.0;
  std::vector<double> idem_residuals;
  std::vector<double> herm_residuals;
  int count = 0;
  std::string mode;
  double tol = 0.0;
  bool pass = false;
};

// Raw verifier: accepts arbitrary square matrices so certificates read back
// from disk can fail gracefully instead of being rejected at construction.
inline SumCertificate verify_sum_raw(const Matrix& target,
                                     const std::vector<Matrix>& projections,
                                     double tol, const std::string& mode) {
  SumCertificate cert;
  cert.mode = mode;
  cert.tol = tol;
  cert.count = static_cast<int>(projections.size());
  Matrix sum(target.rows(), target.cols());
  for (const Matrix& p : projections) {
    const double herm = (p - p.adjoint()).frobenius_norm();
    const double idem = (p * p - p).frobenius_norm();
    cert.herm_residuals.push_back(herm);
    cert.idem_residuals.push_back(idem);
    cert.herm_max = std::max(cert.herm_max, herm);
    cert.idem_max = std::max(cert.idem_max, idem);
    sum = sum + p;
  }
  cert.sum_residual = (sum - target).frobenius_norm();
  const double sum_scale = std::max(1.0, target.frobenius_norm());
  cert.pass = cert.sum_residual <= tol * sum_scale && cert.idem_max <= tol &&
              cert.herm_max <= tol;
  return cert;
}

inline SumCertificate verify_sum(const HermitianMatrix& A, const ProjectionList& plist,
                                 double tol) {
  std::vector<Matrix> ps;
  ps.reserve(plist.projections.size());
  for (const Projection& p : plist.projections) ps.push_back(p.matrix.mat());
  // In background mode the finite list covers the target minus its unit
  // eigenspace (that part is resolved by the background).
  Matrix target = A.mat();
  if (plist.background && plist.background_window.matrix.n() == A.n())
    target = target - plist.background_window.matrix.mat();
  return verify_sum_raw(target, ps, tol,
                        plist.background ? "matrix-identity-background" : "matrix-finite");
}

// Lemma "flatten": P_j = A^{1/2} E_j A^{1/2} for an isotropic resolution of
// A - I. Rank-one resolutions use the vector form directly.
inline ProjectionList flatten_to_projections(const HermitianMatrix& A,
                                             const IsotropicResolution& res) {
  const int n = A.n();
  Matrix esum(n, n);
  for (const Projection& e : res.projections) esum = esum + e.matrix.mat();
  if ((esum - Matrix::identity(n)).frobenius_norm() > 1e-7)
    raise(Errc::NotFlat, "resolution does not sum to the identity");
  for (const Projection& e : res.projections) {
    const Matrix& em = e.matrix.mat();
    if ((em * A.mat() * em - em).frobenius_norm() > 1e-8)
      raise(Errc::NotFlat, "E A E != E for a resolution element");
  }
  const HermitianMatrix s = sqrt_psd(A);
  ProjectionList out;
  out.target = A;
  if (!res.basis.empty()) {
    for (const UnitVector& b : res.basis) {
      const std::vector<cplx> p = mat_vec(s.mat(), b.components);
      out.projections.push_back({hermitian_part(outer(p, p)), 1});
    }
  } else {
    for (const Projection& e : res.projections)
      out.projections.push_back(
          {hermitian_part(s.mat() * e.matrix.mat() * s.mat()), e.rank});
  }
  return out;
}

// Lemma "lift": from projections P_j summing to A with trace(A) = n, build
// partial isometries W_j onto stacked coordinate blocks F_j, B = sum W_j,
// polar-factor B = V A^{1/2}, and return E_j = V* F_j V.
inline std::pair<IsotropicResolution, IsometryAssembly> resolution_from_projections(
    const HermitianMatrix& A, const ProjectionList& plist) {
  const int n = A.n();
  if (std::abs(A.trace() - static_cast<double>(n)) > tolerance::kIntegerTrace)
    raise(Errc::TraceMismatch,
          "trace " + std::to_string(A.trace()) + " != dimension " + std::to_string(n));
  Matrix psum(n, n);
  int total_rank = 0;
  for (const Projection& p : plist.projections) {
    psum = psum + p.matrix.mat();
    total_rank += p.rank;
  }
  const double scale = std::max(1.0, A.frobenius_norm());
  if ((psum - A.mat()).frobenius_norm() > 1e-8 * scale)
    raise(Errc::NotSum, "projections do not sum to A");
  if (total_rank != n)
    raise(Errc::NotSum, "total rank " + std::to_string(total_rank) +
                            " != dimension " + std::to_string(n));

  IsometryAssembly asmbl;
  asmbl.b = Matrix(n, n);
  int offset = 0;
  for (const Projection& p : plist.projections) {
    const SpectralDecomposition pd = eig_hermitian(p.matrix);
    Matrix w(n, n);
    Matrix f(n, n);
    for (int i = 0; i < p.rank; ++i) {
      const std::vector<cplx> u = pd.eigenvector(i);
      for (int cidx = 0; cidx < n; ++cidx)
        w(offset + i, cidx) += std::conj(u[cidx]);
      f(offset + i, offset + i) = 1.0;
    }
    asmbl.w_list.push_back(w);
    asmbl.f_list.push_back({HermitianMatrix(std::move(f), 1.0), p.rank});
    asmbl.b = asmbl.b + w;
    offset += p.rank;
  }

  // Polar part: V q_i = B q_i / sqrt(lambda_i) on the range of A, completed
  // by Gram-Schmidt over the coordinate basis on the kernel.
  const SpectralDecomposition ad = eig_hermitian(A);
  const double rtol = tolerance::rank_tol(ad.source_norm);
  std::vector<std::vector<cplx>> vcols;
  std::vector<std::vector<cplx>> qcols;
  for (int i = 0; i < n; ++i) {
    if (ad.eigenvalues[i] <= rtol) continue;
    std::vector<cplx> v = mat_vec(asmbl.b, ad.eigenvector(i));
    const double inv = 1.0 / std::sqrt(ad.eigenvalues[i]);
    for (cplx& x : v) x *= inv;
    vcols.push_back(UnitVector::normalized(v).components);
    qcols.push_back(ad.eigenvector(i));
  }
  for (int cand = 0; cand < n && static_cast<int>(vcols.size()) < n; ++cand) {
    std::vector<cplx> v(n, cplx(0.0));
    v[cand] = 1.0;
    for (const std::vector<cplx>& w : vcols) {
      const cplx overlap = inner(v, w);
      for (int i = 0; i < n; ++i) v[i] -= overlap * w[i];
    }
    if (vec_norm(v) <= 1e-6) continue;
    vcols.push_back(UnitVector::normalized(v).components);
  }
  for (int i = 0; i < n; ++i) {
    if (ad.eigenvalues[i] > rtol) continue;
    qcols.push_back(ad.eigenvector(i));
  }
  // V = sum_i v_i q_i*.
  Matrix v(n, n);
  for (int i = 0; i < n; ++i)
    v = v + outer(vcols[static_cast<size_t>(i)], qcols[static_cast<size_t>(i)]);
  asmbl.v = v;

  IsotropicResolution res;
  res.target = A.shifted(-1.0);
  bool all_rank_one = true;
  for (size_t j = 0; j < plist.projections.size(); ++j) {
    const Matrix ej = v.adjoint() * asmbl.f_list[j].matrix.mat() * v;
    res.projections.push_back({hermitian_part(ej), plist.projections[j].rank});
    if (plist.projections[j].rank != 1) all_rank_one = false;
  }
  if (all_rank_one) {
    // Basis vector for block j is V* e_j: the conjugated j-th row of V.
    for (int j = 0; j < n; ++j) {
      std::vector<cplx> b(n);
      for (int i = 0; i < n; ++i) b[i] = std::conj(v(j, i));
      res.basis.push_back(UnitVector::normalized(b));
    }
  }
  return {std::move(res), std::move(asmbl)};
}

// Unit-trace decomposition (trace(A) = n): zero-diagonal resolution of
// X = A - I, then flatten through A^{1/2}. Exactly n rank-one projections.
inline ProjectionList decompose_unit_trace(const HermitianMatrix& A) {
  const int n = A.n();
  const SpectralDecomposition d = eig_hermitian(A);
  if (!d.eigenvalues.empty() && d.eigenvalues.back() < tolerance::kPsdFloor)
    raise(Errc::NotPositive, "A is not positive semidefinite");
  if (std::abs(A.trace() - static_cast<double>(n)) > tolerance::kIntegerTrace)
    raise(Errc::TraceMismatch, "trace " + std::to_string(A.trace()) +
                                   " != dimension " + std::to_string(n));
  const IsotropicResolution res =
      zero_diagonal_resolution(A.shifted(-1.0), tolerance::kIntegerTrace);
  return flatten_to_projections(A, res);
}

namespace detail {

// Embed an r-dimensional projection into n dimensions through the isometry
// C (n x r with orthonormal columns).
inline Projection embed_projection(const Matrix& c, const Projection& p) {
  return {hermitian_part(c * p.matrix.mat() * c.adjoint()), p.rank};
}

}  // namespace detail

// Fillmore decomposition: integer trace T >= rank. Restrict to the range,
// peel top rank-one eigenprojections while trace exceeds the support
// dimension, then the unit-trace base case. Exactly T rank-one projections.
inline ProjectionList decompose_fillmore(const HermitianMatrix& A) {
  ConditionReport rep = check_decomposable(A, CheckMode::MatrixFinite);
  if (!rep.decomposable)
    throw ConditionError(rep, "Fillmore condition fails: " + rep.detail);
  const long long t = std::llround(A.trace());
  const int n = A.n();
  ProjectionList out;
  out.target = A;
  if (t == 0) return out;  // A = 0 within tolerance

  const SpectralDecomposition d = eig_hermitian(A);
  const double rtol = tolerance::rank_tol(d.source_norm);
  const int r = rank_psd(d);
  Matrix c(n, r);
  for (int j = 0, k = 0; j < n; ++j) {
    if (d.eigenvalues[j] <= rtol) continue;
    for (int i = 0; i < n; ++i) c(i, k) = d.q(i, j);
    ++k;
  }
  HermitianMatrix cur = hermitian_part(c.adjoint() * A.mat() * c);
  const long long peels = t - r;
  for (long long k = 0; k < peels; ++k) {
    const SpectralDecomposition cd = eig_hermitian(cur);
    const std::vector<cplx> e = cd.eigenvector(0);
    out.projections.push_back(detail::embed_projection(c, {hermitian_part(outer(e, e)), 1}));
    cur = hermitian_part(cur.mat() - outer(e, e));
  }
  const ProjectionList base = decompose_unit_trace(cur);
  for (const Projection& p : base.projections)
    out.projections.push_back(detail::embed_projection(c, p));
  return out;
}

// Identity-background decomposition: A = I + X on a finite window against an
// infinite identity background. Requires integer surplus tau+ - tau-. The
// window's unit eigenspace joins the background (for X = 0 the finite list is
// empty); on the deviation support, peels reduce the surplus by exactly one
// and the balanced remainder flattens through the zero-diagonal machinery.
inline ProjectionList decompose_identity_background(
    const IdentityBackgroundOperator& op, double eps_one = tolerance::kEpsOneDefault) {
  const HermitianMatrix aw = op.window();
  ConditionReport rep = check_decomposable(aw, CheckMode::MatrixIdentityBackground, eps_one);
  if (!rep.decomposable)
    throw ConditionError(rep, "identity-background condition fails: " + rep.detail);
  const int m = aw.n();
  ProjectionList out;
  out.target = aw;
  out.background = true;

  // Classify window eigenvalues: kernel and near-1 directions carry no
  // deviation; the 1-eigenspace is returned as the background-window part.
  const SpectralDecomposition d = eig_hermitian(aw);
  const double rtol = tolerance::rank_tol(d.source_norm);
  Matrix one_space(m, m);
  int one_rank = 0;
  std::vector<int> deviation;
  for (int j = 0; j < m; ++j) {
    const double lam = d.eigenvalues[j];
    if (lam <= rtol) continue;  // window kernel: not covered by any P_j
    if (std::abs(lam - 1.0) <= eps_one) {
      one_space = one_space + outer(d.eigenvector(j), d.eigenvector(j));
      ++one_rank;
      continue;
    }
    deviation.push_back(j);
  }
  out.background_window = {hermitian_part(one_space), one_rank};

  const int r = static_cast<int>(deviation.size());
  if (r == 0) return out;  // A = I (+ kernel) on the window: empty finite list
  Matrix c(m, r);
  for (int k = 0; k < r; ++k)
    for (int i = 0; i < m; ++i) c(i, k) = d.q(i, deviation[static_cast<size_t>(k)]);
  HermitianMatrix cur = hermitian_part(c.adjoint() * aw.mat() * c);
  const long long k_peels = std::llround(rep.witness);
  for (long long k = 0; k < k_peels; ++k) {
    const SpectralDecomposition cd = eig_hermitian(cur);
    const std::vector<cplx> e = cd.eigenvector(0);
    out.projections.push_back(detail::embed_projection(c, {hermitian_part(outer(e, e)), 1}));
    cur = hermitian_part(cur.mat() - outer(e, e));
  }
  // Balanced remainder: X' = cur - I_r is traceless on the deviation
  // support; flatten its zero-diagonal resolution into r rank-one parts.
  const IsotropicResolution res = zero_diagonal_resolution(
      cur.shifted(-1.0), tolerance::kIntegerTrace * (1.0 + static_cast<double>(k_peels)));
  const ProjectionList flat = flatten_to_projections(cur, res);
  for (const Projection& p : flat.projections)
    out.projections.push_back(detail::embed_projection(c, p));
  return out;
}

// Truncation consistency for the background mode: at truncation dimension
// mdim >= window, diag(A_w, I) must equal the finite sum plus the background
// resolution (window 1-eigenspace plus the coordinate resolution of the
// complement). Returns the Frobenius residual.
inline double truncation_residual(const IdentityBackgroundOperator& op,
                                  const ProjectionList& plist, int mdim) {
  const int w = op.window_dim();
  if (mdim < w) raise(Errc::TargetOutOfRange, "truncation below the window");
  Matrix big_target(mdim, mdim);
  const HermitianMatrix aw = op.window();
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < w; ++j) big_target(i, j) = aw(i, j);
  for (int i = w; i < mdim; ++i) big_target(i, i) = 1.0;
  Matrix big_sum(mdim, mdim);
  for (const Projection& p : plist.projections)
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j) big_sum(i, j) += p.matrix(i, j);
  if (plist.background_window.matrix.n() == w)
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j) big_sum(i, j) += plist.background_window.matrix(i, j);
  for (int i = w; i < mdim; ++i) big_sum(i, i) += 1.0;
  return (big_target - big_sum).frobenius_norm();
}

}  // namespace projsum
