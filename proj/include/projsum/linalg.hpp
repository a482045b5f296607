#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "projsum/complex_matrix.hpp"
#include "projsum/eig.hpp"
#include "projsum/errors.hpp"

namespace projsum {

namespace tolerance {
constexpr double kEpsOneDefault = 1e-9;   // snapping band around 1
constexpr double kIntegerTrace = 1e-8;    // integer-trace detection
constexpr double kPsdFloor = -1e-10;      // eigenvalues below this reject PSD
inline double rank_tol(double op_norm) { return 1e-9 * std::max(1.0, op_norm); }
}  // namespace tolerance

struct Projection {
  HermitianMatrix matrix;
  int rank = 0;
};

// max(||P^2 - P||_F, hermiticity is enforced by the type).
inline double idempotency_residual(const Projection& p) {
  const Matrix& m = p.matrix.mat();
  return (m * m - m).frobenius_norm();
}

struct ExcessDefectSplit {
  HermitianMatrix a_plus;   // (A - I) on the spectrum above 1, PSD
  HermitianMatrix a_minus;  // (I - A) on the spectrum in (0, 1), PSD
  Projection range_proj;    // R_A
  double tau_plus = 0.0;
  double tau_minus = 0.0;
  double tau_range = 0.0;
};

enum class CheckMode {
  MatrixFinite,
  MatrixIdentityBackground,
  MeasureII1,
  MeasureIIInf,
};

inline const char* check_mode_name(CheckMode m) {
  switch (m) {
    case CheckMode::MatrixFinite: return "matrix-finite";
    case CheckMode::MatrixIdentityBackground: return "matrix-identity-background";
    case CheckMode::MeasureII1: return "measure-II1";
    case CheckMode::MeasureIIInf: return "measure-IIinf";
  }
  return "unknown";
}

enum class ConditionReason {
  None,
  NotPositive,
  NonIntegerTrace,
  TraceBelowRank,
  NonIntegerSurplus,
  DefectExceedsExcess,
};

inline const char* condition_reason_name(ConditionReason r) {
  switch (r) {
    case ConditionReason::None: return "";
    case ConditionReason::NotPositive: return "NotPositive";
    case ConditionReason::NonIntegerTrace: return "NonIntegerTrace";
    case ConditionReason::TraceBelowRank: return "TraceBelowRank";
    case ConditionReason::NonIntegerSurplus: return "NonIntegerSurplus";
    case ConditionReason::DefectExceedsExcess: return "DefectExceedsExcess";
  }
  return "";
}

struct ConditionReport {
  CheckMode mode = CheckMode::MatrixFinite;
  bool decomposable = false;
  ConditionReason reason = ConditionReason::None;
  double witness = 0.0;   // the violated (or checked) quantity
  std::string detail;     // human-readable elaboration
};

// Thrown by operations whose precondition is a failed ConditionReport.
class ConditionError : public Error {
 public:
  ConditionError(ConditionReport report, const std::string& msg)
      : Error(Errc::ConditionFailed, msg), report_(std::move(report)) {}
  const ConditionReport& report() const { return report_; }

 private:
  ConditionReport report_;
};

// Real interval with independently open/closed endpoints.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  bool hi_open = false;

  static Interval open(double a, double b) { return {a, b, true, true}; }
  static Interval closed(double a, double b) { return {a, b, false, false}; }
  static Interval open_closed(double a, double b) { return {a, b, true, false}; }
  static Interval closed_open(double a, double b) { return {a, b, false, true}; }
  // (1, ||A||]: the excess window.
  static Interval above_one(double op_norm) { return open_closed(1.0, op_norm); }

  bool contains(double x) const {
    if (lo_open ? x <= lo : x < lo) return false;
    if (hi_open ? x >= hi : x > hi) return false;
    return true;
  }
};

namespace detail {

// Snap lam to the nearest interval endpoint within eps_one.
inline double snap_to_endpoints(double lam, const Interval& iv, double eps_one) {
  const double dlo = std::abs(lam - iv.lo);
  const double dhi = std::abs(lam - iv.hi);
  if (dlo <= eps_one && dlo <= dhi) return iv.lo;
  if (dhi <= eps_one) return iv.hi;
  return lam;
}

inline double snap_to_one(double lam, double eps_one) {
  return std::abs(lam - 1.0) <= eps_one ? 1.0 : lam;
}

}  // namespace detail

inline Projection spectral_projection(const HermitianMatrix& A,
                                      const Interval& interval,
                                      double eps_one = tolerance::kEpsOneDefault) {
  const SpectralDecomposition d = eig_hermitian(A);
  const int n = A.n();
  Matrix p(n, n);
  int rank = 0;
  for (int i = 0; i < n; ++i) {
    const double lam = detail::snap_to_endpoints(d.eigenvalues[i], interval, eps_one);
    if (!interval.contains(lam)) continue;
    p = p + outer(d.eigenvector(i), d.eigenvector(i));
    ++rank;
  }
  return {hermitian_part(p), rank};
}

inline ExcessDefectSplit excess_defect_split(const HermitianMatrix& A,
                                             double eps_one = tolerance::kEpsOneDefault) {
  const SpectralDecomposition d = eig_hermitian(A);
  const int n = A.n();
  const double rtol = tolerance::rank_tol(d.source_norm);
  ExcessDefectSplit out;
  Matrix plus(n, n), minus(n, n), range(n, n);
  int range_rank = 0;
  for (int i = 0; i < n; ++i) {
    double lam = d.eigenvalues[i];
    if (lam < tolerance::kPsdFloor)
      raise(Errc::NotPositive, "eigenvalue " + std::to_string(lam) + " below PSD floor");
    if (lam < 0.0) lam = 0.0;
    lam = detail::snap_to_one(lam, eps_one);
    if (lam <= rtol) continue;  // kernel
    const Matrix pr = outer(d.eigenvector(i), d.eigenvector(i));
    range = range + pr;
    ++range_rank;
    out.tau_range += 1.0;
    if (lam > 1.0) {
      plus = plus + (lam - 1.0) * pr;
      out.tau_plus += lam - 1.0;
    } else if (lam < 1.0) {
      minus = minus + (1.0 - lam) * pr;
      out.tau_minus += 1.0 - lam;
    }
  }
  out.a_plus = hermitian_part(plus);
  out.a_minus = hermitian_part(minus);
  out.range_proj = {hermitian_part(range), range_rank};
  return out;
}

inline HermitianMatrix sqrt_psd(const HermitianMatrix& A) {
  const SpectralDecomposition d = eig_hermitian(A);
  const int n = A.n();
  Matrix s(n, n);
  for (int i = 0; i < n; ++i) {
    double lam = d.eigenvalues[i];
    if (lam < tolerance::kPsdFloor)
      raise(Errc::NotPositive, "eigenvalue " + std::to_string(lam) + " below PSD floor");
    if (lam <= 0.0) continue;
    s = s + std::sqrt(lam) * outer(d.eigenvector(i), d.eigenvector(i));
  }
  return hermitian_part(s);
}

inline int rank_psd(const SpectralDecomposition& d) {
  const double rtol = tolerance::rank_tol(d.source_norm);
  int r = 0;
  for (double lam : d.eigenvalues)
    if (lam > rtol) ++r;
  return r;
}

// Fillmore-style decomposability check for matrices. Measure modes are
// handled in measure.hpp with exact arithmetic.
inline ConditionReport check_decomposable(const HermitianMatrix& A, CheckMode mode,
                                          double eps_one = tolerance::kEpsOneDefault) {
  ConditionReport rep;
  rep.mode = mode;
  const SpectralDecomposition d = eig_hermitian(A);
  const double lam_min = d.eigenvalues.empty() ? 0.0 : d.eigenvalues.back();
  if (lam_min < tolerance::kPsdFloor) {
    rep.decomposable = false;
    rep.reason = ConditionReason::NotPositive;
    rep.witness = lam_min;
    rep.detail = "smallest eigenvalue " + std::to_string(lam_min) + " is negative";
    return rep;
  }
  if (mode == CheckMode::MatrixFinite) {
    const double trace = A.trace();
    const double rounded = std::round(trace);
    if (std::abs(trace - rounded) > tolerance::kIntegerTrace || rounded < 0.0) {
      rep.decomposable = false;
      rep.reason = ConditionReason::NonIntegerTrace;
      rep.witness = trace;
      rep.detail = "trace " + std::to_string(trace) + " is not a nonnegative integer";
      return rep;
    }
    const int rank = rank_psd(d);
    if (rounded < static_cast<double>(rank)) {
      rep.decomposable = false;
      rep.reason = ConditionReason::TraceBelowRank;
      rep.witness = rounded - static_cast<double>(rank);
      rep.detail = "trace " + std::to_string(static_cast<long long>(rounded)) +
                   " is below rank " + std::to_string(rank);
      return rep;
    }
    rep.decomposable = true;
    rep.witness = rounded;
    rep.detail = "integer trace " + std::to_string(static_cast<long long>(rounded)) +
                 " >= rank " + std::to_string(rank);
    return rep;
  }
  if (mode == CheckMode::MatrixIdentityBackground) {
    // A here is the finite window I + X; the background is identity.
    double tau_plus = 0.0, tau_minus = 0.0;
    for (double lam : d.eigenvalues) {
      const double snapped = detail::snap_to_one(lam, eps_one);
      if (snapped > 1.0) tau_plus += snapped - 1.0;
      else if (snapped > tolerance::rank_tol(d.source_norm)) tau_minus += 1.0 - snapped;
    }
    const double surplus = tau_plus - tau_minus;
    const double rounded = std::round(surplus);
    rep.witness = surplus;
    if (surplus < -tolerance::kIntegerTrace) {
      rep.decomposable = false;
      rep.reason = ConditionReason::DefectExceedsExcess;
      rep.detail = "excess minus defect is " + std::to_string(surplus) + " < 0";
      return rep;
    }
    if (std::abs(surplus - rounded) > tolerance::kIntegerTrace) {
      rep.decomposable = false;
      rep.reason = ConditionReason::NonIntegerSurplus;
      rep.detail = "excess minus defect " + std::to_string(surplus) +
                   " is not a nonnegative integer";
      return rep;
    }
    rep.decomposable = true;
    rep.detail = "integer surplus " +
                 std::to_string(static_cast<long long>(std::max(0.0, rounded)));
    return rep;
  }
  rep.decomposable = false;
  rep.detail = "measure modes are checked in the measure calculus";
  return rep;
}

}  // namespace projsum
