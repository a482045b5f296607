#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "projsum/eig.hpp"
#include "projsum/measure.hpp"

namespace projsum {

// All generated instances derive from mt19937_64 raw bits so results are
// identical across platforms; std::*_distribution is avoided because its
// output is implementation-defined.
class SeededRng {
 public:
  explicit SeededRng(uint64_t seed) : rng_(seed) {}

  static const char* name() { return "mt19937_64"; }

  uint64_t raw() { return rng_(); }

  double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; consumes exactly two draws.
  double gaussian() {
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  long pick(long count) { return static_cast<long>(rng_() % static_cast<uint64_t>(count)); }

 private:
  std::mt19937_64 rng_;
};

namespace detail {

inline Matrix random_hermitian_raw(int n, SeededRng& rng) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      if (i == j) {
        m(i, j) = cplx(rng.gaussian(), 0.0);
      } else {
        const cplx v(rng.gaussian() * 0.5, rng.gaussian() * 0.5);
        m(i, j) = v;
        m(j, i) = std::conj(v);
      }
    }
  }
  return m;
}

}  // namespace detail

inline HermitianMatrix gen_random_hermitian(int n, uint64_t seed) {
  SeededRng rng(seed);
  return HermitianMatrix(detail::random_hermitian_raw(n, rng));
}

// Traceless Hermitian: gaussian entries minus (trace/n) I.
inline HermitianMatrix gen_traceless(int n, uint64_t seed) {
  SeededRng rng(seed);
  Matrix m = detail::random_hermitian_raw(n, rng);
  const double shift = m.trace().real() / n;
  for (int i = 0; i < n; ++i) m(i, i) -= shift;
  return HermitianMatrix(m);
}

// PSD matrix with integer trace T, rank <= T <= 3n: sample eigenvalues in
// [0.15, 2.8] (full rank), raise the top one until the trace hits the next
// integer at least n, and conjugate by the eigenbasis of an independent
// random Hermitian.
inline HermitianMatrix gen_fillmore_matrix(int n, uint64_t seed) {
  SeededRng rng(seed);
  std::vector<double> lambda(n);
  double s = 0.0;
  int top = 0;
  for (int i = 0; i < n; ++i) {
    lambda[i] = 0.15 + 2.65 * rng.uniform01();
    s += lambda[i];
    if (lambda[i] > lambda[top]) top = i;
  }
  const double target = std::max<double>(n, std::ceil(s));
  lambda[top] += target - s;

  const SpectralDecomposition basis =
      eig_hermitian(HermitianMatrix(detail::random_hermitian_raw(n, rng)));
  Matrix d(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = lambda[i];
  const Matrix a = basis.q * d * basis.q.adjoint();
  return HermitianMatrix(hermitian_part(a));
}

namespace detail {

// Dyadic rational in (0, hi] with denominator 2^max_k.
inline Rat random_dyadic(SeededRng& rng, long hi_num, int max_k) {
  const Rat denom = rat_pow2(max_k);
  const long num = 1 + rng.pick(hi_num);
  return Rat(num) / denom;
}

}  // namespace detail

// Balanced IIinf measure: dyadic atoms on both sides of 1, with the last
// defect mass chosen to match the excess exactly; occasionally an INFINITE
// background rides along.
inline SpectralMeasure gen_balanced_measure(uint64_t seed) {
  SeededRng rng(seed);
  std::vector<Atom> atoms;
  const int n_excess = 1 + static_cast<int>(rng.pick(3));
  const int n_defect = static_cast<int>(rng.pick(3));
  Rat plus = 0;
  Rat minus = 0;
  for (int i = 0; i < n_excess; ++i) {
    const Rat value = 1 + detail::random_dyadic(rng, 12, 2);  // (1, 4]
    const Rat mass = detail::random_dyadic(rng, 8, 2);
    atoms.push_back({value, mass});
    plus += (value - 1) * mass;
  }
  for (int i = 0; i < n_defect; ++i) {
    const Rat value = detail::random_dyadic(rng, 14, 4);  // (0, 7/8]
    const Rat mass = detail::random_dyadic(rng, 8, 2);
    atoms.push_back({value, mass});
    minus += (1 - value) * mass;
  }
  // Exact rebalance with one more atom at 1/2 or 2.
  if (plus > minus) {
    atoms.push_back({Rat(1, 2), (plus - minus) * 2});
  } else if (minus > plus) {
    atoms.push_back({Rat(2), minus - plus});
  }
  ExtRat bg = ExtRat::finite(0);
  if (seed % 4 == 0) bg = ExtRat::inf();
  else if (seed % 4 == 1) bg = ExtRat::finite(detail::random_dyadic(rng, 8, 1));
  return SpectralMeasure(Ambient::IIinf, std::move(atoms), {}, bg);
}

// Surplus IIinf measure: excess strictly above defect; every third seed has
// zero defect (the geometric-block branch).
inline SpectralMeasure gen_surplus_measure(uint64_t seed) {
  SeededRng rng(seed);
  std::vector<Atom> atoms;
  Rat plus = 0;
  const int n_excess = 1 + static_cast<int>(rng.pick(3));
  for (int i = 0; i < n_excess; ++i) {
    const Rat value = 1 + detail::random_dyadic(rng, 12, 2);
    const Rat mass = detail::random_dyadic(rng, 8, 2);
    atoms.push_back({value, mass});
    plus += (value - 1) * mass;
  }
  if (seed % 3 != 0) {
    // Defect strictly below the excess: plus * f with dyadic f < 1, carried
    // by a single atom at value 1/2.
    const Rat f = Rat(1 + rng.pick(7), 8);
    atoms.push_back({Rat(1, 2), plus * f * 2});
  }
  ExtRat bg = ExtRat::finite(0);
  if (seed % 5 == 0) bg = ExtRat::finite(detail::random_dyadic(rng, 8, 1));
  return SpectralMeasure(Ambient::IIinf, std::move(atoms), {}, bg);
}

// II1 measure aligned to the 2^k matrix algebra: every mass a multiple of
// 2^-k, dyadic values, integer trace at least the support rank (excess at
// least defect), so the full pipeline materializes exactly.
inline SpectralMeasure gen_ii1_dyadic(int k, uint64_t seed) {
  SeededRng rng(seed);
  const long slots = 1L << k;
  // Slot values: twice the value stored, so {0,1,2,3,4,6} means
  // {kernel, 1/2, 1, 3/2, 2, 3}.
  static const long kChoices[] = {0, 1, 2, 3, 4, 6};
  std::vector<long> twice(static_cast<size_t>(slots));
  long nonzero = 0;
  for (auto& t : twice) {
    t = kChoices[rng.pick(6)];
    if (t != 0) ++nonzero;
  }
  if (nonzero == 0) twice[0] = 2;
  // Raise values until excess >= defect (trace >= rank), flipping the
  // smallest sub-1 slots to value 2.
  auto surplus_x2 = [&]() {
    long s = 0;
    for (long t : twice)
      if (t != 0) s += t - 2;
    return s;
  };
  while (surplus_x2() < 0) {
    long best = -1;
    for (size_t i = 0; i < twice.size(); ++i)
      if (twice[i] != 0 && twice[i] < 4 &&
          (best < 0 || twice[i] < twice[static_cast<size_t>(best)]))
        best = static_cast<long>(i);
    if (best < 0) break;  // negative surplus guarantees a sub-1 slot exists
    twice[static_cast<size_t>(best)] = 4;
  }
  // Integer total trace: clear odd parity by promoting one half-integer slot.
  long sum = 0;
  for (long t : twice) sum += t;
  if (sum % 2 != 0) {
    for (auto& t : twice) {
      if (t % 2 != 0) {
        t += 1;
        break;
      }
    }
  }
  std::vector<long> counts(7, 0);
  for (long t : twice) ++counts[static_cast<size_t>(t)];
  std::vector<Atom> atoms;
  ExtRat bg = ExtRat::finite(0);
  const Rat unit = Rat(1) / rat_pow2(k);
  for (long t = 1; t <= 6; ++t) {
    if (counts[static_cast<size_t>(t)] == 0) continue;
    const Rat mass = unit * counts[static_cast<size_t>(t)];
    if (t == 2) bg = ExtRat::finite(mass);
    else atoms.push_back({Rat(t, 2), mass});
  }
  return SpectralMeasure(Ambient::II1, std::move(atoms), {}, bg);
}

}  // namespace projsum
