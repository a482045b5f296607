#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cctype>
#include <limits>
#include <string>

#include "projsum/errors.hpp"

namespace projsum {

using Rat = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Strict "p/q" (or "p") parser; also accepts a leading minus sign. Anything
// else, including whitespace, is a schema error.
inline Rat parse_rational(const std::string& s) {
  const auto bad = [&]() -> Rat {
    raise(Errc::ParseError, "malformed rational '" + s + "'");
  };
  size_t i = 0;
  bool neg = false;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
    neg = s[i] == '-';
    ++i;
  }
  if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) return bad();
  BigInt num = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    num = num * 10 + (s[i] - '0');
    ++i;
  }
  BigInt den = 1;
  if (i < s.size()) {
    if (s[i] != '/') return bad();
    ++i;
    if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) return bad();
    den = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      den = den * 10 + (s[i] - '0');
      ++i;
    }
    if (i != s.size()) return bad();
    if (den == 0) raise(Errc::ParseError, "zero denominator in '" + s + "'");
  }
  Rat r(num, den);
  return neg ? Rat(-r) : r;
}

inline std::string rat_to_string(const Rat& r) {
  const BigInt num = boost::multiprecision::numerator(r);
  const BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

inline Rat rat_pow2(int k) {
  BigInt p = 1;
  p <<= k;
  return Rat(p);
}

// True when r is an integer multiple of 2^-k.
inline bool is_dyadic(const Rat& r, int k) {
  const Rat scaled = r * rat_pow2(k);
  return boost::multiprecision::denominator(scaled) == 1;
}

inline bool is_integer(const Rat& r) {
  return boost::multiprecision::denominator(r) == 1;
}

// Nonnegative rational extended with +infinity (for semifinite traces and
// the INFINITE background mass).
struct ExtRat {
  bool infinite = false;
  Rat value = 0;

  static ExtRat inf() { return {true, 0}; }
  static ExtRat finite(Rat v) { return {false, std::move(v)}; }

  bool is_finite() const { return !infinite; }

  ExtRat operator+(const ExtRat& o) const {
    if (infinite || o.infinite) return inf();
    return finite(value + o.value);
  }
  ExtRat operator+(const Rat& o) const { return *this + finite(o); }

  bool operator==(const ExtRat& o) const {
    if (infinite != o.infinite) return false;
    return infinite || value == o.value;
  }
  bool operator!=(const ExtRat& o) const { return !(*this == o); }

  // r <= *this, with INF dominating every finite value.
  bool at_least(const Rat& r) const { return infinite || value >= r; }
};

inline std::string extrat_to_string(const ExtRat& e) {
  return e.infinite ? "INF" : rat_to_string(e.value);
}

inline double extrat_to_double(const ExtRat& e) {
  return e.infinite ? std::numeric_limits<double>::infinity() : rat_to_double(e.value);
}

}  // namespace projsum
