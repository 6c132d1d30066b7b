// Exact integer/rational arithmetic and certified directed-rounding bounds.
//
// The enumeration oracle works with dyadic step probabilities, so every
// expectation it produces is a ratio of 128-bit integers. Comparisons between
// such ratios are done exactly via 256-bit cross products. Quantities that
// involve p-th roots cannot stay rational; they are handled as [lo, hi]
// double intervals rounded outward, so an inequality verdict certified on the
// intervals is a genuine verdict on the exact values.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace addwalk {

using int128 = __int128;
using uint128 = unsigned __int128;

std::string to_string_i128(int128 v);

// Overflow-checked multiply/add for 128-bit accumulators. The enumeration
// module sizes its work so these never fire; they are the safety net that
// turns a sizing mistake into an error instead of silent wraparound.
inline int128 checked_mul(int128 a, int128 b) {
  if (a == 0 || b == 0) return 0;
  int128 r;
  if (__builtin_mul_overflow(a, b, &r)) {
    throw std::overflow_error("128-bit multiply overflow");
  }
  return r;
}

inline int128 checked_add(int128 a, int128 b) {
  int128 r;
  if (__builtin_add_overflow(a, b, &r)) {
    throw std::overflow_error("128-bit add overflow");
  }
  return r;
}

// 256-bit unsigned product, hi/lo halves.
struct U256 {
  uint128 hi = 0;
  uint128 lo = 0;
};

inline U256 mul_u128(uint128 a, uint128 b) {
  const uint128 mask = (uint128(1) << 64) - 1;
  const uint128 a0 = a & mask, a1 = a >> 64;
  const uint128 b0 = b & mask, b1 = b >> 64;
  const uint128 p00 = a0 * b0;
  const uint128 p01 = a0 * b1;
  const uint128 p10 = a1 * b0;
  const uint128 p11 = a1 * b1;
  uint128 mid = (p00 >> 64) + (p01 & mask) + (p10 & mask);
  U256 r;
  r.lo = (mid << 64) | (p00 & mask);
  r.hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);
  return r;
}

inline int cmp_u256(const U256& x, const U256& y) {
  if (x.hi != y.hi) return x.hi < y.hi ? -1 : 1;
  if (x.lo != y.lo) return x.lo < y.lo ? -1 : 1;
  return 0;
}

// Exact comparison of a/b vs c/d with b, d > 0: sign of a*d - c*b.
inline int cmp_ratio(int128 a, int128 b, int128 c, int128 d) {
  const bool na = a < 0, nc = c < 0;
  if (na != nc) return na ? -1 : 1;
  const uint128 ua = na ? uint128(-a) : uint128(a);
  const uint128 uc = nc ? uint128(-c) : uint128(c);
  const int s = cmp_u256(mul_u128(ua, uint128(d)), mul_u128(uc, uint128(b)));
  return na ? -s : s;
}

// Reduced rational with positive denominator.
struct Rational {
  int128 num = 0;
  int128 den = 1;

  Rational() = default;
  Rational(int128 n, int128 d) : num(n), den(d) { normalize(); }
  static Rational from_int(int128 n) { return Rational(n, 1); }

  void normalize() {
    if (den == 0) throw std::domain_error("rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    if (num == 0) {
      den = 1;
      return;
    }
    uint128 a = num < 0 ? uint128(-num) : uint128(num);
    uint128 b = uint128(den);
    while (b != 0) {
      const uint128 t = a % b;
      a = b;
      b = t;
    }
    num /= int128(a);
    den /= int128(a);
  }

  Rational operator+(const Rational& o) const {
    return Rational(checked_add(checked_mul(num, o.den), checked_mul(o.num, den)),
                    checked_mul(den, o.den));
  }
  Rational operator-(const Rational& o) const {
    return Rational(checked_add(checked_mul(num, o.den), -checked_mul(o.num, den)),
                    checked_mul(den, o.den));
  }
  Rational operator*(const Rational& o) const {
    // Cross-reduce before multiplying to keep intermediates small.
    Rational x(num, o.den), y(o.num, den);
    return Rational(checked_mul(x.num, y.num), checked_mul(x.den, y.den));
  }

  int cmp(const Rational& o) const { return cmp_ratio(num, den, o.num, o.den); }
  bool operator<(const Rational& o) const { return cmp(o) < 0; }
  bool operator<=(const Rational& o) const { return cmp(o) <= 0; }
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }

  // Correctly-rounded-conversion quotient; both conversions and the division
  // are faithful to < 3 ulp combined.
  double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }

  std::string str() const {
    return to_string_i128(num) + "/" + to_string_i128(den);
  }
};

// Closed interval [lo, hi] guaranteed to contain the exact real value.
// Arithmetic pads each operation by kPad outward, which over-covers the
// at-most-0.5-ulp error of IEEE double ops and the < 2 ulp error of pow.
struct Bound {
  double lo = 0.0;
  double hi = 0.0;

  static constexpr double kPad = 1e-12;  // relative outward padding

  static double pad_down(double x) {
    return x - std::abs(x) * kPad - std::numeric_limits<double>::min();
  }
  static double pad_up(double x) {
    return x + std::abs(x) * kPad + std::numeric_limits<double>::min();
  }

  static Bound exact(double x) { return Bound{x, x}; }

  static Bound of_rational(const Rational& r) {
    const double q = r.to_double();
    return Bound{pad_down(q), pad_up(q)};
  }

  Bound operator+(const Bound& o) const {
    return Bound{pad_down(lo + o.lo), pad_up(hi + o.hi)};
  }

  // Multiplication for nonnegative operands (all uses here are nonnegative).
  Bound mul_nonneg(const Bound& o) const {
    return Bound{pad_down(lo * o.lo), pad_up(hi * o.hi)};
  }

  // x^(1/k) for nonnegative x, k >= 1.
  Bound root(int k) const {
    const double rl = std::pow(lo < 0 ? 0.0 : lo, 1.0 / k);
    const double rh = std::pow(hi < 0 ? 0.0 : hi, 1.0 / k);
    return Bound{pad_down(rl), pad_up(rh)};
  }

  Bound scale(double c) const {  // c >= 0
    return Bound{pad_down(lo * c), pad_up(hi * c)};
  }

  // Certified "this <= other": true only if the inequality holds for every
  // pair of reals in the two intervals.
  bool certified_le(const Bound& o) const { return hi <= o.lo; }
};

}  // namespace addwalk
