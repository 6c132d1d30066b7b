#include "doctest.h"

#include <stdexcept>

#include "addwalk/exact.hpp"

using namespace addwalk;

TEST_CASE("int128 decimal printing") {
  CHECK_EQ(to_string_i128(0), "0");
  CHECK_EQ(to_string_i128(42), "42");
  CHECK_EQ(to_string_i128(-7), "-7");
  // 2^100 and its negation, beyond 64-bit range.
  int128 big = 1;
  for (int i = 0; i < 100; ++i) big *= 2;
  CHECK_EQ(to_string_i128(big), "1267650600228229401496703205376");
  CHECK_EQ(to_string_i128(-big), "-1267650600228229401496703205376");
}

TEST_CASE("checked 128-bit arithmetic overflows loudly") {
  int128 big = 1;
  for (int i = 0; i < 126; ++i) big *= 2;
  CHECK_THROWS_AS((void)checked_add(big, big), std::overflow_error);
  CHECK_THROWS_AS((void)checked_mul(big, 4), std::overflow_error);
  CHECK_EQ(checked_mul(big, 1), big);
  CHECK_EQ(checked_add(big, -big), int128(0));
}

TEST_CASE("rational normalization and arithmetic") {
  const Rational half(2, 4);
  CHECK_EQ(half.num, int128(1));
  CHECK_EQ(half.den, int128(2));

  const Rational neg(3, -6);  // sign moves to the numerator
  CHECK_EQ(neg.num, int128(-1));
  CHECK_EQ(neg.den, int128(2));

  CHECK_EQ(Rational(0, -5), Rational(0, 1));
  CHECK_THROWS_AS(Rational(1, 0), std::domain_error);

  CHECK_EQ(half + Rational(1, 3), Rational(5, 6));
  CHECK_EQ(half - Rational(1, 3), Rational(1, 6));
  CHECK_EQ(half * Rational(4, 3), Rational(2, 3));
  CHECK_EQ((half * Rational(4, 3)).str(), "2/3");

  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational(-1, 2) < Rational(-1, 3));
  CHECK(Rational(7, 7) <= Rational(1, 1));
  CHECK_EQ(Rational::from_int(-4).str(), "-4/1");
  CHECK_EQ(Rational(1, 3).to_double(), doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("rational comparison survives magnitudes that overflow naive cross products") {
  // a/b vs c/d with a*d and c*b both > 2^127: cmp must still be exact.
  int128 big = 1;
  for (int i = 0; i < 70; ++i) big *= 2;  // 2^70
  const Rational x(big + 1, big);     // slightly above 1
  const Rational y(big, big - 1);     // slightly further above 1
  CHECK(x < y);
  CHECK(!(y < x));
  CHECK(x < Rational(2, 1));
}

TEST_CASE("interval arithmetic certifies only genuine separations") {
  const Bound a = Bound::exact(1.0);
  const Bound b = Bound::exact(2.0);
  CHECK(a.certified_le(b));
  CHECK(!b.certified_le(a));

  // Padded image of a rational contains the exact real value.
  const Bound third = Bound::of_rational(Rational(1, 3));
  CHECK(third.lo < 1.0 / 3.0);
  CHECK(third.hi > 1.0 / 3.0);

  // Overlapping intervals refuse to certify either direction.
  const Bound c{0.9, 1.1};
  const Bound d{1.0, 1.2};
  CHECK(!c.certified_le(d));
  CHECK(!d.certified_le(c));

  // sqrt(4) = 2 inside the padded root interval.
  const Bound four = Bound::exact(4.0);
  const Bound root = four.root(2);
  CHECK(root.lo <= 2.0);
  CHECK(root.hi >= 2.0);
  CHECK(root.hi - root.lo < 1e-10);

  const Bound scaled = a.scale(3.0);
  CHECK(scaled.lo <= 3.0);
  CHECK(scaled.hi >= 3.0);
  const Bound sum = a + b;
  CHECK(sum.lo <= 3.0);
  CHECK(sum.hi >= 3.0);
  const Bound prod = b.mul_nonneg(b);
  CHECK(prod.lo <= 4.0);
  CHECK(prod.hi >= 4.0);
}
