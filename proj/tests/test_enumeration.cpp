#include "doctest.h"

#include <cstdint>
#include <stdexcept>

#include "addwalk/enumeration.hpp"
#include "addwalk/exact.hpp"
#include "addwalk/spectral.hpp"
#include "addwalk/walk_model.hpp"

using namespace addwalk;

TEST_CASE("grouping one lazy step") {
  const WalkModel lazy = lazy_simple_model(1);
  const GroupedWalk g = group_walk_paths(lazy, 1, false);
  CHECK_EQ(g.n, 1);
  CHECK_EQ(g.d, 1);
  CHECK(!g.symmetrized);
  // Outcomes {hold, +1, -1} with weights {2, 1, 1} over denominator 4.
  CHECK_EQ(g.denominator, int128(4));
  REQUIRE_EQ(g.groups.size(), std::size_t(3));
  int128 total = 0;
  for (const MeasureGroup& grp : g.groups) total += grp.weight;
  CHECK_EQ(total, int128(4));
  // Signed variant doubles the outcome space (n+1 = 2 signs).
  const GroupedWalk gs = group_walk_paths(lazy, 1, true);
  CHECK_EQ(gs.denominator, int128(16));
}

TEST_CASE("exact rational anchors at horizon 1") {
  const WalkModel lazy = lazy_simple_model(1);
  const ExactMomentReport r1 = enumerate_moments(lazy, 1, 1, 2);
  CHECK_EQ(r1.mass.str(), "1/1");
  CHECK_EQ(r1.origin_moments[0].str(), "3/2");
  CHECK_EQ(r1.origin_moments[1].str(), "5/2");
  CHECK_EQ(r1.square_sum_moments[0].str(), "3/1");
  CHECK_EQ(r1.square_sum_moments[1].str(), "10/1");

  const ExactMomentReport r2 = enumerate_moments(lazy, 1, 2, 2);
  CHECK_EQ(r2.mass.str(), "1/1");
  CHECK_EQ(r2.origin_moments[0].str(), "19/8");
  CHECK_EQ(r2.origin_moments[1].str(), "53/8");
}

TEST_CASE("enumeration agrees with the quadrature oracle") {
  // Two fully independent exact routes (path grouping with rational
  // arithmetic vs trigonometric quadrature) must coincide to rounding.
  struct Cell {
    const char* kind;
    int d;
    int p;
  };
  const Cell cells[] = {
      {"lazy-simple", 1, 1}, {"lazy-simple", 1, 2}, {"lazy-simple", 2, 1},
      {"lazy-simple", 2, 2}, {"simple", 1, 1},      {"simple", 1, 2},
  };
  for (const Cell& c : cells) {
    const std::string kind_name = c.kind;
    CAPTURE(kind_name);
    CAPTURE(c.d);
    CAPTURE(c.p);
    const WalkModel model = build_model(c.kind, c.d);
    for (std::int64_t n = 0; n <= 4; ++n) {
      const ExactMomentReport rep = enumerate_moments(model, n, c.p, 2);
      const QuadratureSpec quad =
          QuadratureSpec::exact_for_degree(2 * n * std::int64_t(c.p) + 2);
      const double m1 = mean_local_time(model, n, c.p, quad);
      const double m2 = second_moment_local_time(model, n, c.p, quad);
      CHECK_EQ(rep.origin_moments[0].to_double(),
               doctest::Approx(m1).epsilon(1e-12));
      CHECK_EQ(rep.origin_moments[1].to_double(),
               doctest::Approx(m2).epsilon(1e-12));
    }
  }
}

TEST_CASE("signed local time: odd moments vanish exactly") {
  const WalkModel lazy = lazy_simple_model(1);
  for (int p : {1, 2}) {
    const ExactMomentReport rep = enumerate_moments(lazy, 3, p, 4, true);
    CHECK_EQ(rep.mass.str(), "1/1");
    CHECK_EQ(rep.origin_moments[0].str(), "0/1");  // E xi = 0
    CHECK_EQ(rep.origin_moments[2].str(), "0/1");  // E xi^3 = 0
    // Even moments are positive rationals.
    CHECK(rep.origin_moments[1].to_double() > 0.0);
    CHECK(rep.origin_moments[3].to_double() > 0.0);
    // No square-sum moments are defined for the signed field.
    CHECK(rep.square_sum_moments.empty());
  }
}

TEST_CASE("moment growth inequalities hold exactly on small horizons") {
  const WalkModel lazy1 = lazy_simple_model(1);
  const WalkModel lazy2 = lazy_simple_model(2);

  for (const WalkModel* model : {&lazy1, &lazy2}) {
    for (int p : {1, 2}) {
      const auto checks = check_factorial_moment_bound(*model, 4, p, 3);
      CHECK(!checks.empty());
      for (const InequalityCheck& c : checks) {
        CAPTURE(c.name);
        CHECK(c.holds);
        CHECK(c.certified);
        CHECK(c.exact);  // both sides rational: no rounding anywhere
        CHECK(c.margin >= 0.0);
      }
    }
  }

  for (int p : {1, 2}) {
    const auto checks = check_block_split_bound(lazy1, 2, 1, p, 3);
    CHECK(!checks.empty());
    for (const InequalityCheck& c : checks) {
      CAPTURE(c.name);
      CHECK(c.holds);
      CHECK(c.certified);
    }
  }

  for (int p : {1, 2}) {
    const auto checks = check_symmetrized_moment_bound(lazy1, 2, 1, p, 2);
    CHECK(!checks.empty());
    for (const InequalityCheck& c : checks) {
      CAPTURE(c.name);
      CHECK(c.holds);
      CHECK(c.certified);
    }
  }
}

TEST_CASE("work limits reject configurations that cannot be enumerated exactly") {
  const WalkModel lazy = lazy_simple_model(1);
  EnumerationBudget tiny;
  tiny.max_path_leaves = 10;
  CHECK_THROWS_AS(enumerate_moments(lazy, 6, 1, 1, false, tiny),
                  std::invalid_argument);
  EnumerationBudget cross;
  cross.max_cross_terms = 10;
  CHECK_THROWS_AS(enumerate_moments(lazy, 4, 3, 2, false, cross),
                  std::invalid_argument);
  // Heavy-tailed laws have no finite step table.
  CHECK_THROWS_AS(group_walk_paths(stable_model(1.5), 2, false),
                  std::invalid_argument);
  // Sign weights demand n + 1 <= 62.
  CHECK_THROWS_AS(group_walk_paths(lazy, 62, true), std::invalid_argument);
}

TEST_CASE("small exact combinatorics") {
  CHECK_EQ(rational_factorial(0).str(), "1/1");
  CHECK_EQ(rational_factorial(4).str(), "24/1");
  CHECK_EQ(rational_binomial(5, 2).str(), "10/1");
  CHECK_EQ(rational_binomial(5, 7).str(), "0/1");
  CHECK_EQ(rational_pow(Rational(2, 3), 3).str(), "8/27");
  CHECK_EQ(rational_pow(Rational(7, 1), 0).str(), "1/1");
  CHECK_THROWS_AS(rational_pow(Rational(10, 1), 50), std::overflow_error);
  CHECK_THROWS_AS(rational_factorial(-1), std::invalid_argument);
}
