#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "addwalk/variational.hpp"
#include "addwalk/walk_model.hpp"

using namespace addwalk;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
// Reference value of the first overlap constant for the unit gaussian
// exponent: integral of (1 + lambda^2/2)^(-1) over the line = pi sqrt(2).
constexpr double kOverlap1Gaussian = 4.442882938158366;

std::vector<double> weight_values(const WalkModel& model,
                                  const FrequencyGrid& grid) {
  std::vector<double> w(std::size_t(grid.points));
  for (int i = 0; i < grid.points; ++i) {
    const double lam = grid.node(i);
    w[std::size_t(i)] = 1.0 / std::sqrt(1.0 + model.psi1(lam));
  }
  return w;
}
}  // namespace

TEST_CASE("grid geometry") {
  const FrequencyGrid grid{8.0, 16};
  CHECK_EQ(grid.h(), doctest::Approx(1.0).epsilon(1e-15));
  CHECK_EQ(grid.node(0), doctest::Approx(-7.5).epsilon(1e-15));
  CHECK_EQ(grid.node(15), doctest::Approx(7.5).epsilon(1e-15));
  // Midpoint symmetry: node(i) = -node(N-1-i).
  for (int i = 0; i < 16; ++i) {
    CHECK_EQ(grid.node(i), doctest::Approx(-grid.node(15 - i)).epsilon(1e-15));
  }
}

TEST_CASE("input validation") {
  const WalkModel g = gaussian_model(1.0);
  CHECK_THROWS_AS(maximize_overlap_functional(g, 1, FrequencyGrid{8.0, 18}),
                  std::invalid_argument);
  CHECK_THROWS_AS(maximize_overlap_functional(g, 0, FrequencyGrid{8.0, 16}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      maximize_overlap_functional(lazy_simple_model(2), 1, FrequencyGrid{8.0, 16}),
      std::invalid_argument);
  CHECK_THROWS_AS(maximize_overlap_functional(g, 1, FrequencyGrid{-1.0, 16}),
                  std::invalid_argument);
}

TEST_CASE("gradient matches central finite differences") {
  const WalkModel model = lazy_simple_model(1);
  const FrequencyGrid grid{6.0, 48};
  const std::vector<double> w = weight_values(model, grid);
  // A deliberately asymmetric, non-optimal trial vector.
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = grid.node(int(i));
    g[i] = std::exp(-0.3 * (x - 0.7) * (x - 0.7)) + 0.1;
  }
  for (int e : {1, 2, 4}) {
    CAPTURE(e);
    const std::vector<double> grad = overlap_gradient(g, w, grid.h(), e);
    REQUIRE_EQ(grad.size(), g.size());
    const double eps = 1e-6;
    for (std::size_t i : {std::size_t(0), std::size_t(11), std::size_t(24),
                          std::size_t(40)}) {
      std::vector<double> gp = g, gm = g;
      gp[i] += eps;
      gm[i] -= eps;
      const double fd = (overlap_objective(gp, w, grid.h(), e) -
                         overlap_objective(gm, w, grid.h(), e)) /
                        (2.0 * eps);
      CHECK_EQ(grad[i], doctest::Approx(fd).epsilon(5e-6));
    }
  }
}

TEST_CASE("first overlap constant of the unit gaussian exponent") {
  const WalkModel g = gaussian_model(1.0);
  const FrequencyGrid grid{40.0, 2560};
  const VariationalResult res = maximize_overlap_functional(g, 1, grid);

  // The cutoff-extrapolated value lands within 0.1% of pi sqrt(2).
  CHECK_EQ(res.extrapolated,
           doctest::Approx(kOverlap1Gaussian).epsilon(1e-3));
  // Finite cutoff only discards mass: raw values increase with the cutoff
  // and sit below the extrapolation.
  CHECK(res.cutoff_values[0] > res.cutoff_values[1]);
  CHECK(res.cutoff_values[1] > res.cutoff_values[2]);
  CHECK(res.value <= res.extrapolated + 1e-9);
  CHECK_EQ(res.value, res.cutoff_values[0]);
  CHECK(res.grad_norm < 1e-8);

  // Wrapper equivalence.
  CHECK_EQ(rho1(g, 1, grid), doctest::Approx(res.extrapolated).epsilon(1e-12));
}

TEST_CASE("covariance scaling of the first overlap constant") {
  // Psi_sigma(lambda) = sigma^2 lambda^2 / 2 gives value (pi sqrt 2)/sigma
  // by substitution; the solver must reproduce the exact scaling.
  const FrequencyGrid grid{40.0, 2560};
  const double base = rho1(gaussian_model(1.0), 1, grid);
  const double half = rho1(gaussian_model(0.5), 1, FrequencyGrid{40.0, 2560});
  const double twice = rho1(gaussian_model(2.0), 1, FrequencyGrid{40.0, 2560});
  CHECK_EQ(half, doctest::Approx(2.0 * kOverlap1Gaussian).epsilon(5e-3));
  CHECK_EQ(twice, doctest::Approx(0.5 * kOverlap1Gaussian).epsilon(5e-3));
  CHECK_EQ(base, doctest::Approx(kOverlap1Gaussian).epsilon(1e-3));
}

TEST_CASE("ascent trace is strictly increasing and ends at the optimum") {
  const WalkModel model = lazy_simple_model(1);
  const FrequencyGrid grid{8.0, 128};
  const VariationalResult res = maximize_overlap_functional(model, 2, grid);
  REQUIRE(!res.objective_trace.empty());
  for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
    CHECK(res.objective_trace[i] > res.objective_trace[i - 1]);
  }
  CHECK_EQ(res.objective_trace.back(), doctest::Approx(res.value).epsilon(1e-12));
  CHECK(res.value > 0.0);
  CHECK(res.iterations >= 0);

  // The optimizer inherits the even symmetry of the weight.
  const std::size_t n = res.optimizer.size();
  REQUIRE_EQ(n, std::size_t(grid.points));
  for (std::size_t i = 0; i < n / 2; ++i) {
    CHECK_EQ(res.optimizer[i],
             doctest::Approx(res.optimizer[n - 1 - i]).epsilon(1e-6));
  }
  // Unit mass on the sphere: h * sum g^2 = 1.
  double mass = 0.0;
  for (double v : res.optimizer) mass += v * v;
  CHECK_EQ(grid.h() * mass, doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kernel eigenvalue route agrees with the ascent route (duality)") {
  const WalkModel g = gaussian_model(1.0);
  for (int e : {1, 2}) {
    CAPTURE(e);
    const DualityReport rep = duality_consistency(g, e, FrequencyGrid{24.0, 768});
    CHECK(rep.rho_trial > 0.0);
    CHECK(rep.root_value > 0.0);
    CHECK(rep.rel_gap < 1e-2);
  }
}

TEST_CASE("indicator trial function: frequency and position routes agree") {
  const WalkModel g = gaussian_model(1.0);
  const FixedPointReport rep =
      indicator_fixed_point_check(g, FrequencyGrid{40.0, 2560});
  CHECK(rep.rho_f > 0.0);
  // Ground-state value at theta = 1/rho(f) must be 1; the two discretizations
  // are entirely independent (frequency kernel vs position tridiagonal).
  CHECK_EQ(rep.m_value, doctest::Approx(1.0).epsilon(5e-3));
  CHECK(rep.deviation <= 5e-3);
}

TEST_CASE("rho-of-f rejects malformed difference tables") {
  const WalkModel g = gaussian_model(1.0);
  const FrequencyGrid grid{8.0, 16};
  std::vector<double> bad(std::size_t(2 * grid.points), 0.0);  // needs 2N-1
  CHECK_THROWS_AS(rho_of_f(g, bad, grid), std::invalid_argument);
}
