#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "addwalk/rng.hpp"
#include "addwalk/walk_model.hpp"

using namespace addwalk;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("step characteristic functions match their closed forms (d = 1)") {
  const WalkModel lazy = lazy_simple_model(1);
  const WalkModel simple = simple_model(1);
  for (double lam : {0.0, 0.3, 1.0, 2.0, kPi, 4.5}) {
    CHECK_EQ(lazy.char_fn1(lam),
             doctest::Approx(0.5 + 0.5 * std::cos(lam)).epsilon(1e-14));
    CHECK_EQ(simple.char_fn1(lam),
             doctest::Approx(std::cos(lam)).epsilon(1e-14));
    // Symmetry and normalization.
    CHECK_EQ(lazy.char_fn1(-lam), lazy.char_fn1(lam));
  }
  CHECK_EQ(lazy.char_fn1(0.0), 1.0);
  CHECK(lazy.cf_nonneg);
  CHECK(!simple.cf_nonneg);
  // The lazy characteristic function really is nonnegative, including at pi.
  CHECK(lazy.char_fn1(kPi) >= 0.0);
  CHECK(simple.char_fn1(kPi) < 0.0);
}

TEST_CASE("limit exponents and covariance") {
  const WalkModel lazy1 = lazy_simple_model(1);
  const WalkModel simple1 = simple_model(1);
  const WalkModel lazy2 = lazy_simple_model(2);
  CHECK_EQ(lazy1.psi1(2.0), doctest::Approx(4.0 / 4.0).epsilon(1e-14));
  CHECK_EQ(simple1.psi1(2.0), doctest::Approx(4.0 / 2.0).epsilon(1e-14));
  CHECK_EQ(lazy1.det_gamma(), doctest::Approx(0.5).epsilon(1e-14));
  CHECK_EQ(simple1.det_gamma(), doctest::Approx(1.0).epsilon(1e-14));
  CHECK_EQ(lazy2.det_gamma(), doctest::Approx(0.0625).epsilon(1e-14));
  const double lam2[2] = {1.0, 2.0};
  CHECK_EQ(lazy2.psi(lam2), doctest::Approx((1.0 + 4.0) / 8.0).epsilon(1e-14));

  const WalkModel stab = stable_model(1.5);
  CHECK_EQ(stab.psi1(2.0), doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-14));
  CHECK_EQ(stab.psi1(-2.0), stab.psi1(2.0));
}

TEST_CASE("norming functions") {
  const WalkModel lazy = lazy_simple_model(1);
  CHECK_EQ(lazy.norming(9.0), doctest::Approx(3.0).epsilon(1e-14));
  const WalkModel stab = stable_model(1.5);
  // Frozen analytic value of the norming constant at alpha = 1.5.
  CHECK_EQ(stab.stable_scale,
           doctest::Approx(1.1577321195160828).epsilon(1e-12));
  CHECK_EQ(stab.norming(8.0),
           doctest::Approx(stab.stable_scale * std::pow(8.0, 2.0 / 3.0))
               .epsilon(1e-14));
  // Scaling ratio used by the trivial norming checks: a(theta t)/a(t) =
  // theta^(1/alpha).
  const WalkModel g = gaussian_model(1.0);
  CHECK_EQ(g.norming(4.0) / g.norming(1.0), doctest::Approx(2.0));
  const WalkModel s1 = stable_model(1.0);
  CHECK_EQ(s1.norming(8.0) / s1.norming(1.0), doctest::Approx(8.0));
}

TEST_CASE("zeta and the stable tail constant") {
  CHECK_EQ(zeta_series(2.0), doctest::Approx(kPi * kPi / 6.0).epsilon(1e-13));
  CHECK_EQ(zeta_series(4.0),
           doctest::Approx(std::pow(kPi, 4) / 90.0).epsilon(1e-13));
  CHECK_EQ(zeta_series(2.5),
           doctest::Approx(1.3414872572509171).epsilon(1e-13));
  CHECK_THROWS_AS(zeta_series(1.0), std::domain_error);

  // integral of (1-cos u)/u^(1+alpha): pi/2 at alpha = 1, and the
  // closed form pi / (2 Gamma(1+alpha) sin(pi alpha/2)) in general.
  CHECK_EQ(stable_cosine_integral(1.0), doctest::Approx(kPi / 2).epsilon(1e-10));
  const double alpha = 1.5;
  const double closed =
      kPi / (2.0 * std::tgamma(1.0 + alpha) * std::sin(kPi * alpha / 2.0));
  CHECK_EQ(stable_cosine_integral(alpha), doctest::Approx(closed).epsilon(1e-10));
}

TEST_CASE("heavy-tailed characteristic function and its scaling limit") {
  // Frozen reference of the series at (alpha, lambda) = (1.5, 1).
  CHECK_EQ(stable_char_fn(1.5, 1.0),
           doctest::Approx(0.29781190571944).epsilon(1e-10));
  const WalkModel stab = stable_model(1.5);
  CHECK_EQ(stab.char_fn1(1.0), doctest::Approx(0.29781190571944).epsilon(1e-10));

  // n (1 - phi(lambda / a(n))) -> Psi(lambda): the norming constant is
  // frozen from the analytic limit, so the numeric limit must approach it.
  const double lambda = 1.3;
  const double psi = stab.psi1(lambda);
  double prev_err = 1e300;
  for (double n : {1e4, 1e6}) {
    const double val = n * (1.0 - stab.char_fn1(lambda / stab.norming(n)));
    const double err = std::abs(val / psi - 1.0);
    CHECK(err < prev_err);  // closer with growing n
    prev_err = err;
  }
  CHECK(prev_err < 5e-3);
}

TEST_CASE("model parsing") {
  CHECK_EQ(build_model("lazy-simple", 2).name, "lazy-simple");
  CHECK_EQ(build_model("simple", 1).name, "simple");
  CHECK_EQ(build_model("stable:1.5", 1).name, "stable:1.5");
  CHECK_EQ(build_model("gaussian", 1).name, "gaussian:1");
  CHECK_EQ(build_model("gaussian:0.5", 1).gamma_diag[0],
           doctest::Approx(0.25).epsilon(1e-14));
  CHECK_THROWS_AS(build_model("walk", 1), std::invalid_argument);
  CHECK_THROWS_AS(build_model("stable:2.5", 1), std::invalid_argument);
  CHECK_THROWS_AS(build_model("stable:1.5", 2), std::invalid_argument);
  CHECK_THROWS_AS(build_model("gaussian", 2), std::invalid_argument);
  CHECK_THROWS_AS(build_model("gaussian:-1", 1), std::invalid_argument);
}

TEST_CASE("the analytic gaussian family cannot be sampled or evaluated pointwise") {
  const WalkModel g = gaussian_model(1.0);
  CHECK_EQ(g.psi1(2.0), doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)g.char_fn1(1.0), std::domain_error);
  RngStream rng = replica_stream(1, StreamTag::kSteps, 0, 0);
  std::int64_t step[kMaxDim];
  CHECK_THROWS_AS(g.sample_step(rng, step), std::domain_error);
}

TEST_CASE("sampled steps follow the exact table") {
  const WalkModel lazy = lazy_simple_model(2);
  RngStream rng = replica_stream(7, StreamTag::kSteps, 0, 0);
  const int reps = 200000;
  std::int64_t step[kMaxDim];
  int hold = 0;
  for (int i = 0; i < reps; ++i) {
    lazy.sample_step(rng, step);
    const std::int64_t norm1 = std::abs(step[0]) + std::abs(step[1]);
    CHECK(norm1 <= 1);  // lazy-simple moves at most one unit
    if (norm1 == 0) ++hold;
  }
  // Hold frequency 1/2 within 4 standard errors.
  const double p_hat = double(hold) / reps;
  const double se = std::sqrt(0.25 / reps);
  CHECK(std::abs(p_hat - 0.5) < 4.0 * se);
}

TEST_CASE("sampled paths start at the origin and move by table steps") {
  const WalkModel simple = simple_model(2);
  RngStream rng = replica_stream(3, StreamTag::kSteps, 0, 0);
  const std::int64_t n = 50;
  const std::vector<std::int64_t> pos = simple.sample_path(n, rng);
  REQUIRE_EQ(pos.size(), std::size_t((n + 1) * 2));
  CHECK_EQ(pos[0], 0);
  CHECK_EQ(pos[1], 0);
  for (std::int64_t k = 1; k <= n; ++k) {
    const std::int64_t dx = pos[std::size_t(2 * k)] - pos[std::size_t(2 * k - 2)];
    const std::int64_t dy = pos[std::size_t(2 * k + 1)] - pos[std::size_t(2 * k - 1)];
    CHECK_EQ(std::abs(dx) + std::abs(dy), 1);  // simple walk always moves
  }
}

TEST_CASE("subcriticality guard names the condition") {
  CHECK_NOTHROW(require_subcritical(lazy_simple_model(1), 1));
  CHECK_NOTHROW(require_subcritical(stable_model(1.5), 1));
  CHECK_THROWS_WITH_AS(require_subcritical(simple_model(2), 1),
                       doctest::Contains("d < alpha*p"),
                       std::invalid_argument);
  CHECK_THROWS_AS(require_subcritical(stable_model(0.8), 1),
                  std::invalid_argument);
  CHECK_NOTHROW(require_subcritical(simple_model(2), 2));
}
