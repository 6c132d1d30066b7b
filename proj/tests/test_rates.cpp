#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "addwalk/rates.hpp"
#include "addwalk/walk_model.hpp"

using namespace addwalk;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kOverlap1Gaussian = 4.442882938158366;  // pi sqrt(2)
}  // namespace

TEST_CASE("closed-form anchors, covariance-reduced route") {
  // d = 1, p = 1, unit covariance, rho_bar = pi sqrt(2): the decay constant
  // at lambda = 1 is exactly -1/2 and the limsup constant exactly sqrt(2).
  GaussianRateParams g;
  g.d = 1;
  g.p = 1;
  g.det_gamma = 1.0;
  g.rho_bar = kOverlap1Gaussian;
  CHECK_EQ(rate_constant_gaussian(RateDisplay::kMdL0, g, 1.0),
           doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_EQ(rate_constant_gaussian(RateDisplay::kLilL0, g),
           doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  // The decay constant scales quadratically in lambda here (alpha/d = 2).
  for (double lam : {0.5, 1.3, 2.0}) {
    CHECK_EQ(rate_constant_gaussian(RateDisplay::kMdL0, g, lam),
             doctest::Approx(-0.5 * lam * lam).epsilon(1e-12));
  }
}

TEST_CASE("closed-form anchors, general route") {
  // The d = 1 lazy walk has variational constant exactly 2 pi for the
  // origin statistic; its decay constant is -lambda^2/4 and its limsup
  // constant exactly 2.
  RateParams r;
  r.alpha = 2.0;
  r.d = 1;
  r.p = 1;
  r.rho = 2.0 * kPi;
  for (double lam : {0.5, 1.0, 1.7}) {
    CHECK_EQ(rate_constant(RateDisplay::kMdL0, r, lam),
             doctest::Approx(-lam * lam / 4.0).epsilon(1e-12));
  }
  CHECK_EQ(rate_constant(RateDisplay::kLilL0, r),
           doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("the two algebraic routes agree wherever both apply") {
  // rho = rho_bar / sqrt(det Gamma) links the routes; every display must
  // then coincide to rounding. Routes are independently coded, so this is
  // a real cross-check, not an identity of one formula with itself.
  const double rho_bars[] = {kOverlap1Gaussian, 7.3, 11.25};
  const double dets[] = {1.0, 0.5, 0.0625};
  struct DP {
    int d;
    int p;
  };
  const DP dps[] = {{1, 1}, {1, 2}, {2, 2}, {3, 2}};
  const RateDisplay displays[] = {RateDisplay::kMdL0,   RateDisplay::kMdL2,
                                  RateDisplay::kMdPairs, RateDisplay::kLilL0,
                                  RateDisplay::kLilL2,  RateDisplay::kLilPairs};
  for (const DP& dp : dps) {
    for (double rb : rho_bars) {
      for (double det : dets) {
        GaussianRateParams g;
        g.d = dp.d;
        g.p = dp.p;
        g.det_gamma = det;
        g.rho_bar = rb;
        RateParams r;
        r.alpha = 2.0;
        r.d = dp.d;
        r.p = dp.p;
        r.rho = rb / std::sqrt(det);
        for (RateDisplay disp : displays) {
          if ((disp == RateDisplay::kMdL0 || disp == RateDisplay::kLilL0) &&
              !(dp.d < 2 * dp.p)) {
            continue;  // origin-statistic displays need d < alpha p
          }
          for (double lam : {0.7, 1.0, 1.9}) {
            CAPTURE(int(disp));
            CAPTURE(dp.d);
            CAPTURE(dp.p);
            CHECK_EQ(rate_constant(disp, r, lam),
                     doctest::Approx(rate_constant_gaussian(disp, g, lam))
                         .epsilon(1e-12));
          }
        }
      }
    }
  }
}

TEST_CASE("deviation-to-limsup duality holds across the parameter space") {
  // Property: limsup constant = (-decay(1))^(-d/alpha), display by display.
  struct Cell {
    double alpha;
    int d;
    int p;
    double rho;
  };
  const Cell cells[] = {
      {2.0, 1, 1, 6.0}, {2.0, 1, 2, 3.7}, {2.0, 2, 2, 9.1},  {2.0, 3, 2, 2.2},
      {1.5, 1, 1, 5.5}, {1.5, 1, 2, 1.9}, {0.9, 1, 1, 4.03}, {0.6, 1, 2, 7.7},
  };
  const std::pair<RateDisplay, RateDisplay> pairs[] = {
      {RateDisplay::kMdL0, RateDisplay::kLilL0},
      {RateDisplay::kMdL2, RateDisplay::kLilL2},
      {RateDisplay::kMdPairs, RateDisplay::kLilPairs},
  };
  for (const Cell& c : cells) {
    RateParams r;
    r.alpha = c.alpha;
    r.d = c.d;
    r.p = c.p;
    r.rho = c.rho;
    for (const auto& [md, lil] : pairs) {
      if ((md == RateDisplay::kMdL0) && !(double(c.d) < c.alpha * c.p)) {
        continue;
      }
      const double decay = rate_constant(md, r, 1.0);
      CHECK(decay < 0.0);
      const double limsup = rate_constant(lil, r);
      CHECK_EQ(limsup,
               doctest::Approx(std::pow(-decay, -double(c.d) / c.alpha))
                   .epsilon(1e-12));
    }
  }
}

TEST_CASE("parameter validation") {
  RateParams r;
  r.alpha = 2.0;
  r.d = 2;
  r.p = 1;
  r.rho = 5.0;
  // d >= alpha p: the origin statistic has no moderate-deviation regime.
  CHECK_THROWS_AS(rate_constant(RateDisplay::kMdL0, r, 1.0),
                  std::invalid_argument);
  // ... but the energy displays survive up to d < 2 alpha p.
  CHECK_NOTHROW(rate_constant(RateDisplay::kMdL2, r, 1.0));
  r.d = 1;
  CHECK_THROWS_AS(rate_constant(RateDisplay::kMdL0, r, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(rate_constant(RateDisplay::kMdL0, r, -2.0),
                  std::invalid_argument);
  r.rho = 0.0;
  CHECK_THROWS_AS(rate_constant(RateDisplay::kMdL0, r, 1.0),
                  std::invalid_argument);
  GaussianRateParams g;
  g.det_gamma = 0.0;
  g.rho_bar = 1.0;
  CHECK_THROWS_AS(rate_constant_gaussian(RateDisplay::kMdL0, g, 1.0),
                  std::invalid_argument);
}

TEST_CASE("bundled constants for a concrete model") {
  const RateConstants rc =
      rate_constants_for(gaussian_model(1.0), 1, FrequencyGrid{40.0, 2560});
  CHECK_EQ(rc.alpha, 2.0);
  CHECK_EQ(rc.d, 1);
  CHECK_EQ(rc.rho1, doctest::Approx(kOverlap1Gaussian).epsilon(1e-3));
  CHECK_EQ(rc.md_l0(1.0), doctest::Approx(-0.5).epsilon(3e-3));
  CHECK_EQ(rc.lil_l0(),
           doctest::Approx(std::pow(0.5, -0.5)).epsilon(3e-3));
  CHECK(rc.rho2 > 0.0);
  CHECK(rc.md_l2(1.0) < 0.0);
  CHECK(rc.lil_l2() > 0.0);
  CHECK(rc.md_pairs(1.0) < 0.0);
  // Bundle methods and the display evaluators are the same arithmetic.
  RateParams r;
  r.alpha = rc.alpha;
  r.d = rc.d;
  r.p = rc.p;
  r.rho = rc.rho1;
  CHECK_EQ(rc.md_l0(1.3),
           doctest::Approx(rate_constant(RateDisplay::kMdL0, r, 1.3))
               .epsilon(1e-14));
}

TEST_CASE("deviation window and score interval") {
  CHECK_EQ(default_bn(10000),
           doctest::Approx(std::pow(std::log(10000.0), 2)).epsilon(1e-14));
  CHECK(default_bn(1000000) > default_bn(10000));
  CHECK_THROWS_AS(default_bn(1), std::invalid_argument);

  const WilsonInterval mid = wilson_interval(5, 10);
  CHECK_EQ(mid.lo, doctest::Approx(0.2366).epsilon(2e-3));
  CHECK_EQ(mid.hi, doctest::Approx(0.7634).epsilon(2e-3));
  const WilsonInterval none = wilson_interval(0, 100);
  CHECK_EQ(none.lo, 0.0);
  CHECK(none.hi > 0.0);
  CHECK(none.hi < 0.05);
  const WilsonInterval all = wilson_interval(100, 100);
  CHECK_EQ(all.hi, 1.0);
  CHECK(all.lo > 0.95);
  CHECK_THROWS_AS(wilson_interval(3, 2), std::invalid_argument);
  CHECK_THROWS_AS(wilson_interval(-1, 2), std::invalid_argument);
}

TEST_CASE("exponent fit recovers a synthetic power law exactly") {
  TailCurve curve;
  curve.n = 10000;
  curve.b_n = 10.0;
  curve.replicas = 1000;
  const double c = 0.3;
  const double s = 2.0;
  for (double lam : {0.5, 0.8, 1.2, 1.7, 2.3}) {
    TailCell cell;
    cell.lambda = lam;
    cell.p_hat = std::exp(-curve.b_n * c * std::pow(lam, s));
    cell.hits = 1;  // nonzero: usable
    curve.cells.push_back(cell);
  }
  // Unusable cells must be ignored, not crash or skew the fit.
  TailCell censored;
  censored.lambda = 5.0;
  censored.p_hat = 0.0;
  censored.censored = true;
  curve.cells.push_back(censored);
  TailCell saturated;
  saturated.lambda = 0.01;
  saturated.p_hat = 1.0;
  saturated.hits = 1000;
  curve.cells.push_back(saturated);

  const ExponentFit fit = fit_tail_exponent(curve);
  CHECK_EQ(fit.used, 5);
  CHECK_EQ(fit.slope, doctest::Approx(s).epsilon(1e-10));
  CHECK_EQ(fit.intercept, doctest::Approx(std::log(curve.b_n * c)).epsilon(1e-9));
  CHECK(fit.stderr_slope < 1e-9);

  // Fewer than three usable cells: slope defined, spread is not.
  TailCurve tiny = curve;
  tiny.cells.resize(2);
  const ExponentFit f2 = fit_tail_exponent(tiny);
  CHECK_EQ(f2.used, 2);
  CHECK(std::isnan(f2.stderr_slope));
}

TEST_CASE("geometric checkpoint schedules") {
  CHECK_EQ(geometric_schedule(16, 100, 2.0),
           std::vector<std::int64_t>{16, 32, 64, 100});
  CHECK_EQ(geometric_schedule(16, 100, 1.5),
           std::vector<std::int64_t>{16, 24, 36, 54, 81, 100});
  CHECK_EQ(geometric_schedule(64, 64, 2.0), std::vector<std::int64_t>{64});
  CHECK_THROWS_AS(geometric_schedule(0, 100, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(geometric_schedule(200, 100, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(geometric_schedule(16, 100, 1.0), std::invalid_argument);
}

TEST_CASE("tail curves: nesting, censoring, and scheduling independence") {
  const WalkModel model = lazy_simple_model(1);
  const std::vector<double> lambdas = {0.2, 0.5, 1.0, 8.0};
  const TailCurve curve = tail_curve(model, 2, 64, 4.0, lambdas, 400, 31,
                                     TailStatistic::kL0, 2.0 * kPi, 1);
  REQUIRE_EQ(curve.cells.size(), lambdas.size());
  for (std::size_t i = 0; i < curve.cells.size(); ++i) {
    const TailCell& cell = curve.cells[i];
    CHECK_EQ(cell.lambda, lambdas[i]);
    CHECK(cell.threshold > 0.0);
    CHECK(cell.p_hat >= 0.0);
    CHECK(cell.p_hat <= 1.0);
    CHECK(cell.ci_lo <= cell.p_hat + 1e-15);
    CHECK(cell.ci_hi >= cell.p_hat - 1e-15);
    CHECK_EQ(cell.censored, cell.hits == 0);
    CHECK(cell.theory < 0.0);  // decay constants are negative
    if (i > 0) {
      // Exceedance events are nested in lambda, replica by replica.
      CHECK(cell.hits <= curve.cells[i - 1].hits);
    }
    if (cell.censored) {
      CHECK_EQ(cell.norm_logp,
               doctest::Approx(std::log(1.0 / double(curve.replicas + 1)) /
                               curve.b_n)
                   .epsilon(1e-12));
    }
  }
  // The lambda = 0.2 threshold is low: some hits must occur in 400 replicas.
  CHECK(curve.cells[0].hits > 0);

  // Worker count must not leak into the numbers.
  const TailCurve again = tail_curve(model, 2, 64, 4.0, lambdas, 400, 31,
                                     TailStatistic::kL0, 2.0 * kPi, 3);
  for (std::size_t i = 0; i < curve.cells.size(); ++i) {
    CHECK_EQ(curve.cells[i].hits, again.cells[i].hits);
    CHECK_EQ(curve.cells[i].p_hat, again.cells[i].p_hat);
  }

  // The pair statistic reuses the same replicas: same seed, nested too.
  const TailCurve pairs = tail_curve(model, 2, 64, 4.0, lambdas, 400, 31,
                                     TailStatistic::kPairs, 3.0, 1);
  CHECK_EQ(pairs.cells.size(), lambdas.size());
}

TEST_CASE("iterated-logarithm trace bookkeeping") {
  const WalkModel model = lazy_simple_model(1);
  const std::vector<std::int64_t> schedule = geometric_schedule(16, 256, 2.0);
  const LilTrace trace = lil_trace(model, 1, schedule, 12345, 2.0 * kPi, 9.0);
  REQUIRE_EQ(trace.points.size(), schedule.size());
  CHECK_EQ(trace.theory_l0, doctest::Approx(2.0).epsilon(1e-12));
  double runmax = 0.0;
  for (std::size_t i = 0; i < trace.points.size(); ++i) {
    const LilPoint& pt = trace.points[i];
    CHECK_EQ(pt.n, schedule[i]);
    CHECK(pt.stat_l0 > 0.0);
    CHECK(pt.stat_l2 > 0.0);
    CHECK(pt.stat_pairs >= 0.0);
    runmax = std::max(runmax, pt.stat_l0);
    CHECK_EQ(pt.runmax_l0, doctest::Approx(runmax).epsilon(1e-15));
    // The energy dominates twice the pair count in normalized form.
    CHECK(pt.stat_l2 >= 2.0 * pt.stat_pairs);
  }
  // Same seed, same schedule: fully reproducible.
  const LilTrace trace2 = lil_trace(model, 1, schedule, 12345, 2.0 * kPi, 9.0);
  for (std::size_t i = 0; i < trace.points.size(); ++i) {
    CHECK_EQ(trace.points[i].stat_l0, trace2.points[i].stat_l0);
    CHECK_EQ(trace.points[i].stat_l2, trace2.points[i].stat_l2);
  }
  // Multi-walk route smoke check (p = 2 exercises the measure-based path).
  const LilTrace trace_p2 =
      lil_trace(model, 2, geometric_schedule(16, 64, 2.0), 7, 2.0, 2.0);
  CHECK_EQ(trace_p2.points.size(), std::size_t(3));
  CHECK(trace_p2.points.back().stat_l0 > 0.0);
}

TEST_CASE("weak-convergence study bookkeeping") {
  const WalkModel model = lazy_simple_model(1);
  const std::vector<std::int64_t> schedule = {32, 64};
  const WeakStudy study = weak_convergence_study(model, 2, schedule, 300, 9, 1);
  REQUIRE_EQ(study.levels.size(), std::size_t(2));
  CHECK(std::isnan(study.levels[0].ks_l0));
  CHECK(std::isnan(study.levels[0].ks_l2));
  const WeakLevel& lv = study.levels[1];
  CHECK(lv.ks_l0 >= 0.0);
  CHECK(lv.ks_l0 <= 1.0);
  CHECK(lv.ks_l2 >= 0.0);
  CHECK(lv.ks_l2 <= 1.0);
  CHECK(lv.mean_l0 > 0.0);
  CHECK(lv.mean_l2 > 0.0);
  for (const WeakLevel& level : study.levels) {
    CHECK(level.q05 <= level.q25);
    CHECK(level.q25 <= level.q50);
    CHECK(level.q50 <= level.q75);
    CHECK(level.q75 <= level.q95);
  }
  // Scheduling independence again.
  const WeakStudy study2 = weak_convergence_study(model, 2, schedule, 300, 9, 4);
  CHECK_EQ(study2.levels[1].ks_l0, lv.ks_l0);
  CHECK_EQ(study2.levels[1].mean_l2, lv.mean_l2);
}
