// Closed-form decay and iterated-logarithm constants for the local-time
// statistics, plus the Monte Carlo experiments that probe them at desk scale.
//
// The three statistics share one family of limits:
//
//   moderate deviations:  (1/b_n) log P{ stat >= lambda * scale(n, b_n) }
//                         converges to a negative constant c(lambda), and
//   iterated logarithm:   the b_n = loglog n normalization has an a.s.
//                         limsup equal to (-c(1))^{-d/alpha}.
//
// Two algebraic routes are implemented for the square-integrable family
// (alpha = 2): the general form taking rho computed from the model's own
// exponent Psi, and the covariance-reduced form taking (det Gamma, rho_bar)
// with rho_bar normalized to Psi(lambda) = |lambda|^2/2. They are linked by
// rho = rho_bar / sqrt(det Gamma); the agreement of the two routes and the
// md->lil duality above are standing cross-checks, not collapsed into one
// code path.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "addwalk/exact.hpp"
#include "addwalk/variational.hpp"
#include "addwalk/walk_model.hpp"

namespace addwalk {

// Which closed-form display to evaluate.
//   kMdL0     : decay constant of P{ l(n,0)    >= lambda n^p    a(n/b_n)^{-d} }
//   kMdL2     : decay constant of P{ sum_x l^2 >= lambda n^{2p} a(n/b_n)^{-d} }
//   kMdPairs  : decay constant of P{ Lambda_n  >= lambda n^{2p} a(n/b_n)^{-d} }
//   kLilL0    : a.s. limsup of a(n/loglog n)^d n^{-p}  l(n,0)
//   kLilL2    : a.s. limsup of a(n/loglog n)^d n^{-2p} sum_x l^2
//   kLilPairs : a.s. limsup of a(n/loglog n)^d n^{-2p} Lambda_n
enum class RateDisplay { kMdL0, kMdL2, kMdPairs, kLilL0, kLilL2, kLilPairs };

// General route: rho is the variational constant of the matching statistic
// (the p-power functional for l(n,0), the 2p-power one for the energy and
// the pair count), computed with the model's own exponent Psi.
struct RateParams {
  double alpha = 2.0;
  int d = 1;
  int p = 1;
  double rho = 0.0;
};

// Covariance-reduced route (alpha = 2 only): rho_bar is the variational
// constant in the standard normalization Psi = |lambda|^2/2, det_gamma the
// determinant of the one-step covariance.
struct GaussianRateParams {
  int d = 1;
  int p = 1;
  double det_gamma = 1.0;
  double rho_bar = 0.0;
};

// Moderate-deviation displays return the (negative) limit value; iterated-
// logarithm displays return the (positive) limsup constant. lambda is only
// meaningful for the md displays and must be positive there.
double rate_constant(RateDisplay which, const RateParams& params,
                     double lambda = 1.0);
double rate_constant_gaussian(RateDisplay which,
                              const GaussianRateParams& params,
                              double lambda = 1.0);

// Bundle of all six evaluators for one (model, p); rho1/rho2 are the
// variational constants for the l(n,0) and energy families.
struct RateConstants {
  double alpha = 2.0;
  int d = 1;
  int p = 1;
  double rho1 = 0.0;
  double rho2 = 0.0;

  double md_l0(double lambda) const;
  double md_l2(double lambda) const;
  double md_pairs(double lambda) const;
  double lil_l0() const;
  double lil_l2() const;
  double lil_pairs() const;
};

// Solves rho1/rho2 on the given grid (d = 1 models only).
RateConstants rate_constants_for(const WalkModel& model, int p,
                                 const FrequencyGrid& grid = {40.0, 2560});

// Default moderate-deviation window b_n = (log n)^2: well inside the
// "b_n -> infinity, b_n = o(n)" regime and large enough that
// (1/b_n) log P-hat is readable at desk-scale n.
double default_bn(std::int64_t n);

// 95% Wilson score interval for k successes out of r trials.
struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};
WilsonInterval wilson_interval(std::int64_t k, std::int64_t r);

// ---------------------------------------------------------------------------
// Tail curves.

enum class TailStatistic { kL0, kL2, kPairs };

struct TailCell {
  double lambda = 0.0;
  double threshold = 0.0;  // event cutoff on the raw statistic
  std::int64_t hits = 0;
  double p_hat = 0.0;
  double ci_lo = 0.0;      // Wilson 95% bounds on the exceedance probability
  double ci_hi = 1.0;
  double norm_logp = 0.0;  // (1/b_n) log p_hat; for censored cells the lower
                           // bound (1/b_n) log(1/(replicas+1))
  double theory = 0.0;     // limit value of the matching md display (NaN when
                           // rho is unavailable)
  bool censored = false;   // no hits: norm_logp is a bound, not an estimate
};

struct TailCurve {
  std::string model;
  int d = 1;
  int p = 1;
  std::int64_t n = 0;
  double b_n = 0.0;
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
  TailStatistic statistic = TailStatistic::kL0;
  std::vector<TailCell> cells;  // same lambda order as the input grid
};

// Simulates `replicas` independent local-time fields of horizon n and
// tabulates exceedance frequencies over the lambda grid against the
// moderate-deviation threshold lambda * n^p a(n/b_n)^{-d} (2p in the
// exponent for the energy and pair statistics). Cells with zero hits are
// reported as censored lower bounds, never dropped. rho > 0 supplies the
// variational constant for the theory column; rho = 0 solves it on the
// default grid for d = 1 models and leaves the column NaN otherwise.
// jobs <= 0 uses the available parallelism; results do not depend on jobs.
TailCurve tail_curve(const WalkModel& model, int p, std::int64_t n, double b_n,
                     const std::vector<double>& lambda_grid,
                     std::int64_t replicas, std::uint64_t seed,
                     TailStatistic statistic = TailStatistic::kL0,
                     double rho = 0.0, int jobs = 0);

// Log-log least-squares fit of -log(p_hat) against lambda over the usable
// cells (0 < p_hat < 1). The fitted slope estimates the tail exponent
// alpha/d of the md displays; stderr_slope is the usual residual-based
// standard error (NaN with fewer than three usable cells).
struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  int used = 0;  // number of usable cells
};
ExponentFit fit_tail_exponent(const TailCurve& curve);

// ---------------------------------------------------------------------------
// Iterated-logarithm traces.

struct LilPoint {
  std::int64_t n = 0;
  double stat_l0 = 0.0;     // a(n/loglog n)^d n^{-p}  l(n,0)
  double stat_l2 = 0.0;     // a(n/loglog n)^d n^{-2p} sum_x l^2
  double stat_pairs = 0.0;  // a(n/loglog n)^d n^{-2p} Lambda_n
  double runmax_l0 = 0.0;   // running maximum of stat_l0
};

struct LilTrace {
  std::string model;
  int d = 1;
  int p = 1;
  std::uint64_t seed = 0;
  double theory_l0 = 0.0;  // limsup constants (NaN when rho is unavailable)
  double theory_l2 = 0.0;
  double theory_pairs = 0.0;
  std::vector<LilPoint> points;
};

// Geometric checkpoint schedule {first, ceil(first*ratio), ...} capped at
// last, with last always included; first >= 16 keeps loglog positive.
std::vector<std::int64_t> geometric_schedule(std::int64_t first,
                                             std::int64_t last,
                                             double ratio = 2.0);

// Extends one p-tuple of walks along the schedule, recording the normalized
// statistics at every checkpoint. p = 1 runs fully online (O(1) per step);
// p >= 2 maintains the occupation measures online and evaluates the scalars
// at checkpoints through the autocorrelation route. rho1/rho2 as in
// tail_curve (0 = solve when d == 1).
LilTrace lil_trace(const WalkModel& model, int p,
                   const std::vector<std::int64_t>& n_schedule,
                   std::uint64_t seed, double rho1 = 0.0, double rho2 = 0.0);

// ---------------------------------------------------------------------------
// Weak-convergence study.

struct WeakLevel {
  std::int64_t n = 0;
  double ks_l0 = 0.0;  // two-sample KS distance to the previous level
  double ks_l2 = 0.0;  // (NaN on the first level)
  double mean_l0 = 0.0;
  double mean_l2 = 0.0;
  double q05 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q95 = 0.0;  // of stat_l0
};

struct WeakStudy {
  std::string model;
  int d = 1;
  int p = 1;
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
  std::vector<WeakLevel> levels;
};

// For each n in the schedule draws `replicas` independent fields and records
// the empirical law of the normalized statistics a(n)^d n^{-p} l(n,0) and
// a(n)^d n^{-2p} sum_x l^2; consecutive levels are compared in Kolmogorov-
// Smirnov distance. A distributional limit shows up as a KS sequence that
// trends to zero.
WeakStudy weak_convergence_study(const WalkModel& model, int p,
                                 const std::vector<std::int64_t>& n_schedule,
                                 std::int64_t replicas, std::uint64_t seed,
                                 int jobs = 0);

}  // namespace addwalk
