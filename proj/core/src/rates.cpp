#include "addwalk/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "addwalk/occupation.hpp"
#include "addwalk/parallel.hpp"
#include "addwalk/rng.hpp"

namespace addwalk {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_md(RateDisplay which) {
  return which == RateDisplay::kMdL0 || which == RateDisplay::kMdL2 ||
         which == RateDisplay::kMdPairs;
}

bool is_l0_family(RateDisplay which) {
  return which == RateDisplay::kMdL0 || which == RateDisplay::kLilL0;
}

void check_common(int d, int p, double lambda, bool md) {
  if (d < 1 || p < 1) {
    throw std::invalid_argument("rate constants require d >= 1 and p >= 1");
  }
  if (md && !(lambda > 0.0)) {
    throw std::invalid_argument("moderate-deviation level requires lambda > 0");
  }
}

}  // namespace

double rate_constant(RateDisplay which, const RateParams& params,
                     double lambda) {
  check_common(params.d, params.p, lambda, is_md(which));
  if (!(params.alpha > 0.0 && params.alpha <= 2.0)) {
    throw std::invalid_argument("stable index must lie in (0, 2]");
  }
  if (!(params.rho > 0.0)) {
    throw std::invalid_argument("variational constant rho must be positive");
  }
  const double a = params.alpha;
  const double d = double(params.d);
  const double p = double(params.p);
  const double rho = params.rho;
  // The local-time statistic lives in the regime d < alpha p; the energy and
  // pair statistics extend to d < 2 alpha p.
  if (is_l0_family(which)) {
    if (!(d < a * p)) {
      throw std::invalid_argument(
          "parameters violate the subcriticality condition d < alpha*p");
    }
  } else if (!(d < 2.0 * a * p)) {
    throw std::invalid_argument(
        "parameters violate the subcriticality condition d < 2*alpha*p");
  }
  const double two_pi = 2.0 * kPi;
  switch (which) {
    case RateDisplay::kMdL0:
      return -(std::pow(two_pi, a) * (d / a) *
               std::pow(1.0 - d / (a * p), (a * p - d) / d) *
               std::pow(lambda / rho, a / d));
    case RateDisplay::kMdL2:
      return -(std::pow(two_pi, a) * (d / (2.0 * a)) *
               std::pow(1.0 - d / (2.0 * a * p), (2.0 * a * p - d) / d) *
               std::pow(lambda / rho, a / d));
    case RateDisplay::kMdPairs:
      return -(std::pow(2.0, -(a + d) / d) * std::pow(two_pi, a) * (d / a) *
               std::pow(1.0 - d / (2.0 * a * p), (2.0 * a * p - d) / d) *
               std::pow(lambda / rho, a / d));
    case RateDisplay::kLilL0:
      return std::pow(two_pi, -d) * std::pow(a / d, d / a) *
             std::pow(1.0 - d / (a * p), -(p - d / a)) * rho;
    case RateDisplay::kLilL2:
      return std::pow(two_pi, -d) * std::pow(2.0 * a / d, d / a) *
             std::pow(1.0 - d / (2.0 * a * p), -(2.0 * a * p - d) / a) * rho;
    case RateDisplay::kLilPairs:
      return 2.0 * std::pow(2.0 * a / d, d / a) * std::pow(two_pi, -d) *
             std::pow(1.0 - d / (2.0 * a * p), -(2.0 * a * p - d) / a) * rho;
  }
  throw std::logic_error("unknown rate display");
}

double rate_constant_gaussian(RateDisplay which,
                              const GaussianRateParams& params,
                              double lambda) {
  check_common(params.d, params.p, lambda, is_md(which));
  if (!(params.det_gamma > 0.0)) {
    throw std::invalid_argument("covariance determinant must be positive");
  }
  if (!(params.rho_bar > 0.0)) {
    throw std::invalid_argument("variational constant rho_bar must be positive");
  }
  const double d = double(params.d);
  const double p = double(params.p);
  const double det = params.det_gamma;
  const double rho_bar = params.rho_bar;
  if (is_l0_family(which)) {
    if (!(d < 2.0 * p)) {
      throw std::invalid_argument(
          "parameters violate the subcriticality condition d < alpha*p");
    }
  } else if (!(d < 4.0 * p)) {
    throw std::invalid_argument(
        "parameters violate the subcriticality condition d < 2*alpha*p");
  }
  switch (which) {
    case RateDisplay::kMdL0:
      return -(2.0 * d * kPi * kPi *
               std::pow(1.0 - d / (2.0 * p), (2.0 * p - d) / d) *
               std::pow(det, 1.0 / d) * std::pow(lambda / rho_bar, 2.0 / d));
    case RateDisplay::kMdL2:
      return -(d * kPi * kPi *
               std::pow(1.0 - d / (4.0 * p), (4.0 * p - d) / d) *
               std::pow(det, 1.0 / d) * std::pow(lambda / rho_bar, 2.0 / d));
    case RateDisplay::kLilL0:
      return std::pow(std::sqrt(2.0 * d) * kPi, -d) *
             std::pow(1.0 - d / (2.0 * p), -(2.0 * p - d) / 2.0) * rho_bar /
             std::sqrt(det);
    case RateDisplay::kLilL2:
      return std::pow(std::sqrt(d) * kPi, -d) *
             std::pow(1.0 - d / (4.0 * p), -(4.0 * p - d) / 2.0) * rho_bar /
             std::sqrt(det);
    case RateDisplay::kMdPairs:
    case RateDisplay::kLilPairs: {
      // The pair-count displays have no separate covariance-reduced form;
      // they are reached through rho = rho_bar / sqrt(det Gamma).
      RateParams rp;
      rp.alpha = 2.0;
      rp.d = params.d;
      rp.p = params.p;
      rp.rho = rho_bar / std::sqrt(det);
      return rate_constant(which, rp, lambda);
    }
  }
  throw std::logic_error("unknown rate display");
}

double RateConstants::md_l0(double lambda) const {
  return rate_constant(RateDisplay::kMdL0, {alpha, d, p, rho1}, lambda);
}
double RateConstants::md_l2(double lambda) const {
  return rate_constant(RateDisplay::kMdL2, {alpha, d, p, rho2}, lambda);
}
double RateConstants::md_pairs(double lambda) const {
  return rate_constant(RateDisplay::kMdPairs, {alpha, d, p, rho2}, lambda);
}
double RateConstants::lil_l0() const {
  return rate_constant(RateDisplay::kLilL0, {alpha, d, p, rho1});
}
double RateConstants::lil_l2() const {
  return rate_constant(RateDisplay::kLilL2, {alpha, d, p, rho2});
}
double RateConstants::lil_pairs() const {
  return rate_constant(RateDisplay::kLilPairs, {alpha, d, p, rho2});
}

RateConstants rate_constants_for(const WalkModel& model, int p,
                                 const FrequencyGrid& grid) {
  require_subcritical(model, p);
  RateConstants rc;
  rc.alpha = model.alpha;
  rc.d = model.d;
  rc.p = p;
  rc.rho1 = rho1(model, p, grid);
  rc.rho2 = rho2(model, p, grid);
  return rc;
}

double default_bn(std::int64_t n) {
  if (n < 2) {
    throw std::invalid_argument("the deviation window needs n >= 2");
  }
  const double ln = std::log(double(n));
  return ln * ln;
}

WilsonInterval wilson_interval(std::int64_t k, std::int64_t r) {
  if (r <= 0 || k < 0 || k > r) {
    throw std::invalid_argument("need 0 <= k <= r with r >= 1 trials");
  }
  const double z = 1.959963984540054;  // two-sided 95%
  const double z2 = z * z;
  const double rr = double(r);
  const double kk = double(k);
  const double denom = rr + z2;
  const double center = (kk + 0.5 * z2) / denom;
  const double half =
      (z / denom) * std::sqrt(kk * (rr - kk) / rr + 0.25 * z2);
  WilsonInterval w;
  w.lo = std::max(0.0, center - half);
  w.hi = std::min(1.0, center + half);
  return w;
}

namespace {

// One replica's scalar statistics, as doubles for threshold comparison.
struct ReplicaScalars {
  double l0 = 0.0;
  double l2 = 0.0;
  double pairs = 0.0;
};

ReplicaScalars simulate_scalars(const WalkModel& model, int p, std::int64_t n,
                                std::uint64_t seed, std::uint64_t replica) {
  if (p == 1) {
    RngStream rng = replica_stream(seed, StreamTag::kSteps, replica, 0);
    OnlineLocalTime online(model);
    for (std::int64_t k = 0; k < n; ++k) online.step(rng);
    ReplicaScalars out;
    out.l0 = double(online.l0());
    out.l2 = double(online.l2sum());
    out.pairs = double(lambda_from_l2(online.l2sum(), n, 1));
    return out;
  }
  std::vector<OccupationMeasure> measures;
  measures.reserve(std::size_t(p));
  for (int j = 0; j < p; ++j) {
    RngStream rng = replica_stream(seed, StreamTag::kSteps, replica,
                                   std::uint64_t(j));
    measures.push_back(occupation(model, n, rng));
  }
  const FieldScalars s = field_scalars(measures);
  ReplicaScalars out;
  out.l0 = double(s.l0);
  out.l2 = double(s.l2sum);
  out.pairs = double(s.lambda);
  return out;
}

double statistic_of(const ReplicaScalars& s, TailStatistic which) {
  switch (which) {
    case TailStatistic::kL0:
      return s.l0;
    case TailStatistic::kL2:
      return s.l2;
    case TailStatistic::kPairs:
      return s.pairs;
  }
  throw std::logic_error("unknown tail statistic");
}

RateDisplay md_display_of(TailStatistic which) {
  switch (which) {
    case TailStatistic::kL0:
      return RateDisplay::kMdL0;
    case TailStatistic::kL2:
      return RateDisplay::kMdL2;
    case TailStatistic::kPairs:
      return RateDisplay::kMdPairs;
  }
  throw std::logic_error("unknown tail statistic");
}

void check_simulation_args(const WalkModel& model, int p, std::int64_t n,
                           std::int64_t replicas) {
  if (p < 1 || p > 16) throw std::invalid_argument("p must be in 1..16");
  if (n < 0) throw std::invalid_argument("horizon must be nonnegative");
  if (replicas < 1) throw std::invalid_argument("need at least one replica");
  if (!model.exact_steps && model.alpha == 2.0) {
    throw std::invalid_argument(
        "the analytic gaussian family carries no lattice step law");
  }
}

// Variational constant for the matching statistic family, or NaN when no
// solver route exists (d >= 2 grids are out of scope).
double solve_rho(const WalkModel& model, int p, TailStatistic which) {
  if (model.d != 1) return kNaN;
  const FrequencyGrid grid{40.0, 2560};
  return which == TailStatistic::kL0 ? rho1(model, p, grid)
                                     : rho2(model, p, grid);
}

}  // namespace

TailCurve tail_curve(const WalkModel& model, int p, std::int64_t n, double b_n,
                     const std::vector<double>& lambda_grid,
                     std::int64_t replicas, std::uint64_t seed,
                     TailStatistic statistic, double rho, int jobs) {
  check_simulation_args(model, p, n, replicas);
  if (n < 2) throw std::invalid_argument("tail curves need n >= 2");
  if (!(b_n > 0.0) || !(b_n < double(n))) {
    throw std::invalid_argument(
        "the deviation window requires 0 < b_n < n");
  }
  if (lambda_grid.empty()) {
    throw std::invalid_argument("the lambda grid must be nonempty");
  }
  for (double lam : lambda_grid) {
    if (!(lam > 0.0)) {
      throw std::invalid_argument("every lambda level must be positive");
    }
  }
  if (statistic == TailStatistic::kL0) {
    require_subcritical(model, p);
  } else if (!(double(model.d) < 2.0 * model.alpha * double(p))) {
    throw std::invalid_argument(
        "parameters violate the subcriticality condition d < 2*alpha*p");
  }

  const std::size_t count = std::size_t(replicas);
  std::vector<ReplicaScalars> raw(count, ReplicaScalars{});
  const unsigned workers = jobs > 0 ? unsigned(jobs) : default_jobs();
  parallel_for(count, workers, [&](std::size_t r) {
    raw[r] = simulate_scalars(model, p, n, seed, std::uint64_t(r));
  });

  std::vector<double> stats(raw.size());
  for (std::size_t r = 0; r < raw.size(); ++r) {
    stats[r] = statistic_of(raw[r], statistic);
  }
  std::sort(stats.begin(), stats.end());

  const double a_scaled = model.norming(double(n) / b_n);
  const int power = statistic == TailStatistic::kL0 ? p : 2 * p;
  const double scale =
      std::pow(double(n), double(power)) * std::pow(a_scaled, -double(model.d));

  double rho_eff = rho > 0.0 ? rho : solve_rho(model, p, statistic);
  RateParams rp;
  rp.alpha = model.alpha;
  rp.d = model.d;
  rp.p = p;
  rp.rho = rho_eff;

  TailCurve out;
  out.model = model.name;
  out.d = model.d;
  out.p = p;
  out.n = n;
  out.b_n = b_n;
  out.replicas = replicas;
  out.seed = seed;
  out.statistic = statistic;
  out.cells.reserve(lambda_grid.size());
  for (double lam : lambda_grid) {
    TailCell cell;
    cell.lambda = lam;
    cell.threshold = lam * scale;
    // count of sorted statistics >= threshold
    const auto it =
        std::lower_bound(stats.begin(), stats.end(), cell.threshold);
    cell.hits = std::int64_t(stats.end() - it);
    cell.p_hat = double(cell.hits) / double(replicas);
    const WilsonInterval ci = wilson_interval(cell.hits, replicas);
    cell.ci_lo = ci.lo;
    cell.ci_hi = ci.hi;
    cell.censored = cell.hits == 0;
    cell.norm_logp = cell.censored
                         ? std::log(1.0 / double(replicas + 1)) / b_n
                         : std::log(cell.p_hat) / b_n;
    cell.theory = std::isfinite(rho_eff) && rho_eff > 0.0
                      ? rate_constant(md_display_of(statistic), rp, lam)
                      : kNaN;
    out.cells.push_back(cell);
  }
  return out;
}

ExponentFit fit_tail_exponent(const TailCurve& curve) {
  std::vector<double> x;
  std::vector<double> y;
  for (const TailCell& cell : curve.cells) {
    if (cell.censored || !(cell.p_hat > 0.0) || !(cell.p_hat < 1.0)) continue;
    const double neg_logp = -std::log(cell.p_hat);
    if (!(neg_logp > 0.0)) continue;
    x.push_back(std::log(cell.lambda));
    y.push_back(std::log(neg_logp));
  }
  ExponentFit fit;
  fit.used = int(x.size());
  if (x.size() < 2) {
    fit.slope = kNaN;
    fit.intercept = kNaN;
    fit.stderr_slope = kNaN;
    return fit;
  }
  const double m = double(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= m;
  mean_y /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mean_x) * (x[i] - mean_x);
    sxy += (x[i] - mean_x) * (y[i] - mean_y);
  }
  if (!(sxx > 0.0)) {
    fit.slope = kNaN;
    fit.intercept = kNaN;
    fit.stderr_slope = kNaN;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  if (x.size() >= 3) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      ss_res += r * r;
    }
    fit.stderr_slope = std::sqrt(ss_res / (m - 2.0) / sxx);
  } else {
    fit.stderr_slope = kNaN;
  }
  return fit;
}

std::vector<std::int64_t> geometric_schedule(std::int64_t first,
                                             std::int64_t last, double ratio) {
  if (first < 1 || last < first) {
    throw std::invalid_argument("need 1 <= first <= last");
  }
  if (!(ratio > 1.0)) throw std::invalid_argument("ratio must exceed 1");
  std::vector<std::int64_t> schedule;
  std::int64_t v = first;
  while (v < last) {
    schedule.push_back(v);
    const double next = std::ceil(double(v) * ratio);
    v = next >= double(last) ? last : std::max(v + 1, std::int64_t(next));
  }
  schedule.push_back(last);
  return schedule;
}

namespace {

struct LilTheory {
  double l0 = kNaN;
  double l2 = kNaN;
  double pairs = kNaN;
};

LilTheory lil_theory(const WalkModel& model, int p, double rho1_in,
                     double rho2_in) {
  double r1 = rho1_in;
  double r2 = rho2_in;
  if ((!(r1 > 0.0) || !(r2 > 0.0)) && model.d == 1) {
    const FrequencyGrid grid{40.0, 2560};
    if (!(r1 > 0.0)) r1 = rho1(model, p, grid);
    if (!(r2 > 0.0)) r2 = rho2(model, p, grid);
  }
  LilTheory t;
  if (r1 > 0.0) {
    t.l0 = rate_constant(RateDisplay::kLilL0, {model.alpha, model.d, p, r1});
  }
  if (r2 > 0.0) {
    t.l2 = rate_constant(RateDisplay::kLilL2, {model.alpha, model.d, p, r2});
    t.pairs =
        rate_constant(RateDisplay::kLilPairs, {model.alpha, model.d, p, r2});
  }
  return t;
}

LilPoint lil_point(const WalkModel& model, int p, std::int64_t n,
                   const FieldScalars& s, double& runmax) {
  const double loglog = std::log(std::log(double(n)));
  const double norm =
      std::pow(model.norming(double(n) / loglog), double(model.d));
  const double np = std::pow(double(n), double(p));
  LilPoint point;
  point.n = n;
  point.stat_l0 = norm * double(s.l0) / np;
  point.stat_l2 = norm * double(s.l2sum) / (np * np);
  point.stat_pairs = norm * double(s.lambda) / (np * np);
  runmax = std::max(runmax, point.stat_l0);
  point.runmax_l0 = runmax;
  return point;
}

}  // namespace

LilTrace lil_trace(const WalkModel& model, int p,
                   const std::vector<std::int64_t>& n_schedule,
                   std::uint64_t seed, double rho1_in, double rho2_in) {
  check_simulation_args(model, p, n_schedule.empty() ? 0 : n_schedule.back(),
                        1);
  if (n_schedule.empty()) {
    throw std::invalid_argument("the checkpoint schedule must be nonempty");
  }
  if (n_schedule.front() < 16) {
    throw std::invalid_argument(
        "checkpoints start at n >= 16 so loglog n stays positive");
  }
  for (std::size_t i = 1; i < n_schedule.size(); ++i) {
    if (n_schedule[i] <= n_schedule[i - 1]) {
      throw std::invalid_argument("checkpoints must be strictly increasing");
    }
  }
  require_subcritical(model, p);

  LilTrace out;
  out.model = model.name;
  out.d = model.d;
  out.p = p;
  out.seed = seed;
  const LilTheory theory = lil_theory(model, p, rho1_in, rho2_in);
  out.theory_l0 = theory.l0;
  out.theory_l2 = theory.l2;
  out.theory_pairs = theory.pairs;
  out.points.reserve(n_schedule.size());

  double runmax = 0.0;
  if (p == 1) {
    RngStream rng = replica_stream(seed, StreamTag::kSteps, 0, 0);
    OnlineLocalTime online(model);
    std::size_t next = 0;
    const std::int64_t last = n_schedule.back();
    for (std::int64_t k = 1; k <= last; ++k) {
      online.step(rng);
      if (k == n_schedule[next]) {
        FieldScalars s;
        s.l0 = online.l0();
        s.l2sum = online.l2sum();
        s.lambda = lambda_from_l2(online.l2sum(), k, 1);
        out.points.push_back(lil_point(model, 1, k, s, runmax));
        ++next;
      }
    }
    return out;
  }

  MultiWalkField field(model, p, seed, 0);
  for (std::int64_t n : n_schedule) {
    field.advance_to(n);
    out.points.push_back(lil_point(model, p, n, field.scalars(), runmax));
  }
  return out;
}

namespace {

// Two-sample Kolmogorov-Smirnov distance; both inputs sorted ascending.
double two_sample_ks(const std::vector<double>& a,
                     const std::vector<double>& b) {
  const double na = double(a.size());
  const double nb = double(b.size());
  std::size_t i = 0, j = 0;
  double dist = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    dist = std::max(dist, std::abs(double(i) / na - double(j) / nb));
  }
  return dist;
}

double sorted_quantile(const std::vector<double>& sorted, double q) {
  const std::size_t idx = std::size_t(
      std::llround(q * double(sorted.size() - 1)));
  return sorted[std::min(idx, sorted.size() - 1)];
}

}  // namespace

WeakStudy weak_convergence_study(const WalkModel& model, int p,
                                 const std::vector<std::int64_t>& n_schedule,
                                 std::int64_t replicas, std::uint64_t seed,
                                 int jobs) {
  check_simulation_args(model, p, n_schedule.empty() ? 0 : n_schedule.back(),
                        replicas);
  if (n_schedule.empty()) {
    throw std::invalid_argument("the level schedule must be nonempty");
  }
  for (std::size_t i = 1; i < n_schedule.size(); ++i) {
    if (n_schedule[i] <= n_schedule[i - 1]) {
      throw std::invalid_argument("levels must be strictly increasing");
    }
  }
  if (n_schedule.front() < 1) {
    throw std::invalid_argument("levels need n >= 1");
  }
  require_subcritical(model, p);

  WeakStudy out;
  out.model = model.name;
  out.d = model.d;
  out.p = p;
  out.replicas = replicas;
  out.seed = seed;

  const unsigned workers = jobs > 0 ? unsigned(jobs) : default_jobs();
  std::vector<double> prev_l0;
  std::vector<double> prev_l2;
  const std::size_t count = std::size_t(replicas);
  for (std::size_t level = 0; level < n_schedule.size(); ++level) {
    const std::int64_t n = n_schedule[level];
    std::vector<ReplicaScalars> raw(count, ReplicaScalars{});
    parallel_for(count, workers, [&](std::size_t r) {
      // Distinct replica ids across levels keep all draws independent.
      const std::uint64_t id =
          std::uint64_t(level) * std::uint64_t(replicas) + std::uint64_t(r);
      raw[r] = simulate_scalars(model, p, n, seed, id);
    });
    const double a_n = model.norming(double(n));
    const double np = std::pow(double(n), double(p));
    const double f1 = std::pow(a_n, double(model.d)) / np;
    const double f2 = std::pow(a_n, double(model.d)) / (np * np);
    std::vector<double> s1(raw.size());
    std::vector<double> s2(raw.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
      s1[r] = f1 * raw[r].l0;
      s2[r] = f2 * raw[r].l2;
    }
    WeakLevel wl;
    wl.n = n;
    wl.mean_l0 = pairwise_sum(s1) / double(replicas);
    wl.mean_l2 = pairwise_sum(s2) / double(replicas);
    std::sort(s1.begin(), s1.end());
    std::sort(s2.begin(), s2.end());
    wl.ks_l0 = level == 0 ? kNaN : two_sample_ks(prev_l0, s1);
    wl.ks_l2 = level == 0 ? kNaN : two_sample_ks(prev_l2, s2);
    wl.q05 = sorted_quantile(s1, 0.05);
    wl.q25 = sorted_quantile(s1, 0.25);
    wl.q50 = sorted_quantile(s1, 0.50);
    wl.q75 = sorted_quantile(s1, 0.75);
    wl.q95 = sorted_quantile(s1, 0.95);
    out.levels.push_back(wl);
    prev_l0 = std::move(s1);
    prev_l2 = std::move(s2);
  }
  return out;
}

}  // namespace addwalk
