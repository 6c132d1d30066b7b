// addwalk: command-line laboratory for additive-random-walk local times.
//
// One binary, nine subcommands. Every run writes a '#'-prefixed header that
// echoes the fully resolved parameters and the master seed; everything below
// the header is a deterministic function of that manifest, at any --jobs
// value. Exit codes: 0 success, 2 validation error, 3 a checked identity or
// inequality failed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "addwalk/enumeration.hpp"
#include "addwalk/exact.hpp"
#include "addwalk/io.hpp"
#include "addwalk/occupation.hpp"
#include "addwalk/parallel.hpp"
#include "addwalk/poisson.hpp"
#include "addwalk/rates.hpp"
#include "addwalk/rng.hpp"
#include "addwalk/spectral.hpp"
#include "addwalk/variational.hpp"
#include "addwalk/walk_model.hpp"

namespace {

using namespace addwalk;
using nlohmann::json;

// Master-seed default when neither --seed, nor a config file, nor the
// ADDWALK_SEED environment variable provides one.
constexpr std::uint64_t kDefaultSeed = 1729;

struct CommonOpts {
  std::uint64_t seed = kDefaultSeed;
  int jobs = 0;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--seed", c.seed,
                  "Master seed; every random stream derives from it "
                  "(env: ADDWALK_SEED)")
      ->envname("ADDWALK_SEED")
      ->capture_default_str();
  sub->add_option("--jobs", c.jobs,
                  "Worker threads, 0 = all available; never changes output")
      ->check(CLI::Range(0, 1024))
      ->capture_default_str();
  sub->add_option("--out", c.out, "Output file (default: stdout)");
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
}

ExperimentManifest base_manifest(const std::string& name,
                                 const CommonOpts& c) {
  ExperimentManifest m = make_manifest(name, c.seed);
  m.add("format", c.format);
  return m;
}

void emit_table(const ExperimentManifest& m, const OutputTable& t,
                const CommonOpts& c) {
  write_output(c.out, c.format == "json" ? render_json(m, t) : render_csv(m, t));
}

void emit_json_report(const ExperimentManifest& m, const json& body,
                      const CommonOpts& c) {
  write_output(c.out, render_with_header(m, body.dump(2) + "\n"));
}

std::string fmt_i128(int128 v) { return to_string_i128(v); }

WalkModel make_sampling_model(const std::string& kind, int d) {
  WalkModel model = build_model(kind, d);
  if (!model.exact_steps && model.alpha == 2.0) {
    throw std::invalid_argument(
        "model '" + kind +
        "' is analytic only (no lattice step law); it cannot be simulated");
  }
  return model;
}

struct SummaryStats {
  double mean = 0.0, se = 0.0, sd = 0.0;
  double min = 0.0, q05 = 0.0, q50 = 0.0, q95 = 0.0, max = 0.0;
};

SummaryStats summarize(std::vector<double> v) {
  SummaryStats s;
  const std::size_t n = v.size();
  s.mean = pairwise_sum(v.data(), n) / double(n);
  double ss = 0.0;
  for (const double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = n > 1 ? std::sqrt(ss / double(n - 1)) : 0.0;
  s.se = s.sd / std::sqrt(double(n));
  std::sort(v.begin(), v.end());
  auto q = [&](double f) {
    return v[std::size_t(std::llround(f * double(n - 1)))];
  };
  s.min = v.front();
  s.q05 = q(0.05);
  s.q50 = q(0.50);
  s.q95 = q(0.95);
  s.max = v.back();
  return s;
}

// ---------------------------------------------------------------------------
// localtime: one exact-scalar row per simulated field.

struct LocaltimeOpts {
  CommonOpts c;
  std::string model = "lazy-simple";
  int d = 1;
  int p = 1;
  std::int64_t n = 100;
  std::int64_t replicas = 100;
};

int run_localtime(const LocaltimeOpts& o) {
  const WalkModel model = make_sampling_model(o.model, o.d);
  const std::size_t count = std::size_t(o.replicas);
  std::vector<FieldScalars> res(count);
  parallel_for(o.replicas, o.c.jobs, [&](std::int64_t r) {
    MultiWalkField field(model, o.p, o.c.seed, std::uint64_t(r));
    field.advance_to(o.n);
    res[std::size_t(r)] = field.scalars();
  });

  ExperimentManifest m = base_manifest("localtime", o.c);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("n", o.n);
  m.add("replicas", o.replicas);

  OutputTable t;
  t.columns = {"replica", "n", "p", "l0", "l2sum", "lambda"};
  for (std::int64_t r = 0; r < o.replicas; ++r) {
    const FieldScalars& s = res[std::size_t(r)];
    t.row({std::to_string(r), std::to_string(o.n), std::to_string(o.p),
           fmt_i128(s.l0), fmt_i128(s.l2sum), fmt_i128(s.lambda)});
  }
  emit_table(m, t, o.c);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate: replicate fields and summarize the scalar statistics.

struct SimulateOpts {
  CommonOpts c;
  std::string model = "lazy-simple";
  int d = 1;
  int p = 1;
  std::int64_t n = 1024;
  std::int64_t replicas = 1000;
};

int run_simulate(const SimulateOpts& o) {
  const WalkModel model = make_sampling_model(o.model, o.d);
  const std::size_t count = std::size_t(o.replicas);
  std::vector<FieldScalars> res(count);
  parallel_for(o.replicas, o.c.jobs, [&](std::int64_t r) {
    MultiWalkField field(model, o.p, o.c.seed, std::uint64_t(r));
    field.advance_to(o.n);
    res[std::size_t(r)] = field.scalars();
  });

  const double f1 = weak_limit_scaling(model, o.p, o.n);  // a(n)^d / n^p
  const double f2 = f1 / std::pow(double(o.n), double(o.p));

  std::vector<double> l0(count), l2(count), pairs(count), s1(count), s2(count);
  for (std::size_t i = 0; i < count; ++i) {
    l0[i] = double(res[i].l0);
    l2[i] = double(res[i].l2sum);
    pairs[i] = double(res[i].lambda);
    s1[i] = f1 * l0[i];
    s2[i] = f2 * l2[i];
  }

  ExperimentManifest m = base_manifest("simulate", o.c);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("n", o.n);
  m.add("replicas", o.replicas);
  m.add("scale_l0", f1);
  m.add("scale_l2", f2);

  OutputTable t;
  t.columns = {"quantity", "replicas", "mean", "se",  "sd",
               "min",      "q05",      "q50",  "q95", "max"};
  auto add = [&](const char* name, std::vector<double> v) {
    const SummaryStats s = summarize(std::move(v));
    t.row({name, std::to_string(o.replicas), format_double(s.mean),
           format_double(s.se), format_double(s.sd), format_double(s.min),
           format_double(s.q05), format_double(s.q50), format_double(s.q95),
           format_double(s.max)});
  };
  add("l0", std::move(l0));
  add("l2sum", std::move(l2));
  add("pairs", std::move(pairs));
  add("scaled_l0", std::move(s1));
  add("scaled_l2", std::move(s2));
  emit_table(m, t, o.c);
  return 0;
}

// ---------------------------------------------------------------------------
// fourier: quadrature values of the first two local-time moments.

struct FourierOpts {
  CommonOpts c;
  std::string model = "lazy-simple";
  int d = 1;
  int p = 1;
  std::int64_t n = 20;
  int moment = 1;
  int points = 0;  // 0 = smallest exact node count
};

int run_fourier(const FourierOpts& o) {
  const WalkModel model = build_model(o.model, o.d);
  QuadratureSpec quad = o.points > 0
                            ? QuadratureSpec{o.points}
                            : QuadratureSpec::exact_for_degree(o.n * o.p);
  QuadratureSpec fine{2 * quad.points};
  double value = 0.0, refined = 0.0;
  if (o.moment == 1) {
    value = mean_local_time(model, o.n, o.p, quad);
    refined = mean_local_time(model, o.n, o.p, fine);
  } else {
    value = second_moment_local_time(model, o.n, o.p, quad);
    refined = second_moment_local_time(model, o.n, o.p, fine);
  }

  ExperimentManifest m = base_manifest("fourier", o.c);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("n", o.n);
  m.add("moment", o.moment);

  OutputTable t;
  t.columns = {"moment", "points",        "value",
               "points_refined", "value_refined", "delta"};
  t.row({std::to_string(o.moment), std::to_string(quad.points),
         format_double(value), std::to_string(fine.points),
         format_double(refined), format_double(refined - value)});
  emit_table(m, t, o.c);
  return 0;
}

// ---------------------------------------------------------------------------
// oracle: exact rational moments and the inequality suite (JSON report).

struct OracleOpts {
  CommonOpts c;
  std::string model = "lazy-simple";
  int d = 1;
  int p = 1;
  std::int64_t n = 2;
  int mmax = 3;
  std::int64_t n1 = -1;  // split point; -1 = (n-1)/2
  std::string check = "all";
};

json check_to_json(const InequalityCheck& c) {
  json j;
  j["name"] = c.name;
  j["lhs"] = c.lhs;
  j["rhs"] = c.rhs;
  if (!c.lhs_exact.empty()) j["lhs_exact"] = c.lhs_exact;
  if (!c.rhs_exact.empty()) j["rhs_exact"] = c.rhs_exact;
  j["exact"] = c.exact;
  j["certified"] = c.certified;
  j["margin"] = c.margin;
  j["verdict"] = c.holds ? "holds" : "violated";
  return j;
}

int run_oracle(const OracleOpts& o) {
  const WalkModel model = build_model(o.model, o.d);
  if (!model.exact_steps) {
    throw std::invalid_argument(
        "exact enumeration needs a finite dyadic step law "
        "(lazy-simple or simple)");
  }
  const bool all = o.check == "all";
  const bool want_split = all || o.check == "split" || o.check == "symmetrized";
  std::int64_t n1 = o.n1, n2 = 0;
  if (want_split) {
    if (o.n <= 0) {
      throw std::invalid_argument(
          "split checks need n >= 1 (the horizon splits as n = n1 + n2 + 1)");
    }
    if (n1 < 0) n1 = (o.n - 1) / 2;
    n2 = o.n - 1 - n1;
    if (n2 < 0) throw std::invalid_argument("need n1 <= n - 1");
  }

  json rep;
  rep["params"] = {{"model", model.name}, {"d", o.d},       {"p", o.p},
                   {"n", o.n},            {"mmax", o.mmax}, {"check", o.check}};
  if (want_split) {
    rep["params"]["n1"] = n1;
    rep["params"]["n2"] = n2;
  }

  std::vector<InequalityCheck> checks;
  json verdicts = json::object();
  bool violated = false;

  if (all || o.check == "moments") {
    const ExactMomentReport mr = enumerate_moments(model, o.n, o.p, o.mmax);
    json moments;
    moments["mass"] = mr.mass.str();
    moments["group_count"] = mr.group_count;
    moments["cross_terms"] = mr.cross_terms;
    json origin = json::array(), square = json::array();
    for (const Rational& r : mr.origin_moments) origin.push_back(r.str());
    for (const Rational& r : mr.square_sum_moments) square.push_back(r.str());
    moments["origin"] = origin;
    moments["square_sum"] = square;
    rep["moments"] = moments;
    const bool mass_ok = mr.mass == Rational(1, 1);
    verdicts["total_mass_is_one"] = mass_ok ? "holds" : "violated";
    violated = violated || !mass_ok;
  }
  if (all || o.check == "factorial") {
    auto v = check_factorial_moment_bound(model, o.n, o.p, o.mmax);
    checks.insert(checks.end(), v.begin(), v.end());
  }
  if (all || o.check == "split") {
    auto v = check_block_split_bound(model, n1, n2, o.p, o.mmax);
    checks.insert(checks.end(), v.begin(), v.end());
  }
  if (all || o.check == "symmetrized") {
    auto v = check_symmetrized_moment_bound(model, n1, n2, o.p, o.mmax);
    checks.insert(checks.end(), v.begin(), v.end());
  }

  json jchecks = json::array();
  for (const InequalityCheck& c : checks) {
    jchecks.push_back(check_to_json(c));
    verdicts[c.name] = c.holds ? "holds" : "violated";
    violated = violated || !c.holds;
  }
  rep["checks"] = jchecks;
  rep["verdicts"] = verdicts;

  ExperimentManifest m = base_manifest("oracle", o.c);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("n", o.n);
  m.add("mmax", o.mmax);
  m.add("check", o.check);
  if (want_split) {
    m.add("n1", n1);
    m.add("n2", n2);
  }
  emit_json_report(m, rep, o.c);
  return violated ? 3 : 0;
}

// ---------------------------------------------------------------------------
// rho: variational constants on the frequency grid.

struct RhoOpts {
  CommonOpts c;
  std::string which = "rho1";
  std::string psi = "gaussian";
  int p = 1;
  int d = 1;
  int grid = 2560;
  double cutoff = 40.0;
  double tol = 1e-10;
};

int run_rho(const RhoOpts& o) {
  if (o.d != 1) {
    throw std::invalid_argument(
        "the variational grid solver covers d = 1 only; for d >= 2 pass the "
        "constant to the rate evaluators directly");
  }
  const WalkModel model = build_model(o.psi, 1);
  const FrequencyGrid grid{o.cutoff, o.grid};

  ExperimentManifest m = base_manifest("rho", o.c);
  m.add("which", o.which);
  m.add("psi", model.name);
  m.add("p", o.p);
  m.add("d", o.d);
  m.add("grid", o.grid);
  m.add("cutoff", o.cutoff);
  m.add("tol", o.tol);

  if (o.which == "rho1" || o.which == "rho2") {
    const int e = o.which == "rho1" ? o.p : 2 * o.p;
    AscentOptions opt;
    opt.tolerance = o.tol;
    const VariationalResult r = maximize_overlap_functional(model, e, grid, opt);
    const double delta_half = r.cutoff_values[0] - r.cutoff_values[1];
    const double delta_quarter = r.cutoff_values[1] - r.cutoff_values[2];

    if (o.c.format == "json") {
      json body;
      body["which"] = o.which;
      body["value"] = r.extrapolated;
      body["raw_value"] = r.value;
      body["cutoff_values"] = {r.cutoff_values[0], r.cutoff_values[1],
                               r.cutoff_values[2]};
      body["refinement_deltas"] = {delta_half, delta_quarter};
      body["iterations"] = r.iterations;
      body["grad_norm"] = r.grad_norm;
      body["trace"] = r.objective_trace;
      emit_json_report(m, body, o.c);
    } else {
      OutputTable t;
      t.columns = {"which",         "value",      "raw_value", "delta_half",
                   "delta_quarter", "iterations", "grad_norm"};
      t.row({o.which, format_double(r.extrapolated), format_double(r.value),
             format_double(delta_half), format_double(delta_quarter),
             std::to_string(r.iterations), format_double(r.grad_norm)});
      emit_table(m, t, o.c);
    }
    return 0;
  }

  if (o.which == "rho_f") {
    // Canonical indicator trial f = (1/2) 1_[-1,1], as exact cell averages so
    // the box edges carry no O(h) bias.
    const double v =
        rho_of_f(model, indicator_difference_table(grid, 1.0, 0.5), grid);
    const FrequencyGrid half{o.cutoff / 2.0, o.grid / 2};
    const double v_half =
        rho_of_f(model, indicator_difference_table(half, 1.0, 0.5), half);

    if (o.c.format == "json") {
      json body;
      body["which"] = o.which;
      body["value"] = v;
      body["value_half_cutoff"] = v_half;
      body["refinement_delta"] = v - v_half;
      emit_json_report(m, body, o.c);
    } else {
      OutputTable t;
      t.columns = {"which", "value", "value_half_cutoff", "delta"};
      t.row({o.which, format_double(v), format_double(v_half),
             format_double(v - v_half)});
      emit_table(m, t, o.c);
    }
    return 0;
  }

  // which == "a1": position-side fixed-point check of the indicator trial.
  // The kernel eigenvalue route gives rho(f); the ground-state value of the
  // dual operator at theta = 1/rho(f) must be 1.
  const FixedPointReport fr = indicator_fixed_point_check(model, grid);
  const double tol = 5e-3;
  const bool ok = fr.deviation <= tol;
  if (o.c.format == "json") {
    json body;
    body["which"] = o.which;
    body["rho_f"] = fr.rho_f;
    body["m_value"] = fr.m_value;
    body["deviation"] = fr.deviation;
    body["tolerance"] = tol;
    body["verdict"] = ok ? "holds" : "violated";
    emit_json_report(m, body, o.c);
  } else {
    OutputTable t;
    t.columns = {"which", "rho_f", "m_value", "deviation", "tolerance",
                 "verdict"};
    t.row({o.which, format_double(fr.rho_f), format_double(fr.m_value),
           format_double(fr.deviation), format_double(tol),
           ok ? "holds" : "violated"});
    emit_table(m, t, o.c);
  }
  return ok ? 0 : 3;
}

// ---------------------------------------------------------------------------
// tails: empirical exceedance curves against the decay-rate prediction.

struct TailsOpts {
  CommonOpts c;
  std::string model = "lazy-simple";
  int d = 1;
  int p = 1;
  std::int64_t n = 4096;
  std::int64_t replicas = 10000;
  std::string stat = "l0";
  double bn = 0.0;  // 0 = (log n)^2
  double rho = 0.0;
  std::vector<double> lambdas{1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
};

TailStatistic parse_stat(const std::string& s) {
  if (s == "l0") return TailStatistic::kL0;
  if (s == "l2") return TailStatistic::kL2;
  return TailStatistic::kPairs;
}

int run_tails(const TailsOpts& o) {
  const WalkModel model = make_sampling_model(o.model, o.d);
  const double b_n = o.bn > 0.0 ? o.bn : default_bn(o.n);
  const TailCurve curve =
      tail_curve(model, o.p, o.n, b_n, o.lambdas, o.replicas, o.c.seed,
                 parse_stat(o.stat), o.rho, o.c.jobs);

  std::int64_t censored = 0;
  for (const TailCell& cell : curve.cells) censored += cell.censored ? 1 : 0;

  ExperimentManifest m = base_manifest("tails", o.c);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("n", o.n);
  m.add("replicas", o.replicas);
  m.add("stat", o.stat);
  m.add("bn", b_n);
  m.add("rho", o.rho);
  m.add("censored_cells", censored);
  m.add("censored_rule",
        "rows with p_hat = 0 report norm_logp as the lower bound "
        "log(1/(replicas+1))/bn");

  OutputTable t;
  t.columns = {"lambda", "p_hat", "ci_lo", "ci_hi", "norm_logp", "theory"};
  for (const TailCell& cell : curve.cells) {
    t.row({format_double(cell.lambda), format_double(cell.p_hat),
           format_double(cell.ci_lo), format_double(cell.ci_hi),
           format_double(cell.norm_logp), format_double(cell.theory)});
  }
  emit_table(m, t, o.c);
  return 0;
}

// ---------------------------------------------------------------------------
// lil: one-path normalized trace along a geometric schedule.

struct LilOpts {
  CommonOpts c;
  std::string model = "lazy-simple";
  int d = 1;
  int p = 1;
  std::int64_t n_first = 4096;
  std::int64_t n_last = 1048576;
  double ratio = 2.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
};

int run_lil(const LilOpts& o) {
  const WalkModel model = make_sampling_model(o.model, o.d);
  const std::vector<std::int64_t> schedule =
      geometric_schedule(o.n_first, o.n_last, o.ratio);
  const LilTrace trace =
      lil_trace(model, o.p, schedule, o.c.seed, o.rho1, o.rho2);

  ExperimentManifest m = base_manifest("lil", o.c);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("n_first", o.n_first);
  m.add("n_last", o.n_last);
  m.add("ratio", o.ratio);
  m.add("theory_l0", trace.theory_l0);
  m.add("theory_l2", trace.theory_l2);
  m.add("theory_pairs", trace.theory_pairs);

  OutputTable t;
  t.columns = {"n",         "stat_l0",   "stat_l2",
               "stat_lambda", "runmax_l0", "theory_l0"};
  for (const LilPoint& pt : trace.points) {
    t.row({std::to_string(pt.n), format_double(pt.stat_l0),
           format_double(pt.stat_l2), format_double(pt.stat_pairs),
           format_double(pt.runmax_l0), format_double(trace.theory_l0)});
  }
  emit_table(m, t, o.c);
  return 0;
}

// ---------------------------------------------------------------------------
// poisson: weighted local time vs its degenerate-weight limit, per replica.

struct PoissonOpts {
  CommonOpts c;
  std::string model = "lazy-simple";
  int d = 1;
  int p = 1;
  std::int64_t n = 256;
  std::int64_t replicas = 1000;
};

int run_poisson(const PoissonOpts& o) {
  const WalkModel model = make_sampling_model(o.model, o.d);
  const std::size_t count = std::size_t(o.replicas);
  std::vector<PoissonizedField> res(count);
  parallel_for(o.replicas, o.c.jobs, [&](std::int64_t r) {
    res[std::size_t(r)] =
        poissonized_local_time(model, o.p, o.n, o.c.seed, std::uint64_t(r));
  });

  ExperimentManifest m = base_manifest("poisson", o.c);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("n", o.n);
  m.add("replicas", o.replicas);

  OutputTable t;
  t.columns = {"replica", "L0_weighted", "l0", "diff"};
  for (std::int64_t r = 0; r < o.replicas; ++r) {
    const PoissonizedField& f = res[std::size_t(r)];
    const double diff = f.l0_weighted - double(f.l0);
    t.row({std::to_string(r), format_double(f.l0_weighted), fmt_i128(f.l0),
           format_double(diff)});
  }
  emit_table(m, t, o.c);
  return 0;
}

// ---------------------------------------------------------------------------
// report: derived studies (rate constants, weak convergence, paired counts).

struct ReportOpts {
  CommonOpts c;
  std::string what;
  std::string model = "lazy-simple";
  int d = 1;
  int p = 1;
  double lambda = 1.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  std::int64_t n_first = 256;
  std::int64_t n_last = 8192;
  double ratio = 2.0;
  std::int64_t replicas = 2000;
};

int run_report_rates(const ReportOpts& o) {
  const WalkModel model = build_model(o.model, o.d);
  RateConstants rc;
  if (o.rho1 > 0.0 && o.rho2 > 0.0) {
    rc.alpha = model.alpha;
    rc.d = o.d;
    rc.p = o.p;
    rc.rho1 = o.rho1;
    rc.rho2 = o.rho2;
  } else {
    if (o.d != 1) {
      throw std::invalid_argument(
          "pass --rho1 and --rho2 for d >= 2 (the grid solver covers d = 1)");
    }
    rc = rate_constants_for(model, o.p);
    if (o.rho1 > 0.0) rc.rho1 = o.rho1;
    if (o.rho2 > 0.0) rc.rho2 = o.rho2;
  }
  const bool l0_valid = double(o.d) < model.alpha * o.p;
  const bool l2_valid = double(o.d) < 2.0 * model.alpha * o.p;
  if (!l2_valid) {
    throw std::invalid_argument(
        "no display is defined at this (d, p): the local-time regime needs "
        "d < alpha*p (origin family) or d < 2*alpha*p (energy family)");
  }

  ExperimentManifest m = base_manifest("report", o.c);
  m.add("what", o.what);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("lambda", o.lambda);
  m.add("rho1", rc.rho1);
  m.add("rho2", rc.rho2);

  OutputTable t;
  t.columns = {"display", "lambda", "value"};
  const double expo = -double(o.d) / rc.alpha;
  double worst_gap = 0.0;
  auto dual_gap = [&](double md1, double lil) {
    const double implied = std::pow(-md1, expo);
    const double gap = std::abs(implied - lil) / std::max(lil, 1e-300);
    worst_gap = std::max(worst_gap, gap);
    return gap;
  };
  if (l0_valid) {
    t.row({"md_l0", format_double(o.lambda),
           format_double(rc.md_l0(o.lambda))});
  }
  t.row({"md_l2", format_double(o.lambda), format_double(rc.md_l2(o.lambda))});
  t.row({"md_pairs", format_double(o.lambda),
         format_double(rc.md_pairs(o.lambda))});
  if (l0_valid) t.row({"lil_l0", "", format_double(rc.lil_l0())});
  t.row({"lil_l2", "", format_double(rc.lil_l2())});
  t.row({"lil_pairs", "", format_double(rc.lil_pairs())});
  if (l0_valid) {
    t.row({"duality_gap_l0", "",
           format_double(dual_gap(rc.md_l0(1.0), rc.lil_l0()))});
  }
  t.row({"duality_gap_l2", "",
         format_double(dual_gap(rc.md_l2(1.0), rc.lil_l2()))});
  t.row({"duality_gap_pairs", "",
         format_double(dual_gap(rc.md_pairs(1.0), rc.lil_pairs()))});
  emit_table(m, t, o.c);

  // The md->lil duality is an exact identity of the closed forms; treat a
  // mismatch beyond rounding noise as a violated invariant.
  return worst_gap <= 1e-9 ? 0 : 3;
}

int run_report_weak(const ReportOpts& o) {
  const WalkModel model = make_sampling_model(o.model, o.d);
  const std::vector<std::int64_t> schedule =
      geometric_schedule(o.n_first, o.n_last, o.ratio);
  const WeakStudy study = weak_convergence_study(model, o.p, schedule,
                                                 o.replicas, o.c.seed,
                                                 o.c.jobs);

  ExperimentManifest m = base_manifest("report", o.c);
  m.add("what", o.what);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("n_first", o.n_first);
  m.add("n_last", o.n_last);
  m.add("ratio", o.ratio);
  m.add("replicas", o.replicas);

  OutputTable t;
  t.columns = {"n",   "ks_l0", "ks_l2", "mean_l0", "mean_l2",
               "q05", "q25",   "q50",   "q75",     "q95"};
  for (const WeakLevel& lv : study.levels) {
    t.row({std::to_string(lv.n), format_double(lv.ks_l0),
           format_double(lv.ks_l2), format_double(lv.mean_l0),
           format_double(lv.mean_l2), format_double(lv.q05),
           format_double(lv.q25), format_double(lv.q50),
           format_double(lv.q75), format_double(lv.q95)});
  }
  emit_table(m, t, o.c);
  return 0;
}

int run_report_paired(const ReportOpts& o) {
  const WalkModel model = make_sampling_model(o.model, o.d);
  const std::vector<std::int64_t> schedule =
      geometric_schedule(o.n_first, o.n_last, o.ratio);
  const PairedReport rep = paired_mean_check(model, o.p, schedule, o.replicas,
                                             o.c.seed, o.c.jobs);

  ExperimentManifest m = base_manifest("report", o.c);
  m.add("what", o.what);
  m.add("model", model.name);
  m.add("d", o.d);
  m.add("p", o.p);
  m.add("n_first", o.n_first);
  m.add("n_last", o.n_last);
  m.add("ratio", o.ratio);
  m.add("replicas", o.replicas);

  OutputTable t;
  t.columns = {"n",      "scale",         "mean_diff", "se_diff",
               "spread", "mean_weighted", "mean_plain"};
  for (const PairedLevel& lv : rep.levels) {
    t.row({std::to_string(lv.n), format_double(lv.scale),
           format_double(lv.mean_diff), format_double(lv.se_diff),
           format_double(lv.spread), format_double(lv.mean_weighted),
           format_double(lv.mean_plain)});
  }
  emit_table(m, t, o.c);
  return 0;
}

int run_report(const ReportOpts& o) {
  if (o.what == "rates") return run_report_rates(o);
  if (o.what == "weak-convergence") return run_report_weak(o);
  return run_report_paired(o);
}

// ---------------------------------------------------------------------------

void add_model_opts(CLI::App* sub, std::string& model, int& d) {
  sub->add_option("--model", model,
                  "Walk family: lazy-simple, simple, stable:<alpha>, "
                  "gaussian[:<sigma>] (gaussian is analytic only)")
      ->capture_default_str();
  sub->add_option("--d", d, "Lattice dimension")
      ->check(CLI::Range(1, 3))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Desk-scale laboratory for local times of additive random walks:\n"
      "exact moment oracles, Fourier quadrature, variational rate constants,\n"
      "and Monte Carlo tail/iterated-logarithm experiments.\n"
      "Output files start with a '#'-prefixed header echoing the resolved\n"
      "run; bytes below the header depend only on that manifest."};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "INI run file, one section per subcommand "
                 "([tails], [lil], ...), keys = long option names. "
                 "Command-line flags override file values; unknown keys are "
                 "errors.");
  app.allow_config_extras(CLI::config_extras_mode::error);

  int rc = 0;

  auto lt = std::make_shared<LocaltimeOpts>();
  {
    CLI::App* s = app.add_subcommand(
        "localtime",
        "Simulate additive-walk fields; one exact scalar row per replica");
    add_model_opts(s, lt->model, lt->d);
    s->add_option("--p", lt->p, "Number of independent walks")
        ->check(CLI::Range(1, 16))
        ->capture_default_str();
    s->add_option("--n", lt->n, "Time horizon (steps per walk)")
        ->check(CLI::Range(std::int64_t(0), std::int64_t(1) << 40))
        ->capture_default_str();
    s->add_option("--replicas", lt->replicas, "Independent fields to draw")
        ->check(CLI::Range(std::int64_t(1), std::int64_t(1) << 40))
        ->capture_default_str();
    add_common(s, lt->c);
    s->callback([lt, &rc] { rc = run_localtime(*lt); });
  }

  auto sim = std::make_shared<SimulateOpts>();
  {
    CLI::App* s = app.add_subcommand(
        "simulate",
        "Replicate fields and summarize the raw and weak-limit-scaled "
        "statistics");
    add_model_opts(s, sim->model, sim->d);
    s->add_option("--p", sim->p, "Number of independent walks")
        ->check(CLI::Range(1, 16))
        ->capture_default_str();
    s->add_option("--n", sim->n, "Time horizon (steps per walk)")
        ->check(CLI::Range(std::int64_t(1), std::int64_t(1) << 40))
        ->capture_default_str();
    s->add_option("--replicas", sim->replicas, "Independent fields to draw")
        ->check(CLI::Range(std::int64_t(2), std::int64_t(1) << 40))
        ->capture_default_str();
    add_common(s, sim->c);
    s->callback([sim, &rc] { rc = run_simulate(*sim); });
  }

  auto fo = std::make_shared<FourierOpts>();
  {
    CLI::App* s = app.add_subcommand(
        "fourier",
        "Quadrature value of E l(n,0) or E l(n,0)^2 with a refinement delta");
    add_model_opts(s, fo->model, fo->d);
    s->add_option("--p", fo->p, "Number of independent walks")
        ->check(CLI::Range(1, 16))
        ->capture_default_str();
    s->add_option("--n", fo->n, "Time horizon (steps per walk)")
        ->check(CLI::Range(std::int64_t(0), std::int64_t(100000)))
        ->capture_default_str();
    s->add_option("--moment", fo->moment, "Which moment of l(n,0)")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    s->add_option("--points", fo->points,
                  "Quadrature nodes per dimension "
                  "(0 = smallest exact node count)")
        ->check(CLI::Range(0, 1 << 20))
        ->capture_default_str();
    add_common(s, fo->c);
    s->callback([fo, &rc] { rc = run_fourier(*fo); });
  }

  auto orc = std::make_shared<OracleOpts>();
  {
    CLI::App* s = app.add_subcommand(
        "oracle",
        "Exact rational moment oracle and inequality suite "
        "(report is always JSON; exit 3 on any violation)");
    add_model_opts(s, orc->model, orc->d);
    s->add_option("--p", orc->p, "Number of independent walks")
        ->check(CLI::Range(1, 4))
        ->capture_default_str();
    s->add_option("--n", orc->n, "Time horizon (steps per walk)")
        ->check(CLI::Range(std::int64_t(0), std::int64_t(16)))
        ->capture_default_str();
    s->add_option("--mmax", orc->mmax, "Highest moment order to enumerate")
        ->check(CLI::Range(1, 8))
        ->capture_default_str();
    s->add_option("--n1", orc->n1,
                  "First-block horizon for split checks "
                  "(n = n1 + n2 + 1; -1 = balanced)")
        ->check(CLI::Range(std::int64_t(-1), std::int64_t(15)))
        ->capture_default_str();
    s->add_option("--check", orc->check,
                  "moments = exact moment table; factorial = factorial-moment "
                  "bound; split = block-split bound; symmetrized = "
                  "signed-walk odd/even moment checks")
        ->check(CLI::IsMember(
            {"moments", "factorial", "split", "symmetrized", "all"}))
        ->capture_default_str();
    add_common(s, orc->c);
    s->callback([orc, &rc] { rc = run_oracle(*orc); });
  }

  auto rho = std::make_shared<RhoOpts>();
  {
    CLI::App* s = app.add_subcommand(
        "rho",
        "Variational constants on the frequency grid: rho1/rho2 by projected "
        "ascent, rho_f for the indicator trial, a1 = position-side "
        "fixed-point check (exit 3 if it fails)");
    s->add_option("--which", rho->which, "Quantity to compute")
        ->check(CLI::IsMember({"rho1", "rho2", "rho_f", "a1"}))
        ->capture_default_str();
    s->add_option("--psi", rho->psi,
                  "Frequency exponent family: gaussian[:<sigma>] for "
                  "sigma^2 lambda^2/2, stable:<alpha> for |lambda|^alpha "
                  "(lattice model names are accepted and use their own "
                  "exponent)")
        ->capture_default_str();
    s->add_option("--p", rho->p, "Number of independent walks")
        ->check(CLI::Range(1, 16))
        ->capture_default_str();
    s->add_option("--d", rho->d, "Dimension (the grid solver covers d = 1)")
        ->check(CLI::Range(1, 3))
        ->capture_default_str();
    s->add_option("--grid", rho->grid,
                  "Frequency nodes (multiple of 8, >= 16)")
        ->check(CLI::Range(16, 1 << 20))
        ->capture_default_str();
    s->add_option("--cutoff", rho->cutoff, "Frequency cutoff Lambda_max")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s->add_option("--tol", rho->tol, "Ascent stop tolerance (relative gain)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_common(s, rho->c);
    s->callback([rho, &rc] { rc = run_rho(*rho); });
  }

  auto ta = std::make_shared<TailsOpts>();
  {
    CLI::App* s = app.add_subcommand(
        "tails",
        "Empirical exceedance probabilities of a scaled statistic over a "
        "lambda grid, with Wilson intervals and the predicted decay rate");
    add_model_opts(s, ta->model, ta->d);
    s->add_option("--p", ta->p, "Number of independent walks")
        ->check(CLI::Range(1, 16))
        ->capture_default_str();
    s->add_option("--n", ta->n, "Time horizon (steps per walk)")
        ->check(CLI::Range(std::int64_t(4), std::int64_t(1) << 40))
        ->capture_default_str();
    s->add_option("--replicas", ta->replicas, "Independent fields to draw")
        ->check(CLI::Range(std::int64_t(1), std::int64_t(1) << 40))
        ->capture_default_str();
    s->add_option("--stat", ta->stat,
                  "Statistic: l0 = local time at the origin, l2 = summed "
                  "squared local time, pairs = intersection pairs")
        ->check(CLI::IsMember({"l0", "l2", "pairs"}))
        ->capture_default_str();
    s->add_option("--bn", ta->bn,
                  "Deviation window b_n (0 = (log n)^2, natural log)")
        ->capture_default_str();
    s->add_option("--rho", ta->rho,
                  "Variational constant for the theory column "
                  "(0 = solve on the default grid when d = 1)")
        ->capture_default_str();
    s->add_option("--lambdas", ta->lambdas,
                  "Comma-separated lambda grid (all > 0)")
        ->delimiter(',')
        ->capture_default_str();
    add_common(s, ta->c);
    s->callback([ta, &rc] { rc = run_tails(*ta); });
  }

  auto li = std::make_shared<LilOpts>();
  {
    CLI::App* s = app.add_subcommand(
        "lil",
        "Single-path iterated-logarithm trace at geometric checkpoints");
    add_model_opts(s, li->model, li->d);
    s->add_option("--p", li->p, "Number of independent walks")
        ->check(CLI::Range(1, 16))
        ->capture_default_str();
    s->add_option("--n-first", li->n_first, "First checkpoint (>= 16)")
        ->check(CLI::Range(std::int64_t(16), std::int64_t(1) << 40))
        ->capture_default_str();
    s->add_option("--n-last", li->n_last, "Last checkpoint")
        ->check(CLI::Range(std::int64_t(16), std::int64_t(1) << 40))
        ->capture_default_str();
    s->add_option("--ratio", li->ratio, "Checkpoint growth ratio (> 1)")
        ->check(CLI::Range(1.0 + 1e-9, 1e6))
        ->capture_default_str();
    s->add_option("--rho1", li->rho1,
                  "Variational constant for theory_l0 (0 = solve when d = 1)")
        ->capture_default_str();
    s->add_option("--rho2", li->rho2,
                  "Variational constant for the energy family "
                  "(0 = solve when d = 1)")
        ->capture_default_str();
    add_common(s, li->c);
    s->callback([li, &rc] { rc = run_lil(*li); });
  }

  auto po = std::make_shared<PoissonOpts>();
  {
    CLI::App* s = app.add_subcommand(
        "poisson",
        "Exponentially weighted local time at the origin vs the plain count, "
        "one row per replica");
    add_model_opts(s, po->model, po->d);
    s->add_option("--p", po->p, "Number of independent walks")
        ->check(CLI::Range(1, 16))
        ->capture_default_str();
    s->add_option("--n", po->n, "Time horizon (steps per walk)")
        ->check(CLI::Range(std::int64_t(0), std::int64_t(1) << 40))
        ->capture_default_str();
    s->add_option("--replicas", po->replicas, "Independent fields to draw")
        ->check(CLI::Range(std::int64_t(1), std::int64_t(1) << 40))
        ->capture_default_str();
    add_common(s, po->c);
    s->callback([po, &rc] { rc = run_poisson(*po); });
  }

  auto re = std::make_shared<ReportOpts>();
  {
    CLI::App* s = app.add_subcommand(
        "report",
        "Derived studies: rates = closed-form decay/limsup constants with "
        "duality gaps (exit 3 on mismatch); weak-convergence = KS distances "
        "between consecutive levels; paired-poisson = weighted-vs-plain mean "
        "differences");
    s->add_option("--what", re->what, "Which study to run")
        ->required()
        ->check(CLI::IsMember({"rates", "weak-convergence", "paired-poisson"}));
    add_model_opts(s, re->model, re->d);
    s->add_option("--p", re->p, "Number of independent walks")
        ->check(CLI::Range(1, 16))
        ->capture_default_str();
    s->add_option("--lambda", re->lambda,
                  "Deviation level for the md displays (rates only)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    s->add_option("--rho1", re->rho1,
                  "Variational constant of the origin family "
                  "(0 = solve when d = 1; rates only)")
        ->capture_default_str();
    s->add_option("--rho2", re->rho2,
                  "Variational constant of the energy family "
                  "(0 = solve when d = 1; rates only)")
        ->capture_default_str();
    s->add_option("--n-first", re->n_first, "First level (>= 16)")
        ->check(CLI::Range(std::int64_t(16), std::int64_t(1) << 40))
        ->capture_default_str();
    s->add_option("--n-last", re->n_last, "Last level")
        ->check(CLI::Range(std::int64_t(16), std::int64_t(1) << 40))
        ->capture_default_str();
    s->add_option("--ratio", re->ratio, "Level growth ratio (> 1)")
        ->check(CLI::Range(1.0 + 1e-9, 1e6))
        ->capture_default_str();
    s->add_option("--replicas", re->replicas, "Fields per level")
        ->check(CLI::Range(std::int64_t(2), std::int64_t(1) << 40))
        ->capture_default_str();
    add_common(s, re->c);
    s->callback([re, &rc] { rc = run_report(*re); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "addwalk: error: %s\n", e.what());
    return 2;
  }
  return rc;
}
