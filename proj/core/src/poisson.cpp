#include "addwalk/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "addwalk/occupation.hpp"
#include "addwalk/parallel.hpp"
#include "addwalk/rates.hpp"
#include "addwalk/rng.hpp"

namespace addwalk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct WeightedMeasure {
  SiteMap<double> weights;  // site -> sum of tau over visits
  double mass = 0.0;        // sum of all tau
};

SiteMap<double> convolve_weighted(const SiteMap<double>& a,
                                  const SiteMap<double>& b, int d) {
  SiteMap<double> out(a.size() + b.size());
  a.for_each([&](std::int64_t ka, double va) {
    b.for_each([&](std::int64_t kb, double vb) {
      out.slot(add_sites(ka, kb, d)) += va * vb;
    });
  });
  return out;
}

// Cross-term budget for materializing the full weighted field.
constexpr double kFieldBudget = 1.0e8;

}  // namespace

PoissonizedField poissonized_local_time(const WalkModel& model, int p,
                                        std::int64_t n, std::uint64_t seed,
                                        std::uint64_t replica,
                                        bool unit_weights) {
  if (p < 1 || p > 16) throw std::invalid_argument("p must be in 1..16");
  if (n < 0) throw std::invalid_argument("horizon must be nonnegative");
  if (!model.exact_steps && model.alpha == 2.0) {
    throw std::invalid_argument(
        "the analytic gaussian family carries no lattice step law");
  }

  const int d = model.d;
  const std::size_t lanes = std::size_t(p);
  std::vector<WeightedMeasure> weighted(lanes);
  std::vector<OccupationMeasure> plain;
  plain.reserve(std::size_t(p));
  for (int j = 0; j < p; ++j) {
    RngStream steps = replica_stream(seed, StreamTag::kSteps, replica,
                                     std::uint64_t(j));
    const std::vector<std::int64_t> pos = model.sample_path(n, steps);
    RngStream wrng = replica_stream(seed, StreamTag::kWeights, replica,
                                    std::uint64_t(j));
    OccupationMeasure mu;
    mu.n = n;
    mu.d = d;
    WeightedMeasure& wm = weighted[std::size_t(j)];
    for (std::int64_t k = 0; k <= n; ++k) {
      // The weight stream is always advanced so that the unit-weight hook
      // sees the same step paths as the weighted run.
      const double drawn = wrng.next_exponential();
      const double tau = unit_weights ? 1.0 : drawn;
      const std::int64_t key =
          pack_site(&pos[std::size_t(k) * std::size_t(d)], d);
      mu.counts.slot(key) += 1;
      wm.weights.slot(key) += tau;
      wm.mass += tau;
    }
    plain.push_back(std::move(mu));
  }

  PoissonizedField out;
  out.n = n;
  out.p = p;
  out.d = d;
  out.l0 = l0_from_measures(plain);

  // Fold smallest supports first; the final factor enters as a dot product.
  std::vector<const SiteMap<double>*> order;
  order.reserve(std::size_t(p));
  for (const WeightedMeasure& wm : weighted) order.push_back(&wm.weights);
  std::sort(order.begin(), order.end(),
            [](const SiteMap<double>* a, const SiteMap<double>* b) {
              return a->size() < b->size();
            });
  double mass = 1.0;
  for (const WeightedMeasure& wm : weighted) mass *= wm.mass;
  out.weight_mass = mass;

  if (p == 1) {
    out.l0_weighted = order[0]->get(origin_key(d));
    double total = 0.0;
    order[0]->for_each([&](std::int64_t, double v) { total += v; });
    out.field_mass = total;
    return out;
  }

  SiteMap<double> acc = *order[0];
  for (int j = 1; j + 1 < p; ++j) {
    acc = convolve_weighted(acc, *order[std::size_t(j)], d);
  }
  const SiteMap<double>& last = *order[std::size_t(p - 1)];
  double l0w = 0.0;
  acc.for_each([&](std::int64_t key, double v) {
    l0w += v * last.get(neg_site(key, d));
  });
  out.l0_weighted = l0w;

  if (double(acc.size()) * double(last.size()) <= kFieldBudget) {
    SiteMap<double> field = convolve_weighted(acc, last, d);
    double total = 0.0;
    field.for_each([&](std::int64_t, double v) { total += v; });
    out.field_mass = total;
  } else {
    out.field_mass = kNaN;
  }
  return out;
}

PairedReport paired_mean_check(const WalkModel& model, int p,
                               const std::vector<std::int64_t>& n_schedule,
                               std::int64_t replicas, std::uint64_t seed,
                               int jobs) {
  if (p < 1 || p > 16) throw std::invalid_argument("p must be in 1..16");
  if (replicas < 2) throw std::invalid_argument("need at least two replicas");
  if (n_schedule.empty()) {
    throw std::invalid_argument("the level schedule must be nonempty");
  }
  for (std::size_t i = 0; i < n_schedule.size(); ++i) {
    if (n_schedule[i] < 2) {
      throw std::invalid_argument("paired levels need n >= 2");
    }
    if (i > 0 && n_schedule[i] <= n_schedule[i - 1]) {
      throw std::invalid_argument("levels must be strictly increasing");
    }
  }

  PairedReport out;
  out.model = model.name;
  out.d = model.d;
  out.p = p;
  out.replicas = replicas;
  out.seed = seed;

  const unsigned workers = jobs > 0 ? unsigned(jobs) : default_jobs();
  const std::size_t count = std::size_t(replicas);
  for (std::size_t level = 0; level < n_schedule.size(); ++level) {
    const std::int64_t n = n_schedule[level];
    std::vector<double> weighted_vals(count, 0.0);
    std::vector<double> plain_vals(count, 0.0);
    parallel_for(count, workers, [&](std::size_t r) {
      const std::uint64_t id =
          std::uint64_t(level) * std::uint64_t(replicas) + std::uint64_t(r);
      const PoissonizedField f = poissonized_local_time(model, p, n, seed, id);
      weighted_vals[r] = f.l0_weighted;
      plain_vals[r] = double(f.l0);
    });
    const double b_n = default_bn(n);
    const double scale = std::pow(double(n), double(p)) *
                         std::pow(model.norming(double(n) / b_n),
                                  -double(model.d));
    std::vector<double> diffs(count, 0.0);
    for (std::size_t r = 0; r < count; ++r) {
      diffs[r] = (weighted_vals[r] - plain_vals[r]) / scale;
    }
    PairedLevel lv;
    lv.n = n;
    lv.scale = scale;
    lv.mean_weighted = pairwise_sum(weighted_vals) / double(replicas);
    lv.mean_plain = pairwise_sum(plain_vals) / double(replicas);
    lv.mean_diff = pairwise_sum(diffs) / double(replicas);
    std::vector<double> sq(count, 0.0);
    for (std::size_t r = 0; r < count; ++r) {
      const double c = diffs[r] - lv.mean_diff;
      sq[r] = c * c;
    }
    const double var = pairwise_sum(sq) / double(replicas - 1);
    lv.spread = std::sqrt(var);
    lv.se_diff = lv.spread / std::sqrt(double(replicas));
    out.levels.push_back(lv);
  }
  return out;
}

std::int64_t poisson_count(RngStream& rng, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  if (!(t <= 1.0e12)) throw std::invalid_argument("time horizon too large");
  std::int64_t count = 0;
  double clock = rng.next_exponential();
  while (clock <= t) {
    ++count;
    clock += rng.next_exponential();
  }
  return count;
}

std::int64_t poisson_clock(std::uint64_t seed, double t) {
  RngStream rng = replica_stream(seed, StreamTag::kWeights, 0, 0);
  return poisson_count(rng, t);
}

}  // namespace addwalk
