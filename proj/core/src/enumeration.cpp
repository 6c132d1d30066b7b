#include "addwalk/enumeration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

#include "addwalk/occupation.hpp"

namespace addwalk {
namespace {

using SiteVec = std::vector<std::pair<std::int64_t, std::int64_t>>;
using GroupMap = std::map<SiteVec, int128>;

int128 ipow_checked(int128 base, int e) {
  int128 r = 1;
  for (int i = 0; i < e; ++i) r = checked_mul(r, base);
  return r;
}

std::int64_t origin_key(int d) {
  std::int64_t zeros[kMaxDim] = {0, 0, 0};
  return pack_site(zeros, d);
}

// Depth-first walk over all step sequences; equal measures are merged as
// they are emitted, so memory holds one group per distinct measure, not one
// record per path.
struct PathDfs {
  const StepLaw& law;
  const std::int64_t n;
  GroupMap acc;
  std::array<std::int64_t, kMaxDim> pos{};
  std::map<std::int64_t, std::int64_t> occ;

  void visit(std::int64_t t, std::int64_t weight) {
    const std::int64_t key = pack_site(pos.data(), law.d);
    ++occ[key];
    if (t == n) {
      SiteVec mv(occ.begin(), occ.end());
      auto [it, fresh] = acc.try_emplace(std::move(mv), 0);
      (void)fresh;
      it->second = checked_add(it->second, weight);
    } else {
      for (std::size_t i = 0; i < law.offsets.size(); ++i) {
        for (int c = 0; c < law.d; ++c) pos[c] += law.offsets[i][c];
        visit(t + 1, weight * law.weights[i]);
        for (int c = 0; c < law.d; ++c) pos[c] -= law.offsets[i][c];
      }
    }
    auto oit = occ.find(key);
    if (--oit->second == 0) occ.erase(oit);
  }
};

std::int64_t binom64(int n, int k) {
  const Rational b = rational_binomial(n, k);
  if (b.num > int128(std::numeric_limits<std::int64_t>::max())) {
    throw std::overflow_error("binomial exceeds 64 bits");
  }
  return static_cast<std::int64_t>(b.num);
}

// Replaces each unsigned measure group by its signed expansions. Conditional
// on the path, the signed count at a site with unsigned count c is a sum of
// c independent uniform signs: value v in {-c, -c+2, ..., c} with weight
// C(c, (c+v)/2). Sites are independent, zero signed counts are dropped, and
// the common denominator gains the factor 2^(n+1).
GroupMap expand_signs(const GroupMap& unsigned_groups) {
  GroupMap out;
  SiteVec cur;
  for (const auto& [measure, weight] : unsigned_groups) {
    cur.clear();
    const std::size_t r = measure.size();
    // Iterative product-space walk: choice[i] indexes the signed value at
    // measure site i.
    std::vector<std::int64_t> choice(r, 0);
    for (;;) {
      cur.clear();
      int128 mult = weight;
      for (std::size_t i = 0; i < r; ++i) {
        const std::int64_t c = measure[i].second;
        const std::int64_t v = -c + 2 * choice[i];
        mult = checked_mul(mult, binom64(int(c), int(choice[i])));
        if (v != 0) cur.emplace_back(measure[i].first, v);
      }
      auto [it, fresh] = out.try_emplace(cur, 0);
      (void)fresh;
      it->second = checked_add(it->second, mult);
      // Advance the mixed-radix counter (site i has c_i + 1 values).
      std::size_t i = 0;
      while (i < r && ++choice[i] > measure[i].second) choice[i++] = 0;
      if (i == r) break;
    }
  }
  return out;
}

std::int64_t lookup(const SiteVec& v, std::int64_t site) {
  auto it = std::lower_bound(
      v.begin(), v.end(), site,
      [](const std::pair<std::int64_t, std::int64_t>& a, std::int64_t s) {
        return a.first < s;
      });
  return (it != v.end() && it->first == site) ? it->second : 0;
}

SiteVec convolve_vecs(const SiteVec& a, const SiteVec& b, int d) {
  std::map<std::int64_t, std::int64_t> m;
  for (const auto& [sa, ca] : a) {
    for (const auto& [sb, cb] : b) {
      m[add_sites(sa, sb, d)] += ca * cb;
    }
  }
  SiteVec out;
  out.reserve(m.size());
  for (const auto& [s, c] : m) {
    if (c != 0) out.emplace_back(s, c);
  }
  return out;
}

struct MomentAccumulator {
  const std::vector<MeasureGroup>& groups;
  const int p;
  const int max_m;
  const int d;
  const bool want_square_sum;
  const std::int64_t origin;
  std::vector<int128> num_x;  // index m; slot 0 accumulates total mass
  std::vector<int128> num_y;
  std::vector<int> idx;
  std::vector<std::int64_t> fact;

  MomentAccumulator(const std::vector<MeasureGroup>& g, int p_, int max_m_,
                    int d_, bool sq)
      : groups(g),
        p(p_),
        max_m(max_m_),
        d(d_),
        want_square_sum(sq),
        origin(origin_key(d_)),
        num_x(std::size_t(max_m_) + 1, 0),
        num_y(sq ? std::size_t(max_m_) + 1 : 0, 0),
        fact(std::size_t(p_) + 1, 1) {
    for (int i = 1; i <= p; ++i) fact[std::size_t(i)] = fact[std::size_t(i - 1)] * i;
  }

  std::int64_t permutations() const {
    // idx is non-decreasing; the number of ordered tuples with this multiset
    // of group indices is p! over the product of run-length factorials.
    std::int64_t perm = fact[std::size_t(p)];
    std::size_t i = 0;
    while (i < idx.size()) {
      std::size_t j = i;
      while (j < idx.size() && idx[j] == idx[i]) ++j;
      perm /= fact[j - i];
      i = j;
    }
    return perm;
  }

  void leaf(const SiteVec& partial, std::size_t last, int128 wprod) {
    const MeasureGroup& g = groups[last];
    std::int64_t x = 0;
    std::int64_t y = 0;
    if (want_square_sum) {
      const SiteVec conv = convolve_vecs(partial, g.sites, d);
      for (const auto& [s, c] : conv) {
        if (s == origin) x = c;
        y += c * c;
      }
    } else {
      for (const auto& [s, c] : g.sites) {
        x += c * lookup(partial, sub_sites(origin, s, d));
      }
    }
    const int128 w = checked_mul(wprod, int128(permutations()));
    num_x[0] = checked_add(num_x[0], w);
    int128 xp = 1, yp = 1;
    for (int m = 1; m <= max_m; ++m) {
      xp = checked_mul(xp, int128(x));
      num_x[std::size_t(m)] = checked_add(num_x[std::size_t(m)], checked_mul(w, xp));
      if (want_square_sum) {
        yp = checked_mul(yp, int128(y));
        num_y[std::size_t(m)] = checked_add(num_y[std::size_t(m)], checked_mul(w, yp));
      }
    }
  }

  void descend(int depth, std::size_t start, const SiteVec& partial,
               int128 wprod) {
    for (std::size_t i = start; i < groups.size(); ++i) {
      idx.push_back(int(i));
      const int128 w = checked_mul(wprod, groups[i].weight);
      if (depth == p - 1) {
        leaf(partial, i, w);
      } else {
        descend(depth + 1, i, convolve_vecs(partial, groups[i].sites, d), w);
      }
      idx.pop_back();
    }
  }

  void run() {
    const SiteVec delta{{origin, 1}};
    descend(0, 0, delta, 1);
  }
};

double midpoint(const Bound& b) { return 0.5 * (b.lo + b.hi); }

double rel_margin(double lhs, double rhs) {
  return (rhs - lhs) / std::max(std::abs(rhs), 1e-300);
}

InequalityCheck exact_check(std::string name, const Rational& lhs,
                            const Rational& rhs) {
  InequalityCheck c;
  c.name = std::move(name);
  c.lhs = lhs.to_double();
  c.rhs = rhs.to_double();
  c.lhs_exact = lhs.str();
  c.rhs_exact = rhs.str();
  c.exact = true;
  c.certified = true;
  c.holds = lhs <= rhs;
  c.margin = rel_margin(c.lhs, c.rhs);
  return c;
}

InequalityCheck interval_check(std::string name, const Bound& lhs,
                               const Bound& rhs) {
  InequalityCheck c;
  c.name = std::move(name);
  c.lhs = midpoint(lhs);
  c.rhs = midpoint(rhs);
  c.exact = false;
  if (lhs.certified_le(rhs)) {
    c.holds = true;
    c.certified = true;
  } else if (rhs.hi < lhs.lo) {
    c.holds = false;
    c.certified = true;
  } else {
    c.holds = c.lhs <= c.rhs;
    c.certified = false;
  }
  c.margin = rel_margin(c.lhs, c.rhs);
  return c;
}

template <typename... Args>
std::string fmt_name(const char* fmt, Args... args) {
  char buf[128];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

// m-th moment with the convention that the 0-th moment is 1.
Rational moment(const ExactMomentReport& rep, int m) {
  return m == 0 ? Rational(1, 1) : rep.origin_moments[std::size_t(m) - 1];
}

Bound rooted_moment(const ExactMomentReport& rep, int m, int p) {
  return Bound::of_rational(moment(rep, m)).root(p);
}

InequalityCheck factorial_pair(std::string name,
                               const std::vector<Rational>& moments, int m,
                               int pexp) {
  const Rational& lhs = moments[std::size_t(m) - 1];
  try {
    const Rational rhs =
        rational_pow(rational_factorial(m), pexp) * rational_pow(moments[0], m);
    return exact_check(std::move(name), lhs, rhs);
  } catch (const std::overflow_error&) {
    // The exact product no longer fits 128 bits; fall back to certified
    // outward-rounded intervals.
    Bound rhs = Bound::exact(1.0);
    for (int i = 0; i < m; ++i) rhs = rhs.mul_nonneg(Bound::of_rational(moments[0]));
    double fac = 1.0;
    for (int i = 2; i <= m; ++i) fac *= i;
    rhs = rhs.scale(std::pow(fac, pexp));
    return interval_check(std::move(name), Bound::of_rational(lhs), rhs);
  }
}

}  // namespace

Rational rational_factorial(int m) {
  if (m < 0) throw std::invalid_argument("factorial of negative argument");
  int128 f = 1;
  for (int i = 2; i <= m; ++i) f = checked_mul(f, i);
  return Rational(f, 1);
}

Rational rational_binomial(int m, int k) {
  if (m < 0) throw std::invalid_argument("binomial with negative row");
  if (k < 0 || k > m) return Rational(0, 1);
  k = std::min(k, m - k);
  int128 r = 1;
  for (int i = 1; i <= k; ++i) {
    r = checked_mul(r, m - k + i);
    r /= i;  // exact: a product of i consecutive integers is divisible by i!
  }
  return Rational(r, 1);
}

Rational rational_pow(const Rational& base, int e) {
  if (e < 0) throw std::invalid_argument("negative rational power");
  Rational r(1, 1);
  for (int i = 0; i < e; ++i) r = r * base;
  return r;
}

GroupedWalk group_walk_paths(const WalkModel& model, std::int64_t n,
                             bool symmetrized, const EnumerationBudget& budget) {
  if (!model.exact_steps) {
    throw std::invalid_argument("exact enumeration requires a finite step law; model '" +
                                model.name + "' has none");
  }
  if (n < 0) throw std::invalid_argument("need n >= 0");
  if (n + 1 > 62) throw std::invalid_argument("horizon too large for exact sign weights");
  const double leaves =
      std::pow(double(model.steps.offsets.size()), double(n));
  if (!(leaves <= double(budget.max_path_leaves))) {
    throw std::invalid_argument(
        "path enumeration budget exceeded: needs ~" + std::to_string(leaves) +
        " leaves, budget " + std::to_string(budget.max_path_leaves));
  }

  PathDfs dfs{model.steps, n, {}, {}, {}};
  dfs.visit(0, 1);
  GroupMap acc = symmetrized ? expand_signs(dfs.acc) : std::move(dfs.acc);

  GroupedWalk g;
  g.n = n;
  g.d = model.d;
  g.symmetrized = symmetrized;
  g.denominator = ipow_checked(model.steps.den, int(n));
  if (symmetrized) {
    g.denominator = checked_mul(g.denominator, int128(1) << (n + 1));
  }
  g.groups.reserve(acc.size());
  int128 total = 0;
  for (auto& [measure, weight] : acc) {
    total = checked_add(total, weight);
    g.groups.push_back(MeasureGroup{measure, weight});
  }
  if (total != g.denominator) {
    throw std::logic_error("group weights do not sum to the outcome count");
  }
  return g;
}

ExactMomentReport enumerate_moments(const WalkModel& model, std::int64_t n,
                                    int p, int max_m, bool symmetrized,
                                    const EnumerationBudget& budget) {
  if (p < 1 || p > 20) throw std::invalid_argument("need 1 <= p <= 20");
  if (max_m < 1) throw std::invalid_argument("need max_m >= 1");
  const GroupedWalk gw = group_walk_paths(model, n, symmetrized, budget);

  const double ordered = std::pow(double(gw.groups.size()), double(p));
  if (!(ordered <= double(budget.max_cross_terms))) {
    throw std::invalid_argument(
        "cross-product budget exceeded: " + std::to_string(gw.groups.size()) +
        " groups to power " + std::to_string(p) + " needs ~" +
        std::to_string(ordered) + " terms, budget " +
        std::to_string(budget.max_cross_terms));
  }

  MomentAccumulator acc(gw.groups, p, max_m, gw.d, !symmetrized);
  acc.run();

  const int128 dp = ipow_checked(gw.denominator, p);
  ExactMomentReport rep;
  rep.model = model.name;
  rep.n = n;
  rep.p = p;
  rep.max_m = max_m;
  rep.symmetrized = symmetrized;
  rep.group_count = std::int64_t(gw.groups.size());
  rep.cross_terms = ordered;
  rep.mass = Rational(acc.num_x[0], dp);
  if (!(rep.mass == Rational(1, 1))) {
    throw std::logic_error("enumeration mass differs from 1: " + rep.mass.str());
  }
  for (int m = 1; m <= max_m; ++m) {
    rep.origin_moments.emplace_back(acc.num_x[std::size_t(m)], dp);
    if (!symmetrized) {
      rep.square_sum_moments.emplace_back(acc.num_y[std::size_t(m)], dp);
    }
  }
  return rep;
}

std::vector<InequalityCheck> check_factorial_moment_bound(
    const WalkModel& model, std::int64_t n, int p, int max_m,
    const EnumerationBudget& budget) {
  const ExactMomentReport rep = enumerate_moments(model, n, p, max_m, false, budget);
  std::vector<InequalityCheck> out;
  for (int m = 1; m <= max_m; ++m) {
    out.push_back(factorial_pair(
        fmt_name("local_time_factorial_bound n=%lld p=%d m=%d",
                 static_cast<long long>(n), p, m),
        rep.origin_moments, m, p));
    out.push_back(factorial_pair(
        fmt_name("square_sum_factorial_bound n=%lld p=%d m=%d",
                 static_cast<long long>(n), p, m),
        rep.square_sum_moments, m, 2 * p));
  }
  return out;
}

std::vector<InequalityCheck> check_block_split_bound(
    const WalkModel& model, std::int64_t n1, std::int64_t n2, int p, int max_m,
    const EnumerationBudget& budget) {
  const std::int64_t n = n1 + n2 + 1;
  const ExactMomentReport repn = enumerate_moments(model, n, p, max_m, false, budget);
  const ExactMomentReport rep1 = enumerate_moments(model, n1, p, max_m, false, budget);
  const ExactMomentReport rep2 = enumerate_moments(model, n2, p, max_m, false, budget);

  std::vector<InequalityCheck> out;
  for (int m = 1; m <= max_m; ++m) {
    std::string name =
        fmt_name("block_split_bound n1=%lld n2=%lld p=%d m=%d",
                 static_cast<long long>(n1), static_cast<long long>(n2), p, m);
    if (p == 1) {
      try {
        Rational rhs(0, 1);
        for (int k = 0; k <= m; ++k) {
          rhs = rhs + rational_binomial(m, k) * moment(rep1, k) * moment(rep2, m - k);
        }
        out.push_back(exact_check(std::move(name), moment(repn, m), rhs));
        continue;
      } catch (const std::overflow_error&) {
        // fall through to the interval route
      }
    }
    Bound rhs{0.0, 0.0};
    for (int k = 0; k <= m; ++k) {
      const Bound term = rooted_moment(rep1, k, p)
                             .mul_nonneg(rooted_moment(rep2, m - k, p))
                             .scale(rational_binomial(m, k).to_double());
      rhs = rhs + term;
    }
    out.push_back(interval_check(std::move(name), rooted_moment(repn, m, p), rhs));
  }
  return out;
}

std::vector<InequalityCheck> check_symmetrized_moment_bound(
    const WalkModel& model, std::int64_t n1, std::int64_t n2, int p, int max_m,
    const EnumerationBudget& budget) {
  const std::int64_t n = n1 + n2 + 1;
  const ExactMomentReport repn =
      enumerate_moments(model, n, p, 2 * max_m, true, budget);
  const ExactMomentReport rep1 =
      enumerate_moments(model, n1, p, 2 * max_m, true, budget);
  const ExactMomentReport rep2 =
      enumerate_moments(model, n2, p, 2 * max_m, true, budget);

  std::vector<InequalityCheck> out;
  for (int j = 1; j < 2 * max_m; j += 2) {
    Rational odd = repn.origin_moments[std::size_t(j) - 1];
    if (odd.num < 0) odd = Rational(-odd.num, odd.den);
    out.push_back(exact_check(
        fmt_name("signed_local_time_odd_moment_vanishes n=%lld p=%d m=%d",
                 static_cast<long long>(n), p, j),
        odd, Rational(0, 1)));
  }
  for (int m = 1; m <= max_m; ++m) {
    std::string name = fmt_name(
        "signed_split_bound n1=%lld n2=%lld p=%d m=%d",
        static_cast<long long>(n1), static_cast<long long>(n2), p, 2 * m);
    if (p == 1) {
      try {
        Rational rhs(0, 1);
        for (int k = 0; k <= m; ++k) {
          rhs = rhs + rational_binomial(2 * m, 2 * k) * moment(rep1, 2 * k) *
                          moment(rep2, 2 * (m - k));
        }
        out.push_back(exact_check(std::move(name), moment(repn, 2 * m), rhs));
        continue;
      } catch (const std::overflow_error&) {
        // fall through to the interval route
      }
    }
    Bound rhs{0.0, 0.0};
    for (int k = 0; k <= m; ++k) {
      const Bound term =
          rooted_moment(rep1, 2 * k, p)
              .mul_nonneg(rooted_moment(rep2, 2 * (m - k), p))
              .scale(rational_binomial(2 * m, 2 * k).to_double());
      rhs = rhs + term;
    }
    out.push_back(
        interval_check(std::move(name), rooted_moment(repn, 2 * m, p), rhs));
  }
  return out;
}

}  // namespace addwalk
