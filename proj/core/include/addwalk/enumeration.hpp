// Exact finite-horizon moment oracle for the local time at the origin.
//
// For a walk with a finite dyadic step law, every length-n path has
// probability (product of step weights) / den^n. Grouping the den^n paths by
// their occupation measure compresses them into a short list of
// (measure, weight) pairs per walk; since the p walks are independent copies,
// any moment of the additive-walk local time at the origin is an exact
// rational sum over p-tuples of groups.
//
// The symmetrized variant attaches an independent uniform +/-1 sign to each
// of the n+1 time indices of every walk and replaces the occupation measure
// by the signed one. Conditional on a path, the signed count at each site
// depends only on the unsigned count there and is independent across sites,
// so sign enumeration happens per group (binomially weighted), never per
// path.
//
// All accumulators are overflow-checked 128-bit integers; a configuration
// too large for exact arithmetic throws instead of returning a wrong answer.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "addwalk/exact.hpp"
#include "addwalk/walk_model.hpp"

namespace addwalk {

// Work limits for the exact oracle. `max_path_leaves` caps the depth-first
// path enumeration of one walk; `max_cross_terms` caps the number of ordered
// p-tuples of measure groups the moment sum would touch. Both are estimated
// up front and enumeration throws std::invalid_argument when a request does
// not fit, so callers can trust that a returned report is complete.
struct EnumerationBudget {
  std::int64_t max_path_leaves = 1'000'000;
  std::int64_t max_cross_terms = 1'000'000'000;
};

// One equivalence class of per-walk outcomes: all (path, sign) realizations
// sharing the same (signed) occupation measure. Sites are packed lattice
// points sorted ascending; counts are nonzero (signed when symmetrized).
struct MeasureGroup {
  std::vector<std::pair<std::int64_t, std::int64_t>> sites;
  int128 weight = 0;  // number of equally likely outcomes in the class
};

struct GroupedWalk {
  std::int64_t n = 0;
  int d = 1;
  bool symmetrized = false;
  int128 denominator = 1;  // den^n, times 2^(n+1) when symmetrized
  std::vector<MeasureGroup> groups;
};

// Enumerates one walk of horizon n and groups outcomes by occupation
// measure. Requires model.exact_steps. Group order is deterministic
// (lexicographic in the measure).
GroupedWalk group_walk_paths(const WalkModel& model, std::int64_t n,
                             bool symmetrized,
                             const EnumerationBudget& budget = {});

// Exact moments of the p-walk local time at the origin (and, for the
// unsigned field, of the summed squared local time).
struct ExactMomentReport {
  std::string model;
  std::int64_t n = 0;
  int p = 1;
  int max_m = 0;
  bool symmetrized = false;
  std::int64_t group_count = 0;  // measure groups per walk
  double cross_terms = 0.0;      // ordered p-tuples represented by the sum
  Rational mass;                 // total probability; must be exactly 1
  // origin_moments[m-1] = E[X^m] for m = 1..max_m, where X is the local time
  // of the p-walk field at the origin (signed local time when symmetrized).
  std::vector<Rational> origin_moments;
  // square_sum_moments[m-1] = E[(sum_x l(n,x)^2)^m]; empty when symmetrized.
  std::vector<Rational> square_sum_moments;
};

ExactMomentReport enumerate_moments(const WalkModel& model, std::int64_t n,
                                    int p, int max_m, bool symmetrized = false,
                                    const EnumerationBudget& budget = {});

// Verdict on one inequality between exactly enumerated quantities. When both
// sides stay rational the comparison is exact; when a p-th root is involved
// both sides become outward-rounded intervals and `certified` records whether
// the intervals actually separate (they always do unless the inequality is
// within ~1e-12 of equality).
struct InequalityCheck {
  std::string name;
  double lhs = 0.0;  // midpoint (or exact double image) for display
  double rhs = 0.0;
  std::string lhs_exact;  // "num/den" when the side is exactly rational
  std::string rhs_exact;
  bool exact = false;      // compared as rationals, no rounding anywhere
  bool holds = false;      // inequality lhs <= rhs satisfied
  bool certified = false;  // verdict is rigorous (exact or separated bounds)
  double margin = 0.0;     // (rhs - lhs) / max(|rhs|, 1e-300)
};

// E l^m <= (m!)^p (E l)^m and E (sum_x l^2)^m <= (m!)^(2p) (E sum_x l^2)^m
// for m = 1..max_m. These bounds are the factorial-growth hypothesis behind
// exponential integrability; they are guaranteed for models with nonnegative
// step characteristic function and checked honestly for any finite-step
// model.
std::vector<InequalityCheck> check_factorial_moment_bound(
    const WalkModel& model, std::int64_t n, int p, int max_m,
    const EnumerationBudget& budget = {});

// Sub-multiplicativity across a split of the time horizon n = n1 + n2 + 1
// into the index blocks {0..n1} and {n1+1..n}:
//   [E l(n,0)^m]^(1/p)
//     <= sum_k C(m,k) [E l(n1,0)^k]^(1/p) [E l(n2,0)^(m-k)]^(1/p).
std::vector<InequalityCheck> check_block_split_bound(
    const WalkModel& model, std::int64_t n1, std::int64_t n2, int p, int max_m,
    const EnumerationBudget& budget = {});

// Symmetrized (sign-weighted) local time xi: odd moments vanish exactly, and
// even moments satisfy the split bound with binomial C(2m,2k) coefficients:
//   [E xi(n,0)^(2m)]^(1/p)
//     <= sum_k C(2m,2k) [E xi(n1,0)^(2k)]^(1/p) [E xi(n2,0)^(2m-2k)]^(1/p),
// n = n1 + n2 + 1. `max_m` counts even moments (checks run for 2,4,..,2m)
// and odd-moment vanishing is checked for 1,3,..,2m-1.
std::vector<InequalityCheck> check_symmetrized_moment_bound(
    const WalkModel& model, std::int64_t n1, std::int64_t n2, int p, int max_m,
    const EnumerationBudget& budget = {});

// Exact small-integer combinatorics used by the bounds above (and by tests).
Rational rational_factorial(int m);
Rational rational_binomial(int m, int k);
// Checked rational power; throws std::overflow_error when the reduced result
// does not fit 128-bit integers.
Rational rational_pow(const Rational& base, int e);

}  // namespace addwalk
