// Poisson-clock embedding and the exponential-weighted local time.
//
// Attaching a unit-rate Poisson clock to a walk, X(t) = S(N_t), turns the
// continuous-time local time over a window into an exponential-weighted walk
// sum: each (walk, time index) pair carries an independent unit-mean
// exponential weight tau, and
//
//   L_n^x = sum over index tuples (k_1..k_p) with position sum x of
//           tau^1_{k_1} ... tau^p_{k_p},
//
// computed here by weighted sparse convolution of the per-walk weighted
// occupation measures. Forcing tau = 1 recovers the counting local time
// l(n,x) exactly, which is the standing paired self-check.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "addwalk/exact.hpp"
#include "addwalk/walk_model.hpp"

namespace addwalk {

class RngStream;

struct PoissonizedField {
  std::int64_t n = 0;
  int p = 1;
  int d = 1;
  double l0_weighted = 0.0;  // weighted local time at the origin
  int128 l0 = 0;             // unweighted l(n,0) on the same paths
  double weight_mass = 0.0;  // prod_j sum_k tau^j_k
  double field_mass = 0.0;   // sum_x L_n^x from the materialized field; equals
                             // weight_mass up to rounding (NaN when the field
                             // was too large to materialize)
};

// Samples p paths (step stream family) and p*(n+1) exponential weights
// (weight stream family) for the given replica, then evaluates the weighted
// and unweighted local times at the origin on the same paths. unit_weights
// forces tau = 1, the degenerate-weight test hook.
PoissonizedField poissonized_local_time(const WalkModel& model, int p,
                                        std::int64_t n, std::uint64_t seed,
                                        std::uint64_t replica = 0,
                                        bool unit_weights = false);

// Paired closeness study of (L_n^0 - l(n,0)) across an n-schedule: both
// statistics ride the same paths, so their difference is pure weight noise.
// Differences are normalized by the deviation scale n^p a(n/b_n)^{-d} with
// b_n = (log n)^2; the normalized spread shrinking with n is the observable
// trend (the mean is 0 for every n since the weights have unit mean).
struct PairedLevel {
  std::int64_t n = 0;
  double scale = 0.0;      // n^p a(n/b_n)^{-d}
  double mean_diff = 0.0;  // mean of (L_n^0 - l(n,0)) / scale
  double se_diff = 0.0;    // standard error of mean_diff
  double spread = 0.0;     // sample standard deviation of the normalized diff
  double mean_weighted = 0.0;  // mean of L_n^0 (unnormalized)
  double mean_plain = 0.0;     // mean of l(n,0) (unnormalized)
};

struct PairedReport {
  std::string model;
  int d = 1;
  int p = 1;
  std::int64_t replicas = 0;
  std::uint64_t seed = 0;
  std::vector<PairedLevel> levels;
};

PairedReport paired_mean_check(const WalkModel& model, int p,
                               const std::vector<std::int64_t>& n_schedule,
                               std::int64_t replicas, std::uint64_t seed,
                               int jobs = 0);

// Unit-rate Poisson count N_t = max{k : tau_0 + ... + tau_{k-1} <= t}.
std::int64_t poisson_count(RngStream& rng, double t);

// Convenience form drawing from the weight stream (seed, replica 0, lane 0).
std::int64_t poisson_clock(std::uint64_t seed, double t);

}  // namespace addwalk
