// Occupation measures, local-time fields, and their scalar summaries.
//
// For p independent walks observed at times 0..n, the local time l(n,x)
// counts index tuples (k_1..k_p) whose position sum equals x; equivalently it
// is the p-fold convolution of the per-walk occupation measures. Everything
// here is exact integer arithmetic: field values are 64-bit, the energy
// sum_x l^2 and the self-intersection count are 128-bit.
//
// Two independent routes compute the energy:
//   direct           - materialize the field, sum squares;
//   autocorrelation  - sum_x l^2 = (nu_1 * ... * nu_p)(0) where
//                      nu_j(z) = sum_y mu_j(y) mu_j(y+z).
// Their exact agreement is a standing self-check, as is the identity
// sum_x l^2 = 2 * Lambda_n + (n+1)^p  (diagonal tuples counted exactly).
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "addwalk/exact.hpp"
#include "addwalk/rng.hpp"
#include "addwalk/walk_model.hpp"

namespace addwalk {

// Open-addressing map from packed lattice site to V; linear probing,
// power-of-two capacity. Value-initialized V() is the implicit default.
template <class V>
class SiteMap {
 public:
  explicit SiteMap(std::size_t expected = 8) {
    std::size_t cap = 16;
    while (cap < 2 * expected) cap <<= 1;
    keys_.assign(cap, kEmpty);
    vals_.assign(cap, V());
    mask_ = cap - 1;
  }

  V& slot(std::int64_t key) {
    if ((size_ + 1) * 2 > keys_.size()) grow();
    std::size_t i = probe(key);
    if (keys_[i] == kEmpty) {
      keys_[i] = key;
      ++size_;
    }
    return vals_[i];
  }

  V get(std::int64_t key) const {
    std::size_t i = mix64(std::uint64_t(key)) & mask_;
    while (keys_[i] != kEmpty) {
      if (keys_[i] == key) return vals_[i];
      i = (i + 1) & mask_;
    }
    return V();
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      if (keys_[i] != kEmpty) f(keys_[i], vals_[i]);
    }
  }

  std::size_t size() const { return size_; }

 private:
  static constexpr std::int64_t kEmpty = INT64_MIN;

  std::size_t probe(std::int64_t key) const {
    std::size_t i = mix64(std::uint64_t(key)) & mask_;
    while (keys_[i] != kEmpty && keys_[i] != key) i = (i + 1) & mask_;
    return i;
  }

  void grow() {
    std::vector<std::int64_t> old_keys = std::move(keys_);
    std::vector<V> old_vals = std::move(vals_);
    keys_.assign(old_keys.size() * 2, kEmpty);
    vals_.assign(old_vals.size() * 2, V());
    mask_ = keys_.size() - 1;
    for (std::size_t i = 0; i < old_keys.size(); ++i) {
      if (old_keys[i] == kEmpty) continue;
      std::size_t j = probe(old_keys[i]);
      keys_[j] = old_keys[i];
      vals_[j] = old_vals[i];
    }
  }

  std::vector<std::int64_t> keys_;
  std::vector<V> vals_;
  std::size_t size_ = 0;
  std::size_t mask_ = 0;
};

// Packs a lattice site into one 64-bit key. d = 1 passes coordinates through
// (heavy-tailed walks roam far); d in {2,3} packs 21-bit signed fields.
inline std::int64_t pack_site(const std::int64_t* x, int d) {
  if (d == 1) return x[0];
  constexpr std::int64_t kHalf = std::int64_t(1) << 20;
  std::uint64_t r = 0;
  for (int k = 0; k < d; ++k) {
    const std::int64_t v = x[k] + kHalf;
    if (v < 0 || v >= 2 * kHalf) {
      throw std::overflow_error("site coordinate exceeds packing range");
    }
    r = (r << 21) | std::uint64_t(v);
  }
  return std::int64_t(r);
}

// Packed key of the origin. Only d = 1 passes through as 0; packed
// dimensions carry the coordinate offset, so every origin lookup must go
// through this helper rather than assuming key 0.
inline std::int64_t origin_key(int d) {
  if (d == 1) return 0;
  constexpr std::int64_t zero[kMaxDim] = {0, 0, 0};
  return pack_site(zero, d);
}

inline void unpack_site(std::int64_t key, int d, std::int64_t* x) {
  if (d == 1) {
    x[0] = key;
    return;
  }
  constexpr std::int64_t kHalf = std::int64_t(1) << 20;
  std::uint64_t r = std::uint64_t(key);
  for (int k = d - 1; k >= 0; --k) {
    x[k] = std::int64_t(r & ((std::uint64_t(1) << 21) - 1)) - kHalf;
    r >>= 21;
  }
}

// Difference of two packed sites (needed for autocorrelations when d > 1,
// where packed keys do not subtract componentwise without unpacking).
inline std::int64_t sub_sites(std::int64_t a, std::int64_t b, int d) {
  if (d == 1) return a - b;
  std::int64_t xa[kMaxDim], xb[kMaxDim], xd[kMaxDim];
  unpack_site(a, d, xa);
  unpack_site(b, d, xb);
  for (int k = 0; k < d; ++k) xd[k] = xa[k] - xb[k];
  return pack_site(xd, d);
}

inline std::int64_t add_sites(std::int64_t a, std::int64_t b, int d) {
  if (d == 1) return a + b;
  std::int64_t xa[kMaxDim], xb[kMaxDim], xs[kMaxDim];
  unpack_site(a, d, xa);
  unpack_site(b, d, xb);
  for (int k = 0; k < d; ++k) xs[k] = xa[k] + xb[k];
  return pack_site(xs, d);
}

inline std::int64_t neg_site(std::int64_t a, int d) {
  if (d == 1) return -a;
  std::int64_t xa[kMaxDim], xn[kMaxDim];
  unpack_site(a, d, xa);
  for (int k = 0; k < d; ++k) xn[k] = -xa[k];
  return pack_site(xn, d);
}

struct OccupationMeasure {
  std::int64_t n = 0;  // horizon; total mass is n+1
  int d = 1;
  SiteMap<std::int64_t> counts;
};

struct FieldScalars {
  int128 l0 = 0;      // l(n, 0)
  int128 l2sum = 0;   // sum_x l(n,x)^2
  int128 lambda = 0;  // self-intersection pairs
};

struct LocalTimeField {
  std::int64_t n = 0;
  int p = 1;
  int d = 1;
  SiteMap<std::int64_t> values;
  FieldScalars scalars;
};

int128 ipow128(int128 base, int exp);

// Counts sites visited by a freshly sampled path (positions not retained).
OccupationMeasure occupation(const WalkModel& model, std::int64_t n,
                             RngStream& rng);

// Counts sites of an explicit position array ((n+1) x d row-major).
OccupationMeasure occupation_of_path(const std::vector<std::int64_t>& positions,
                                     int d);

// Full sparse field via p-fold convolution (smallest supports first), with
// all three scalars filled; intended for moderate n.
LocalTimeField local_time_field(const std::vector<OccupationMeasure>& measures);

// l(n,0) without materializing the field.
int128 l0_from_measures(const std::vector<OccupationMeasure>& measures);

// Energy via the autocorrelation route, without materializing the field.
int128 l2_via_autocorrelation(const std::vector<OccupationMeasure>& measures);

// (l2sum - (n+1)^p) / 2, with the parity/negativity sanity check.
int128 lambda_from_l2(int128 l2sum, std::int64_t n, int p);

// All three scalars by the cheap routes (product for l0, autocorrelation for
// the energy).
FieldScalars field_scalars(const std::vector<OccupationMeasure>& measures);

// Online single-walk engine (p = 1): O(1) update of l(n,0) and sum l^2 per
// step. Used by the iterated-logarithm traces.
class OnlineLocalTime {
 public:
  explicit OnlineLocalTime(const WalkModel& model);

  void step(RngStream& rng);  // advance the walk by one increment

  std::int64_t n() const { return n_; }
  std::int64_t l0() const { return mu_.counts.get(origin_key(mu_.d)); }
  int128 l2sum() const { return l2sum_; }
  const OccupationMeasure& measure() const { return mu_; }

 private:
  const WalkModel* model_;
  OccupationMeasure mu_;
  std::int64_t pos_[kMaxDim] = {0, 0, 0};
  std::int64_t n_ = 0;
  int128 l2sum_ = 1;  // time 0 visit of the origin
};

// Multi-walk engine: walks advance in lockstep; scalars are recomputed from
// the occupation measures on demand (used at geometric checkpoints).
class MultiWalkField {
 public:
  MultiWalkField(const WalkModel& model, int p, std::uint64_t master_seed,
                 std::uint64_t replica);

  void advance_to(std::int64_t n);
  std::int64_t n() const { return n_; }
  FieldScalars scalars() const;

 private:
  const WalkModel* model_;
  int p_;
  std::vector<OccupationMeasure> measures_;
  std::vector<RngStream> streams_;
  std::vector<std::array<std::int64_t, kMaxDim>> pos_;
  std::int64_t n_ = 0;
};

}  // namespace addwalk
