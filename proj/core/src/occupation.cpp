#include "addwalk/occupation.hpp"

#include <algorithm>

namespace addwalk {

namespace {

// Convolution of two sparse nonnegative integer measures.
SiteMap<std::int64_t> convolve(const SiteMap<std::int64_t>& a,
                               const SiteMap<std::int64_t>& b, int d) {
  SiteMap<std::int64_t> out(a.size() + b.size());
  a.for_each([&](std::int64_t xa, std::int64_t ca) {
    b.for_each([&](std::int64_t xb, std::int64_t cb) {
      out.slot(add_sites(xa, xb, d)) += ca * cb;
    });
  });
  return out;
}

// Autocorrelation nu(z) = sum_y mu(y) mu(y+z); even by construction.
SiteMap<std::int64_t> autocorrelation(const SiteMap<std::int64_t>& mu, int d) {
  SiteMap<std::int64_t> nu(2 * mu.size());
  mu.for_each([&](std::int64_t xa, std::int64_t ca) {
    mu.for_each([&](std::int64_t xb, std::int64_t cb) {
      nu.slot(sub_sites(xb, xa, d)) += ca * cb;
    });
  });
  return nu;
}

std::vector<const OccupationMeasure*> sorted_by_support(
    const std::vector<OccupationMeasure>& measures) {
  std::vector<const OccupationMeasure*> ptrs;
  ptrs.reserve(measures.size());
  for (const auto& m : measures) ptrs.push_back(&m);
  std::stable_sort(ptrs.begin(), ptrs.end(),
                   [](const OccupationMeasure* a, const OccupationMeasure* b) {
                     return a->counts.size() < b->counts.size();
                   });
  return ptrs;
}

void validate(const std::vector<OccupationMeasure>& measures) {
  if (measures.empty()) throw std::invalid_argument("need at least one measure");
  for (const auto& m : measures) {
    if (m.n != measures[0].n) throw std::invalid_argument("mismatched horizons");
    if (m.d != measures[0].d) throw std::invalid_argument("mismatched dimensions");
  }
}

}  // namespace

int128 ipow128(int128 base, int exp) {
  int128 r = 1;
  while (exp > 0) {
    if (exp & 1) r = checked_mul(r, base);
    base = (exp > 1) ? checked_mul(base, base) : base;
    exp >>= 1;
  }
  return r;
}

OccupationMeasure occupation(const WalkModel& model, std::int64_t n,
                             RngStream& rng) {
  OccupationMeasure mu;
  mu.n = n;
  mu.d = model.d;
  std::int64_t pos[kMaxDim] = {0, 0, 0};
  std::int64_t step[kMaxDim];
  mu.counts.slot(pack_site(pos, model.d)) += 1;
  for (std::int64_t k = 1; k <= n; ++k) {
    model.sample_step(rng, step);
    for (int j = 0; j < model.d; ++j) pos[j] += step[j];
    mu.counts.slot(pack_site(pos, model.d)) += 1;
  }
  return mu;
}

OccupationMeasure occupation_of_path(const std::vector<std::int64_t>& positions,
                                     int d) {
  if (d < 1 || positions.size() % std::size_t(d) != 0 || positions.empty()) {
    throw std::invalid_argument("positions must be a nonempty (n+1) x d array");
  }
  OccupationMeasure mu;
  mu.d = d;
  mu.n = std::int64_t(positions.size() / std::size_t(d)) - 1;
  for (std::size_t k = 0; k + std::size_t(d) <= positions.size();
       k += std::size_t(d)) {
    mu.counts.slot(pack_site(&positions[k], d)) += 1;
  }
  return mu;
}

LocalTimeField local_time_field(const std::vector<OccupationMeasure>& measures) {
  validate(measures);
  const int d = measures[0].d;
  auto ptrs = sorted_by_support(measures);

  LocalTimeField field;
  field.n = measures[0].n;
  field.p = int(measures.size());
  field.d = d;

  SiteMap<std::int64_t> acc = ptrs[0]->counts;
  for (std::size_t j = 1; j < ptrs.size(); ++j) {
    acc = convolve(acc, ptrs[j]->counts, d);
  }
  field.values = std::move(acc);

  int128 l2 = 0;
  field.values.for_each([&](std::int64_t, std::int64_t v) {
    l2 = checked_add(l2, int128(v) * int128(v));
  });
  field.scalars.l0 = field.values.get(origin_key(d));
  field.scalars.l2sum = l2;
  field.scalars.lambda = lambda_from_l2(l2, field.n, field.p);
  return field;
}

int128 l0_from_measures(const std::vector<OccupationMeasure>& measures) {
  validate(measures);
  const int d = measures[0].d;
  auto ptrs = sorted_by_support(measures);
  if (ptrs.size() == 1) return ptrs[0]->counts.get(origin_key(d));

  // Convolve all but the largest measure, then pair with its negation.
  SiteMap<std::int64_t> acc = ptrs[0]->counts;
  for (std::size_t j = 1; j + 1 < ptrs.size(); ++j) {
    acc = convolve(acc, ptrs[j]->counts, d);
  }
  const SiteMap<std::int64_t>& last = ptrs.back()->counts;
  int128 total = 0;
  acc.for_each([&](std::int64_t x, std::int64_t c) {
    const std::int64_t m = last.get(neg_site(x, d));
    if (m != 0) total = checked_add(total, int128(c) * int128(m));
  });
  return total;
}

int128 l2_via_autocorrelation(const std::vector<OccupationMeasure>& measures) {
  validate(measures);
  const int d = measures[0].d;
  std::vector<SiteMap<std::int64_t>> nus;
  nus.reserve(measures.size());
  for (const auto& m : measures) nus.push_back(autocorrelation(m.counts, d));

  if (nus.size() == 1) return nus[0].get(origin_key(d));

  std::vector<const SiteMap<std::int64_t>*> ptrs;
  for (const auto& nu : nus) ptrs.push_back(&nu);
  std::stable_sort(ptrs.begin(), ptrs.end(),
                   [](const SiteMap<std::int64_t>* a, const SiteMap<std::int64_t>* b) {
                     return a->size() < b->size();
                   });

  if (ptrs.size() == 2) {
    // (nu1 * nu2)(0) = sum_z nu1(z) nu2(z) since autocorrelations are even.
    int128 total = 0;
    ptrs[0]->for_each([&](std::int64_t z, std::int64_t v1) {
      const std::int64_t v2 = ptrs[1]->get(z);
      if (v2 != 0) total = checked_add(total, int128(v1) * int128(v2));
    });
    return total;
  }

  SiteMap<std::int64_t> acc = *ptrs[0];
  for (std::size_t j = 1; j + 1 < ptrs.size(); ++j) {
    acc = convolve(acc, *ptrs[j], d);
  }
  const SiteMap<std::int64_t>& last = *ptrs.back();
  int128 total = 0;
  acc.for_each([&](std::int64_t z, std::int64_t v) {
    const std::int64_t w = last.get(neg_site(z, d));
    if (w != 0) total = checked_add(total, int128(v) * int128(w));
  });
  return total;
}

int128 lambda_from_l2(int128 l2sum, std::int64_t n, int p) {
  const int128 diag = ipow128(int128(n) + 1, p);
  const int128 num = l2sum - diag;
  if (num < 0 || (num & 1) != 0) {
    throw std::logic_error(
        "energy identity violated: sum l^2 - (n+1)^p must be an even "
        "nonnegative integer");
  }
  return num / 2;
}

FieldScalars field_scalars(const std::vector<OccupationMeasure>& measures) {
  FieldScalars s;
  s.l0 = l0_from_measures(measures);
  s.l2sum = l2_via_autocorrelation(measures);
  s.lambda = lambda_from_l2(s.l2sum, measures[0].n, int(measures.size()));
  return s;
}

OnlineLocalTime::OnlineLocalTime(const WalkModel& model) : model_(&model) {
  mu_.n = 0;
  mu_.d = model.d;
  mu_.counts.slot(origin_key(model.d)) += 1;  // S(0) = 0
}

void OnlineLocalTime::step(RngStream& rng) {
  std::int64_t step[kMaxDim];
  model_->sample_step(rng, step);
  for (int j = 0; j < model_->d; ++j) pos_[j] += step[j];
  std::int64_t& c = mu_.counts.slot(pack_site(pos_, model_->d));
  // Adding one visit to a site with c prior visits raises sum l^2 by
  // (c+1)^2 - c^2 = 2c + 1.
  l2sum_ += int128(2 * c + 1);
  c += 1;
  ++n_;
  mu_.n = n_;
}

MultiWalkField::MultiWalkField(const WalkModel& model, int p,
                               std::uint64_t master_seed, std::uint64_t replica)
    : model_(&model), p_(p) {
  if (p < 1 || p > 16) throw std::invalid_argument("p must be in 1..16");
  measures_.resize(std::size_t(p));
  pos_.resize(std::size_t(p));
  for (int j = 0; j < p; ++j) {
    measures_[std::size_t(j)].n = 0;
    measures_[std::size_t(j)].d = model.d;
    pos_[std::size_t(j)] = {0, 0, 0};
    measures_[std::size_t(j)].counts.slot(origin_key(model.d)) += 1;
    streams_.push_back(replica_stream(master_seed, StreamTag::kSteps, replica,
                                      std::uint64_t(j)));
  }
}

void MultiWalkField::advance_to(std::int64_t n) {
  if (n < n_) throw std::invalid_argument("cannot rewind a walk");
  std::int64_t step[kMaxDim];
  for (std::int64_t k = n_ + 1; k <= n; ++k) {
    for (int j = 0; j < p_; ++j) {
      auto& pos = pos_[std::size_t(j)];
      model_->sample_step(streams_[std::size_t(j)], step);
      for (int c = 0; c < model_->d; ++c) pos[std::size_t(c)] += step[c];
      measures_[std::size_t(j)].counts.slot(pack_site(pos.data(), model_->d)) += 1;
      measures_[std::size_t(j)].n = k;
    }
  }
  n_ = n;
}

FieldScalars MultiWalkField::scalars() const { return field_scalars(measures_); }

}  // namespace addwalk
