// Counter-based splittable random streams.
//
// Every stochastic object in the library (path replica, weight sequence,
// sign sequence, ...) draws from an RngStream identified by
// (master_seed, stream, substream). Streams are derived by hashing the
// identifiers, not by jumping a shared sequence, so any worker may own any
// replica and the results are independent of scheduling order.
#pragma once

#include <cmath>
#include <cstdint>

namespace addwalk {

// 64-bit finalizer (bijective avalanche mix).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream,
            std::uint64_t substream = 0) noexcept {
    constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t h = mix64(master_seed + kGolden);
    h = mix64(h ^ (kGolden * (stream + 1)));
    h = mix64(h ^ (kGolden * (substream + 1)));
    state_ = h;
    // Per-stream odd increment decorrelates streams whose states collide.
    gamma_ = mix64(h ^ 0x6a09e667f3bcc909ULL) | 1ULL;
  }

  std::uint64_t next_u64() noexcept {
    state_ += gamma_;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), unbiased (rejection of the short cycle).
  std::uint64_t next_below(std::uint64_t n) noexcept {
    const std::uint64_t threshold = (-n) % n;  // 2^64 mod n
    std::uint64_t r = next_u64();
    while (r < threshold) r = next_u64();
    return r % n;
  }

  // Unit-mean exponential via inverse CDF; log1p keeps small values exact.
  double next_exponential() noexcept { return -std::log1p(-next_unit()); }

  // Symmetric sign in {-1, +1}.
  int next_sign() noexcept {
    return (next_u64() & 1ULL) ? 1 : -1;
  }

 private:
  std::uint64_t state_;
  std::uint64_t gamma_;
};

// Purpose tags keep the independent random inputs of one replica (steps,
// exponential weights, signs) on disjoint streams.
enum class StreamTag : std::uint64_t {
  kSteps = 1,
  kWeights = 2,
  kSigns = 3,
};

// Stream for lane `lane` (e.g. walk index) of a replica. Lanes are packed
// into the substream id; 64 lanes per replica is far above any p used here.
inline RngStream replica_stream(std::uint64_t master_seed, StreamTag tag,
                                std::uint64_t replica, std::uint64_t lane = 0) {
  return RngStream(master_seed, static_cast<std::uint64_t>(tag),
                   replica * 64 + lane);
}

}  // namespace addwalk
