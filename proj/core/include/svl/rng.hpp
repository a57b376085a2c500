#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace svl {

// Counter-based generator: the SplitMix64 finalizer applied to a keyed Weyl
// sequence. State is (key, counter), so substreams derived from the same
// master seed never overlap and results do not depend on how work is split
// across threads. Distribution helpers are hand-rolled so that streams are
// identical across standard libraries and platforms.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(seed + 0x9e3779b97f4a7c15ULL * (stream + 1))), counter_(0) {}

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix(key_ ^ counter_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in {0, ..., bound-1}, unbiased (rejection on the top range).
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller; the paired value is cached.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Substream key for worker `index` under a master seed.
inline std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t index) {
  return CounterRng::mix(master_seed ^ CounterRng::mix(index + 0x51ed270b74a4a2ecULL));
}

}  // namespace svl
