#pragma once

#include <cstdint>
#include <vector>

namespace dodreg {

/// Counter-seeded random stream built on the splitmix64 finalizer.
///
/// A stream is identified by (seed, stream_id). Distinct ids yield
/// statistically independent sequences, so per-observation substreams can be
/// drawn in any order (or in parallel) without changing the realized values.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0)
      : state_(mix(mix(seed ^ UINT64_C(0x7b1dcdaf13f0ac9b)) +
                   (stream_id + 1) * UINT64_C(0x9e3779b97f4a7c15))) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += UINT64_C(0x9e3779b97f4a7c15));
    z = (z ^ (z >> 30)) * UINT64_C(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94d049bb133111eb);
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in {lo, ..., hi} inclusive.
  long uniform_int(long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(next_u64() % span);
  }

  /// Deterministically derived seed for a child generator.
  std::uint64_t derive_seed() { return next_u64(); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * UINT64_C(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94d049bb133111eb);
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace dodreg
