#pragma once

#include <cstdint>

namespace skewwalk {

/// Reproducibility contract: the pair (master_seed, stream_id) pins the
/// whole random number stream, and distinct stream ids give streams that
/// are treated as independent. Stream derivation is explicit (a mix of the
/// master seed and the stream id), so parallel replication is reproducible
/// no matter how work is scheduled.
struct RngContract {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  RngContract derived(std::uint64_t offset) const {
    return RngContract{master_seed, stream_id + offset};
  }
};

/// SplitMix64 stream. The n-th output is mix(state0 + n*gamma), so the
/// generator is effectively counter based; state0 is derived from the
/// contract with two rounds of the same finalizer.
class SplitMix64 {
 public:
  explicit SplitMix64(const RngContract& c)
      : state_(mix(mix(c.master_seed ^ 0x6a09e667f3bcc909ULL) +
                   c.stream_id * 0x9e3779b97f4a7c15ULL)) {}

  SplitMix64(std::uint64_t master_seed, std::uint64_t stream_id)
      : SplitMix64(RngContract{master_seed, stream_id}) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// O(1) jump over n outputs; lets replicate r start exactly at its own
  /// block of the stream.
  void discard(std::uint64_t n) { state_ += n * 0x9e3779b97f4a7c15ULL; }

  /// Uniform double in [0,1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_double() < p; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace skewwalk
