#pragma once

#include <cstdint>

namespace uwf {

/// SplitMix64: a counter-based generator with 64 bits of state.
///
/// state_{k+1} = state_k + 0x9E3779B97F4A7C15; output = mix(state_{k+1}) where mix is
/// the Stafford "variant 13" finalizer. Normals use Box-Muller on two 53-bit uniforms,
/// so every stream is reproducible bit-for-bit on any IEEE-754 platform with a correctly
/// rounded libm (log, sqrt, cos, sin).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi] (inclusive).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  /// Standard normal N(0, 1).
  double normal();

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent seed for sub-stream `stream` of `seed` (per-sample, per-epoch).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace uwf
