#pragma once

#include <cstdint>

namespace salab {

// Counter-based random streams. Every draw is a pure function of
// (seed, step, channel), so trajectories are reproducible regardless of
// evaluation order and independent consumers (noise, auxiliary draws)
// cannot desynchronize each other.
namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// One 64-bit word for (seed, step, channel). Channels keep independent
// per-step substreams (0 = noise, 1 = auxiliary, 2 = second noise draw).
inline std::uint64_t counter_u64(std::uint64_t seed, std::uint64_t step,
                                 std::uint32_t channel = 0) {
  const std::uint64_t key = mix64(seed ^ 0x6a09e667f3bcc908ULL);
  const std::uint64_t ctr = step * 8u + channel;
  return mix64(key + ctr * 0x9e3779b97f4a7c15ULL);
}

// Uniform on the open interval (0,1); never returns an endpoint, so it is
// safe to feed into inverse CDFs.
inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline double counter_u01(std::uint64_t seed, std::uint64_t step,
                          std::uint32_t channel = 0) {
  return to_unit_open(counter_u64(seed, step, channel));
}

// Standard normal quantile, Wichura's AS 241 (PPND16) rational
// approximation. Absolute error below 1e-15 on (0,1); pure arithmetic,
// so results do not depend on platform RNG internals.
double norm_inv_cdf(double p);

inline double counter_gaussian(std::uint64_t seed, std::uint64_t step,
                               std::uint32_t channel = 0) {
  return norm_inv_cdf(counter_u01(seed, step, channel));
}

// Small sequential generator for test/selftest data. Fixed algorithm
// (splitmix64) so suites behave identically everywhere.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  double next_u01() { return to_unit_open(next_u64()); }

  // Uniform on [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_u01(); }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

}  // namespace rng
}  // namespace salab
