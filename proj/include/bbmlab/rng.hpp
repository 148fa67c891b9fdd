#pragma once

/**
 * Counter-based random streams for reproducible parallel Monte Carlo.
 *
 * Every draw is a pure function of a 64-bit key and a draw index:
 *
 *   value_i = mix64(key + (i+1) * GOLDEN)
 *
 * where mix64 is the SplitMix64 finalizer. Keys for (master seed, replica,
 * lane) come from the documented chain in substream_key(), so replica i
 * produces the same numbers on any platform, in any language that can
 * reproduce three u64 multiply/xor/shift rounds, regardless of how work is
 * scheduled across threads.
 *
 * Lanes split one replica's randomness into independent streams so that
 * optional consumers (e.g. barrier Bernoulli marks) do not shift the draws
 * seen by the core samplers.
 */

#include <cmath>
#include <cstdint>

namespace bbmlab::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

enum class Lane : std::uint64_t {
  Tree = 0,     // lifetimes and offspring counts
  MotionX = 1,  // Gaussian increments of the driving motion
  MotionZ = 2,  // Gaussian increments of the auxiliary motion
  Barrier = 3,  // Bernoulli marks for bridge barrier crossings
};

// key(master, replica, lane) = mix(mix(mix(master ^ C0) ^ (replica+1)*G) ^ (lane+1)*C1)
[[nodiscard]] constexpr std::uint64_t substream_key(std::uint64_t master,
                                                    std::uint64_t replica,
                                                    std::uint64_t lane) noexcept {
  std::uint64_t k = mix64(master ^ 0x42BD5A69D7F15D41ull);
  k = mix64(k ^ ((replica + 1) * kGolden));
  k = mix64(k ^ ((lane + 1) * 0xC2B2AE3D27D4EB4Full));
  return k;
}

// Fresh 64-bit master seed for a nested simulation (e.g. the independent
// inner copies of the smoothing recursion), keyed by two indices.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master,
                                                  std::uint64_t a,
                                                  std::uint64_t b) noexcept {
  std::uint64_t k = mix64(master ^ 0x452821E638D01377ull);
  k = mix64(k ^ ((a + 1) * kGolden));
  k = mix64(k ^ ((b + 1) * 0xA24BAED4963EE407ull));
  return k;
}

class Stream {
 public:
  explicit Stream(std::uint64_t key) noexcept : state_(key) {}
  Stream(std::uint64_t master, std::uint64_t replica, Lane lane) noexcept
      : state_(substream_key(master, replica, static_cast<std::uint64_t>(lane))) {}

  std::uint64_t next_u64() noexcept {
    state_ += kGolden;
    return mix64(state_);
  }

  // Uniform on the open interval (0,1): 52 random bits plus a half-ulp
  // offset, so log() and log1p() below never see 0 or 1.
  double uniform01() noexcept {
    return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
  }

  // Exponential(1), strictly positive.
  double exponential() noexcept { return -std::log(uniform01()); }

  // Standard normal via Box-Muller; the companion variate is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    const double radius = std::sqrt(-2.0 * std::log(uniform01()));
    const double angle = kTwoPi * uniform01();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bbmlab::rng
