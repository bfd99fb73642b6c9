#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bear {

// Normative sampling procedure. All randomness in this library (matrix
// generators, weight initialization, batch shuffling) comes from the streams
// defined in this header, so any two runs -- or any two implementations of the
// same contracts -- agree bit for bit given the same seed.
//
//   state seeding   splitmix64: starting from the user seed, repeatedly
//                   z = (s += 0x9E3779B97F4A7C15);
//                   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//                   z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//                   output z ^ (z >> 31). Four outputs form the xoshiro state.
//   generator       xoshiro256++ (Blackman & Vigna): output
//                   rotl(s0 + s3, 23) + s0 with the standard state transition.
//   uniform (0,1]   (x >> 11) * 2^-53, mapped to 2^-53 when the result is 0,
//                   so log() below is always finite.
//   uniform [0,1)   (x >> 11) * 2^-53.
//   normal          Box-Muller on two uniforms u1 in (0,1], u2 in [0,1):
//                   z0 = sqrt(-2 ln u1) cos(2 pi u2),
//                   z1 = sqrt(-2 ln u1) sin(2 pi u2);
//                   z0 is returned first, z1 cached for the next call.
//   sub-streams     derive_seed() folds tag words into a seed through
//                   splitmix64 steps; independent components (e.g. phase-grid
//                   cells) derive their stream from (master seed, tags...).

namespace detail {
constexpr std::uint64_t splitmix64_next(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = detail::splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; never returns 0 so it is safe under log().
  double uniform_pos() {
    const double u = uniform();
    return u > 0.0 ? u : 0x1.0p-53;
  }

  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  // Standard normal via Box-Muller, pairwise with caching.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    has_cached_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_[4]{};
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Deterministic sub-stream derivation: folds each tag into the seed through
// one splitmix64 step. derive_seed(s) == derive_seed(s, /*no tags*/) != s.
inline std::uint64_t derive_seed(std::uint64_t seed) {
  return detail::splitmix64_next(seed);
}

template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, Tags... rest) {
  std::uint64_t s = seed ^ (tag * 0xD1B54A32D192ED03ULL);
  return derive_seed(detail::splitmix64_next(s), rest...);
}

}  // namespace bear
