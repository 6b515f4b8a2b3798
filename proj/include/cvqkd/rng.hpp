#pragma once

#include <cmath>
#include <cstdint>

namespace cvqkd {

/// One splitmix64 step; used to expand seeds into engine state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Deterministically derive an unrelated seed from (seed, salt), so that two
/// samplers fed the same user seed still consume independent streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (0xD1B54A32D192ED03ull * (salt + 1));
  return splitmix64(s);
}

/// xoshiro256++ with splitmix64 seeding and jump()-separated substreams.
/// Output is bit-reproducible for a fixed (seed, stream) on any platform.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = splitmix64(sm);
    for (std::uint64_t i = 0; i < stream; ++i) jump();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Advance 2^128 steps; consecutive jumps give non-overlapping substreams.
  void jump() {
    static constexpr std::uint64_t kJump[] = {
        0x180ec6d33cfd0abaull, 0xd5a61266f0c9392cull,
        0xa9582618e03fc9aaull, 0x39abdc4529b1661cull};
    std::uint64_t s0 = 0, s1 = 0, s2 = 0, s3 = 0;
    for (const std::uint64_t word : kJump) {
      for (int b = 0; b < 64; ++b) {
        if (word & (1ull << b)) {
          s0 ^= state_[0];
          s1 ^= state_[1];
          s2 ^= state_[2];
          s3 ^= state_[3];
        }
        next();
      }
    }
    state_[0] = s0;
    state_[1] = s1;
    state_[2] = s2;
    state_[3] = s3;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

/// Standard-normal draws via the Marsaglia polar method. No trig calls, so
/// the sequence depends only on the uniform stream and sqrt/log rounding.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed, std::uint64_t stream = 0)
      : rng_(seed, stream) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * rng_.uniform01() - 1.0;
      v = 2.0 * rng_.uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  /// N(0, stddev^2) draw. stddev = 0 consumes a draw and returns exactly 0,
  /// keeping streams aligned across parameter choices.
  double next(double stddev) { return stddev * next(); }

 private:
  Xoshiro256pp rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cvqkd
