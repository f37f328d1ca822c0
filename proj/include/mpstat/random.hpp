/*
 * Copyright 2026 The mpstat Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

// Portable randomness. Every distribution here is computed from raw 64-bit
// words so that transcripts are reproducible across standard libraries.

namespace mpstat {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Keyed pseudo-random function on up to three 64-bit words.
inline constexpr std::uint64_t prf(std::uint64_t key, std::uint64_t a,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(key ^ 0x243F6A8885A308D3ULL);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ (b + 0x13198A2E03707344ULL));
  h = splitmix64(h ^ (c + 0xA4093822299F31D0ULL));
  return h;
}

// Uniform double in [0, 1) from the top 53 bits of a word.
inline constexpr double to_unit(std::uint64_t w) {
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1].
inline constexpr double to_unit_open0(std::uint64_t w) {
  return (static_cast<double>(w >> 11) + 1.0) * 0x1.0p-53;
}

// xoshiro256** seeded through splitmix64.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += 0x9E3779B97F4A7C15ULL;
      s = splitmix64(x);
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next(); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  double uniform() { return to_unit(next()); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    // Rejection on the top of the range keeps the draw exactly uniform.
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t w = next();
    while (w >= limit) w = next();
    return w % bound;
  }

  bool bernoulli(double p) {
    if (p >= 1.0) return true;
    if (p <= 0.0) return false;
    return uniform() < p;
  }

  double exponential() { return -std::log(to_unit_open0(next())); }

  // Exact Binomial(trials, p) by geometric skipping over the rarer outcome;
  // expected cost O(trials * min(p, 1 - p) + 1).
  std::int64_t binomial(std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    if (p > 0.5) return trials - binomial(trials, 1.0 - p);
    if (trials <= 32) {
      std::int64_t k = 0;
      for (std::int64_t t = 0; t < trials; ++t) k += uniform() < p ? 1 : 0;
      return k;
    }
    const double log_q = std::log1p(-p);
    std::int64_t successes = 0;
    std::int64_t position = 0;
    while (true) {
      const double gap = std::floor(std::log(to_unit_open0(next())) / log_q);
      if (gap >= static_cast<double>(trials - position)) break;
      position += static_cast<std::int64_t>(gap) + 1;
      ++successes;
      if (position >= trials) break;
    }
    return successes;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace mpstat
