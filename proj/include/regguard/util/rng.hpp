// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace regguard {

/// Derives an independent seed for a named concern from a master seed, so
/// adding randomness to one part of the simulator never perturbs another and
/// the same workload can be replayed under different pipeline configurations.
inline uint64_t derive_seed(uint64_t master, std::string_view tag) {
  uint64_t h = 1469598103934665603ull;
  for (char c : tag) h = (h ^ static_cast<uint8_t>(c)) * 1099511628211ull;
  uint64_t z = master ^ h;
  // splitmix64 finalizer.
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Deterministic random stream. Samplers are hand-rolled on top of the
/// mt19937_64 word stream because the std:: distribution algorithms are
/// implementation-defined and the reports must be byte-identical everywhere.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  Rng(uint64_t master, std::string_view tag) : eng_(derive_seed(master, tag)) {}

  uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, n). Rejection-sampled so every value is equally likely.
  uint64_t uniform_u64(uint64_t n) {
    if (n == 0) return 0;
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t v;
    do {
      v = eng_();
    } while (v >= limit);
    return v % n;
  }

  /// Uniform in [lo, hi] inclusive.
  int64_t uniform_i64(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(uniform_u64(static_cast<uint64_t>(hi - lo) + 1));
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return uniform01() < p; }

  /// Exponential with the given rate (events per unit).
  double exponential(double rate) {
    double u = uniform01();
    return -std::log1p(-u) / rate;
  }

  /// Knuth's product method; our means are small (arrival counts per tick).
  uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    double limit = std::exp(-mean);
    double prod = uniform01();
    uint64_t k = 0;
    while (prod > limit) {
      prod *= uniform01();
      ++k;
    }
    return k;
  }

  /// Standard normal via Box-Muller (both values used).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_u64(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Fills a buffer with pseudo-random bytes (keys, nonces in simulation).
  void fill_bytes(uint8_t* out, size_t n) {
    size_t i = 0;
    uint64_t w = 0;
    for (size_t i_in_word = 8; i < n; ++i, ++i_in_word) {
      if (i_in_word == 8) {
        w = eng_();
        i_in_word = 0;
      }
      out[i] = static_cast<uint8_t>(w >> (8 * (7 - i_in_word)));
    }
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace regguard
