// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "regguard/ordering/group.hpp"

namespace regguard::ordering {

/// One point of a polynomial secret sharing: (x, f(x)) with x >= 1.
struct Share {
  uint32_t x = 0;
  cpp_int y;
};

/// Splits `secret` into n shares with threshold t over Z_q: a random
/// degree t-1 polynomial with f(0) = secret, evaluated at x = 1..n.
inline std::vector<Share> shamir_split(const cpp_int& secret, uint32_t t, uint32_t n,
                                       const PrimeGroup& grp, Rng& rng) {
  if (t == 0 || t > n) throw std::invalid_argument("shamir_split: need 1 <= t <= n");
  std::vector<cpp_int> coeff(t);
  coeff[0] = secret % grp.q();
  for (uint32_t i = 1; i < t; ++i) coeff[i] = grp.random_scalar(rng);
  std::vector<Share> shares(n);
  for (uint32_t i = 1; i <= n; ++i) {
    // Horner evaluation at x = i.
    cpp_int acc = 0;
    for (size_t k = coeff.size(); k-- > 0;) acc = grp.sc_add(grp.sc_mul(acc, cpp_int(i)), coeff[k]);
    shares[i - 1] = {i, acc};
  }
  return shares;
}

/// Lagrange coefficients at zero for the given evaluation points:
/// lambda_i = prod_{j != i} x_j / (x_j - x_i) mod q. Any t distinct points
/// reconstruct f(0) as sum lambda_i * y_i.
inline std::vector<cpp_int> lagrange_at_zero(std::span<const uint32_t> xs, const PrimeGroup& grp) {
  std::vector<cpp_int> lambda(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) {
    cpp_int num = 1, den = 1;
    for (size_t j = 0; j < xs.size(); ++j) {
      if (j == i) continue;
      if (xs[j] == xs[i]) throw std::invalid_argument("lagrange_at_zero: duplicate point");
      num = grp.sc_mul(num, cpp_int(xs[j]));
      cpp_int diff = grp.sc_sub(cpp_int(xs[j]), cpp_int(xs[i]));
      den = grp.sc_mul(den, diff);
    }
    lambda[i] = grp.sc_mul(num, grp.sc_inv(den));
  }
  return lambda;
}

/// Recovers the secret from any t or more distinct shares.
inline cpp_int shamir_combine(std::span<const Share> shares, const PrimeGroup& grp) {
  if (shares.empty()) throw std::invalid_argument("shamir_combine: no shares");
  std::vector<uint32_t> xs(shares.size());
  for (size_t i = 0; i < shares.size(); ++i) xs[i] = shares[i].x;
  auto lambda = lagrange_at_zero(xs, grp);
  cpp_int acc = 0;
  for (size_t i = 0; i < shares.size(); ++i)
    acc = grp.sc_add(acc, grp.sc_mul(lambda[i], shares[i].y));
  return acc;
}

}  // namespace regguard::ordering
