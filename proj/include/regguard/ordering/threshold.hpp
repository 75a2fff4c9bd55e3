// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "regguard/ordering/shamir.hpp"

namespace regguard::ordering {

struct CommitteeConfig {
  uint32_t n = 10;  // members
  uint32_t t = 6;   // decryption threshold
};

/// Key material for one batching window: the public encryption key and each
/// member's share of the decryption exponent. Produced fresh per window so
/// a compromised old share never opens new traffic.
struct WindowKeys {
  cpp_int public_key;  // y = g^s
  std::vector<Share> shares;
  uint32_t threshold = 0;
};

/// Trusted-dealer key generation: sample s, share it, publish y = g^s. The
/// dealer role stands in for an interactive DKG; the share/combine algebra
/// downstream is identical.
inline WindowKeys dkg(const PrimeGroup& grp, const CommitteeConfig& cfg, Rng& rng) {
  if (cfg.t == 0 || cfg.t > cfg.n) throw std::invalid_argument("dkg: need 1 <= t <= n");
  cpp_int s = grp.random_scalar(rng);
  WindowKeys keys;
  keys.public_key = grp.pow_g(s);
  keys.shares = shamir_split(s, cfg.t, cfg.n, grp, rng);
  keys.threshold = cfg.t;
  return keys;
}

/// Member i's contribution to decrypting a ciphertext with first component
/// c1: d_i = c1^{s_i}.
struct PartialDecryption {
  uint32_t x = 0;
  cpp_int value;
};

inline PartialDecryption partial_decrypt(const PrimeGroup& grp, const Share& share,
                                         const cpp_int& c1) {
  return {share.x, grp.pow(c1, share.y)};
}

/// Combines t partial decryptions into c1^s by Lagrange interpolation in
/// the exponent.
inline cpp_int combine_partials(const PrimeGroup& grp,
                                std::span<const PartialDecryption> parts) {
  if (parts.empty()) throw std::invalid_argument("combine_partials: no shares");
  std::vector<uint32_t> xs(parts.size());
  for (size_t i = 0; i < parts.size(); ++i) xs[i] = parts[i].x;
  auto lambda = lagrange_at_zero(xs, grp);
  cpp_int acc = 1;
  for (size_t i = 0; i < parts.size(); ++i)
    acc = grp.mul(acc, grp.pow(parts[i].value, lambda[i]));
  return acc;
}

/// ElGamal encryption of a subgroup element m under public key y.
struct ElGamalCiphertext {
  cpp_int c1;  // g^a
  cpp_int c2;  // m * y^a
};

inline ElGamalCiphertext elgamal_encrypt(const PrimeGroup& grp, const cpp_int& y,
                                         const cpp_int& m, Rng& rng) {
  cpp_int a = grp.random_scalar(rng);
  while (a == 0) a = grp.random_scalar(rng);
  return {grp.pow_g(a), grp.mul(m, grp.pow(y, a))};
}

/// Opens a ciphertext given the combined c1^s value.
inline cpp_int elgamal_open(const PrimeGroup& grp, const ElGamalCiphertext& ct,
                            const cpp_int& c1_to_s) {
  return grp.mul(ct.c2, grp.inv(c1_to_s));
}

}  // namespace regguard::ordering
