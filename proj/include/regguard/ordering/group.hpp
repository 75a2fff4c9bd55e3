// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

#include "regguard/util/bytes.hpp"
#include "regguard/util/rng.hpp"

namespace regguard::ordering {

using boost::multiprecision::cpp_int;

/// Schnorr group: the order-q subgroup of quadratic residues mod a safe
/// prime p = 2q + 1, generated by g. Elements travel as 32-byte big-endian
/// words. Groups small enough for native words run all arithmetic on
/// uint64_t with 128-bit intermediates; the wide path uses cpp_int.
class PrimeGroup {
 public:
  PrimeGroup(cpp_int p, cpp_int q, cpp_int g)
      : p_(std::move(p)), q_(std::move(q)), g_(std::move(g)) {
    if (p_ != 2 * q_ + 1) throw std::invalid_argument("PrimeGroup: p != 2q + 1");
    fits_u64_ = p_ < (cpp_int(1) << 63);
    if (fits_u64_) {
      pu_ = static_cast<uint64_t>(p_);
      qu_ = static_cast<uint64_t>(q_);
      gu_ = static_cast<uint64_t>(g_);
    }
  }

  /// 256-bit production-size group.
  static const PrimeGroup& bits256() {
    static const PrimeGroup grp(
        cpp_int("0xcda5eba917426fe7b6b9233f9fa00df9b1258c097bea4540e1fefd431a0f0783"),
        cpp_int("0x66d2f5d48ba137f3db5c919fcfd006fcd892c604bdf522a070ff7ea18d0783c1"),
        cpp_int(4));
    return grp;
  }

  /// 62-bit group on the native-word path; the default for large
  /// simulations where per-window key generation dominates.
  static const PrimeGroup& bits62() {
    static const PrimeGroup grp(cpp_int("0x3fd27c3525e96fa7"), cpp_int("0x1fe93e1a92f4b7d3"),
                                cpp_int(4));
    return grp;
  }

  /// 17-bit toy group, small enough to enumerate the whole scalar field in
  /// secrecy tests.
  static const PrimeGroup& toy() {
    static const PrimeGroup grp(cpp_int(125639), cpp_int(62819), cpp_int(4));
    return grp;
  }

  static const PrimeGroup& by_name(const std::string& name) {
    if (name == "bits256") return bits256();
    if (name == "bits62") return bits62();
    if (name == "toy") return toy();
    throw std::invalid_argument("unknown group '" + name + "'");
  }

  const cpp_int& p() const { return p_; }
  const cpp_int& q() const { return q_; }
  const cpp_int& g() const { return g_; }
  bool native_words() const { return fits_u64_; }

  // Group operations mod p.
  cpp_int mul(const cpp_int& a, const cpp_int& b) const {
    if (fits_u64_)
      return cpp_int(mulmod(static_cast<uint64_t>(a), static_cast<uint64_t>(b), pu_));
    return a * b % p_;
  }

  cpp_int pow(const cpp_int& base, const cpp_int& e) const {
    if (fits_u64_)
      return cpp_int(powmod(static_cast<uint64_t>(base), static_cast<uint64_t>(e % q_), pu_));
    return boost::multiprecision::powm(base, e, p_);
  }

  cpp_int pow_g(const cpp_int& e) const { return pow(g_, e); }

  /// Multiplicative inverse mod p via Fermat (p prime).
  cpp_int inv(const cpp_int& a) const {
    if (fits_u64_) return cpp_int(powmod(static_cast<uint64_t>(a), pu_ - 2, pu_));
    return boost::multiprecision::powm(a, p_ - 2, p_);
  }

  // Scalar field operations mod q.
  cpp_int sc_add(const cpp_int& a, const cpp_int& b) const { return (a + b) % q_; }
  cpp_int sc_sub(const cpp_int& a, const cpp_int& b) const { return ((a - b) % q_ + q_) % q_; }
  cpp_int sc_mul(const cpp_int& a, const cpp_int& b) const {
    if (fits_u64_)
      return cpp_int(mulmod(static_cast<uint64_t>(a), static_cast<uint64_t>(b), qu_));
    return a * b % q_;
  }
  cpp_int sc_inv(const cpp_int& a) const {
    if (a % q_ == 0) throw std::invalid_argument("sc_inv of zero");
    if (fits_u64_) return cpp_int(powmod(static_cast<uint64_t>(a % q_), qu_ - 2, qu_));
    return boost::multiprecision::powm(a % q_, q_ - 2, q_);
  }

  bool is_element(const cpp_int& a) const {
    if (a <= 0 || a >= p_) return false;
    // pow() reduces exponents mod q, which only holds for subgroup members;
    // candidates here may have order 2, so exponentiate with q itself.
    if (fits_u64_) return powmod(static_cast<uint64_t>(a), qu_, pu_) == 1;
    return boost::multiprecision::powm(a, q_, p_) == 1;
  }

  /// Uniform scalar in [0, q) by rejection, so there is no modular bias.
  cpp_int random_scalar(Rng& rng) const {
    if (fits_u64_) return cpp_int(rng.uniform_u64(qu_));
    while (true) {
      uint8_t buf[32];
      rng.fill_bytes(buf, sizeof(buf));
      cpp_int v = from_bytes(std::span<const uint8_t>(buf, sizeof(buf)));
      if (v < q_) return v;
    }
  }

  /// Uniform element of the subgroup (never the identity).
  cpp_int random_element(Rng& rng) const {
    while (true) {
      cpp_int r = random_scalar(rng);
      if (r != 0) return pow_g(r);
    }
  }

  Bytes32 to_bytes(const cpp_int& a) const {
    Bytes32 out;
    cpp_int v = a;
    for (int i = 31; i >= 0; --i) {
      out.bytes[i] = static_cast<uint8_t>(v & 0xff);
      v >>= 8;
    }
    if (v != 0) throw std::invalid_argument("group element exceeds 32 bytes");
    return out;
  }

  static cpp_int from_bytes(std::span<const uint8_t> data) {
    cpp_int v = 0;
    for (uint8_t b : data) v = (v << 8) | b;
    return v;
  }

  static cpp_int from_bytes(const Bytes32& b) { return from_bytes(std::span(b.bytes)); }

 private:
  static uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>(static_cast<unsigned __int128>(a) * b % m);
  }
  static uint64_t powmod(uint64_t base, uint64_t e, uint64_t m) {
    uint64_t acc = 1;
    uint64_t b = base % m;
    while (e) {
      if (e & 1) acc = mulmod(acc, b, m);
      b = mulmod(b, b, m);
      e >>= 1;
    }
    return acc;
  }

  cpp_int p_, q_, g_;
  bool fits_u64_ = false;
  uint64_t pu_ = 0, qu_ = 0, gu_ = 0;
};

}  // namespace regguard::ordering
