// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "regguard/ordering/threshold.hpp"
#include "regguard/util/bytes.hpp"
#include "regguard/util/crypto.hpp"

namespace regguard::ordering {

/// Ciphertext payloads are padded to this granularity so length reveals at
/// most a coarse size bucket.
constexpr size_t kPadBlock = 256;

/// A transaction sealed for fair ordering: hybrid ElGamal + AEAD over the
/// wire bytes, plus the content digest the ordering layer commits to. The
/// digest binds ciphertext to plaintext: after decryption the bytes must
/// hash back to it.
struct EncryptedTx {
  Bytes32 link_hash;  // sha256 of the enclosed transaction bytes
  cpp_int c1, c2;     // ElGamal component pair
  std::vector<uint8_t> payload;  // AEAD-sealed, padded transaction

  std::vector<uint8_t> to_bytes(const PrimeGroup& grp) const {
    ByteWriter w;
    w.raw(link_hash);
    w.raw(grp.to_bytes(c1));
    w.raw(grp.to_bytes(c2));
    w.blob(payload);
    return w.take();
  }

  static EncryptedTx from_bytes(std::span<const uint8_t> data) {
    ByteReader r(data);
    EncryptedTx e;
    e.link_hash = r.bytes32();
    e.c1 = PrimeGroup::from_bytes(r.bytes32());
    e.c2 = PrimeGroup::from_bytes(r.bytes32());
    e.payload = r.blob();
    if (!r.done()) throw std::runtime_error("EncryptedTx::from_bytes: trailing bytes");
    return e;
  }
};

namespace encdetail {

inline std::array<uint8_t, aead::kNonceSize> nonce_for(const PrimeGroup& grp, const cpp_int& c1,
                                                       const cpp_int& c2) {
  ByteWriter w;
  w.raw(grp.to_bytes(c1));
  w.raw(grp.to_bytes(c2));
  Bytes32 h = sha256(w.bytes());
  std::array<uint8_t, aead::kNonceSize> nonce{};
  std::copy_n(h.bytes.begin(), nonce.size(), nonce.begin());
  return nonce;
}

inline std::array<uint8_t, 32> kem_key(const PrimeGroup& grp, const cpp_int& m) {
  Bytes32 ser = grp.to_bytes(m);
  return sha256(std::span<const uint8_t>(ser.bytes)).bytes;
}

}  // namespace encdetail

/// Seals transaction bytes under the window public key. The KEM secret is a
/// random subgroup element; its hash keys the payload cipher.
inline EncryptedTx encrypt_tx(const PrimeGroup& grp, const cpp_int& window_pk,
                              std::span<const uint8_t> tx_bytes, Rng& rng) {
  EncryptedTx out;
  out.link_hash = sha256(tx_bytes);

  cpp_int m = grp.random_element(rng);
  auto eg = elgamal_encrypt(grp, window_pk, m, rng);
  out.c1 = eg.c1;
  out.c2 = eg.c2;

  ByteWriter padded;
  padded.u32be(static_cast<uint32_t>(tx_bytes.size()));
  padded.raw(tx_bytes);
  size_t rem = padded.bytes().size() % kPadBlock;
  if (rem != 0)
    for (size_t i = rem; i < kPadBlock; ++i) padded.u8(0);

  auto key = encdetail::kem_key(grp, m);
  auto nonce = encdetail::nonce_for(grp, out.c1, out.c2);
  out.payload = aead::seal(std::span<const uint8_t>(key), std::span<const uint8_t>(nonce),
                           std::span(out.link_hash.bytes), padded.bytes());
  return out;
}

enum class DecryptStatus : uint8_t {
  Ok,
  NotGroupElement,   // a ciphertext component is outside the subgroup
  AuthFailed,        // AEAD rejected the payload
  MalformedPayload,  // padding or length structure broken
  LinkMismatch,      // plaintext does not hash to the committed digest
};

inline const char* to_string(DecryptStatus s) {
  switch (s) {
    case DecryptStatus::Ok: return "ok";
    case DecryptStatus::NotGroupElement: return "not_group_element";
    case DecryptStatus::AuthFailed: return "auth_failed";
    case DecryptStatus::MalformedPayload: return "malformed_payload";
    case DecryptStatus::LinkMismatch: return "link_mismatch";
  }
  return "?";
}

struct DecryptResult {
  DecryptStatus status = DecryptStatus::Ok;
  std::vector<uint8_t> tx_bytes;

  bool ok() const { return status == DecryptStatus::Ok; }
};

/// Opens a sealed transaction given the combined threshold value c1^s.
inline DecryptResult decrypt_tx(const PrimeGroup& grp, const EncryptedTx& enc,
                                const cpp_int& c1_to_s) {
  DecryptResult res;
  if (!grp.is_element(enc.c1) || !grp.is_element(enc.c2) || !grp.is_element(c1_to_s)) {
    res.status = DecryptStatus::NotGroupElement;
    return res;
  }
  cpp_int m = elgamal_open(grp, {enc.c1, enc.c2}, c1_to_s);
  auto key = encdetail::kem_key(grp, m);
  auto nonce = encdetail::nonce_for(grp, enc.c1, enc.c2);
  auto plain = aead::open(std::span<const uint8_t>(key), std::span<const uint8_t>(nonce),
                          std::span(enc.link_hash.bytes), enc.payload);
  if (!plain) {
    res.status = DecryptStatus::AuthFailed;
    return res;
  }
  if (plain->size() < 4 || plain->size() % kPadBlock != 0) {
    res.status = DecryptStatus::MalformedPayload;
    return res;
  }
  ByteReader r(*plain);
  uint32_t len = r.u32be();
  if (len > r.remaining()) {
    res.status = DecryptStatus::MalformedPayload;
    return res;
  }
  res.tx_bytes.assign(plain->begin() + 4, plain->begin() + 4 + len);
  if (sha256(res.tx_bytes) != enc.link_hash) {
    res.status = DecryptStatus::LinkMismatch;
    res.tx_bytes.clear();
    return res;
  }
  return res;
}

/// Threshold path: combine at least t partial decryptions, then open.
inline DecryptResult threshold_decrypt(const PrimeGroup& grp, const EncryptedTx& enc,
                                       std::span<const PartialDecryption> parts) {
  return decrypt_tx(grp, enc, combine_partials(grp, parts));
}

}  // namespace regguard::ordering
