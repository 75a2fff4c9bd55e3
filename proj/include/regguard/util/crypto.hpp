// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "regguard/util/bytes.hpp"

namespace regguard {

inline Bytes32 sha256(std::span<const uint8_t> data) {
  Bytes32 out;
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha256(), nullptr) ||
      len != 32)
    throw std::runtime_error("sha256 failed");
  return out;
}

inline Bytes32 sha256(const std::vector<uint8_t>& data) {
  return sha256(std::span<const uint8_t>(data));
}

inline Bytes32 hmac_sha256(std::span<const uint8_t> key, std::span<const uint8_t> data) {
  Bytes32 out;
  unsigned int len = 0;
  if (!HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
            out.bytes.data(), &len) ||
      len != 32)
    throw std::runtime_error("hmac-sha256 failed");
  return out;
}

/// Authenticated encryption for transaction payloads: ChaCha20-Poly1305 with
/// a 32-byte key and 12-byte nonce; the 16-byte tag is appended to the
/// ciphertext.
namespace aead {

constexpr size_t kKeySize = 32;
constexpr size_t kNonceSize = 12;
constexpr size_t kTagSize = 16;

inline std::vector<uint8_t> seal(std::span<const uint8_t> key, std::span<const uint8_t> nonce,
                                 std::span<const uint8_t> aad, std::span<const uint8_t> plain) {
  if (key.size() != kKeySize || nonce.size() != kNonceSize)
    throw std::invalid_argument("aead::seal: bad key or nonce size");
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw std::runtime_error("aead: ctx alloc failed");
  std::vector<uint8_t> out(plain.size() + kTagSize);
  int len = 0;
  bool ok = EVP_EncryptInit_ex(ctx, EVP_chacha20_poly1305(), nullptr, key.data(), nonce.data()) &&
            (aad.empty() ||
             EVP_EncryptUpdate(ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size()))) &&
            EVP_EncryptUpdate(ctx, out.data(), &len, plain.data(), static_cast<int>(plain.size()));
  int total = len;
  ok = ok && EVP_EncryptFinal_ex(ctx, out.data() + total, &len);
  total += len;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_AEAD_GET_TAG, kTagSize, out.data() + total);
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) throw std::runtime_error("aead::seal failed");
  return out;
}

/// Returns the plaintext, or nullopt when authentication fails.
inline std::optional<std::vector<uint8_t>> open(std::span<const uint8_t> key,
                                                std::span<const uint8_t> nonce,
                                                std::span<const uint8_t> aad,
                                                std::span<const uint8_t> sealed) {
  if (key.size() != kKeySize || nonce.size() != kNonceSize || sealed.size() < kTagSize)
    return std::nullopt;
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw std::runtime_error("aead: ctx alloc failed");
  size_t ct_len = sealed.size() - kTagSize;
  std::vector<uint8_t> out(ct_len);
  std::vector<uint8_t> tag(sealed.begin() + ct_len, sealed.end());
  int len = 0;
  bool ok = EVP_DecryptInit_ex(ctx, EVP_chacha20_poly1305(), nullptr, key.data(), nonce.data()) &&
            (aad.empty() ||
             EVP_DecryptUpdate(ctx, nullptr, &len, aad.data(), static_cast<int>(aad.size()))) &&
            (ct_len == 0 ||
             EVP_DecryptUpdate(ctx, out.data(), &len, sealed.data(), static_cast<int>(ct_len))) &&
            EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_AEAD_SET_TAG, kTagSize, tag.data());
  int total = ct_len == 0 ? 0 : len;
  ok = ok && EVP_DecryptFinal_ex(ctx, out.data() + total, &len) > 0;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) return std::nullopt;
  return out;
}

}  // namespace aead
}  // namespace regguard
