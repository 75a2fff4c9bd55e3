// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace regguard {

/// Opaque 20-byte account/contract identifier. Comparable for ordering so it
/// can key std:: containers; the rule language itself only exposes = / !=.
struct Address {
  std::array<uint8_t, 20> bytes{};

  auto operator<=>(const Address&) const = default;
  bool is_zero() const {
    for (auto b : bytes)
      if (b != 0) return false;
    return true;
  }
};

/// 32-byte word, the unit of L1 storage and of hash digests.
struct Bytes32 {
  std::array<uint8_t, 32> bytes{};

  auto operator<=>(const Bytes32&) const = default;
};

namespace hexdetail {
inline int nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}
}  // namespace hexdetail

inline std::string to_hex(std::span<const uint8_t> data) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (uint8_t b : data) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

inline std::optional<std::vector<uint8_t>> from_hex(std::string_view s) {
  if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) s.remove_prefix(2);
  if (s.size() % 2 != 0) return std::nullopt;
  std::vector<uint8_t> out(s.size() / 2);
  for (size_t i = 0; i < out.size(); ++i) {
    int hi = hexdetail::nibble(s[2 * i]);
    int lo = hexdetail::nibble(s[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out[i] = static_cast<uint8_t>(hi << 4 | lo);
  }
  return out;
}

inline std::string to_hex(const Address& a) { return "0x" + to_hex(std::span(a.bytes)); }
inline std::string to_hex(const Bytes32& b) { return "0x" + to_hex(std::span(b.bytes)); }

inline std::optional<Address> address_from_hex(std::string_view s) {
  auto raw = from_hex(s);
  if (!raw || raw->size() != 20) return std::nullopt;
  Address a;
  std::memcpy(a.bytes.data(), raw->data(), 20);
  return a;
}

inline std::optional<Bytes32> bytes32_from_hex(std::string_view s) {
  auto raw = from_hex(s);
  if (!raw || raw->size() != 32) return std::nullopt;
  Bytes32 b;
  std::memcpy(b.bytes.data(), raw->data(), 32);
  return b;
}

/// L1 slot values are big-endian unsigned words (EVM convention); only the
/// low 64 bits participate in simulator arithmetic.
inline Bytes32 bytes32_from_u64(uint64_t v) {
  Bytes32 b;
  for (int i = 0; i < 8; ++i) b.bytes[31 - i] = static_cast<uint8_t>(v >> (8 * i));
  return b;
}

inline uint64_t u64_from_bytes32(const Bytes32& b) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b.bytes[31 - i]) << (8 * i);
  return v;
}

/// Slot key holding an address in the final 20 bytes (per-account slots).
inline Bytes32 bytes32_from_address(const Address& a) {
  Bytes32 b;
  std::memcpy(b.bytes.data() + 12, a.bytes.data(), 20);
  return b;
}

inline Address address_from_u64(uint64_t v) {
  Address a;
  for (int i = 0; i < 8; ++i) a.bytes[19 - i] = static_cast<uint8_t>(v >> (8 * i));
  return a;
}

/// Append-only byte sink for the canonical serializations. All integers are
/// big-endian fixed width.
class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }
  void u32be(uint32_t v) {
    for (int i = 3; i >= 0; --i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u64be(uint64_t v) {
    for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void i64be(int64_t v) { u64be(static_cast<uint64_t>(v)); }
  void raw(std::span<const uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
  void raw(const Address& a) { raw(std::span(a.bytes)); }
  void raw(const Bytes32& b) { raw(std::span(b.bytes)); }
  /// u32 length prefix followed by the bytes.
  void blob(std::span<const uint8_t> data) {
    u32be(static_cast<uint32_t>(data.size()));
    raw(data);
  }
  void str(std::string_view s) {
    u32be(static_cast<uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }

  const std::vector<uint8_t>& bytes() const { return buf_; }
  std::vector<uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<uint8_t> buf_;
};

/// Bounds-checked reader over a canonical serialization.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() { return take(1)[0]; }
  uint32_t u32be() {
    auto s = take(4);
    uint32_t v = 0;
    for (auto b : s) v = v << 8 | b;
    return v;
  }
  uint64_t u64be() {
    auto s = take(8);
    uint64_t v = 0;
    for (auto b : s) v = v << 8 | b;
    return v;
  }
  int64_t i64be() { return static_cast<int64_t>(u64be()); }
  Address address() {
    Address a;
    auto s = take(20);
    std::memcpy(a.bytes.data(), s.data(), 20);
    return a;
  }
  Bytes32 bytes32() {
    Bytes32 b;
    auto s = take(32);
    std::memcpy(b.bytes.data(), s.data(), 32);
    return b;
  }
  std::vector<uint8_t> blob() {
    uint32_t n = u32be();
    auto s = take(n);
    return {s.begin(), s.end()};
  }
  std::string str() {
    uint32_t n = u32be();
    auto s = take(n);
    return {reinterpret_cast<const char*>(s.data()), s.size()};
  }
  bool done() const { return pos_ == data_.size(); }
  size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const uint8_t> take(size_t n) {
    if (data_.size() - pos_ < n) throw std::out_of_range("ByteReader: truncated input");
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace regguard

template <>
struct std::hash<regguard::Address> {
  size_t operator()(const regguard::Address& a) const noexcept {
    // FNV-1a over the 20 bytes.
    size_t h = 1469598103934665603ull;
    for (auto b : a.bytes) h = (h ^ b) * 1099511628211ull;
    return h;
  }
};

template <>
struct std::hash<regguard::Bytes32> {
  size_t operator()(const regguard::Bytes32& b) const noexcept {
    size_t h;
    std::memcpy(&h, b.bytes.data(), sizeof(h));
    return h;
  }
};
