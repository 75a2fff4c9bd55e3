// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "regguard/util/bytes.hpp"

namespace regguard {

/// Types that rule expressions and transaction parameters range over.
enum class ValueKind : uint8_t { Int, Addr };

inline const char* to_string(ValueKind k) { return k == ValueKind::Int ? "int" : "address"; }

/// A runtime value: a signed 64-bit integer or an address. All regulated
/// quantities (amounts, flags, prices) are integers; addresses only occur as
/// parameters and map keys.
using Value = std::variant<int64_t, Address>;

inline ValueKind kind_of(const Value& v) {
  return std::holds_alternative<int64_t>(v) ? ValueKind::Int : ValueKind::Addr;
}

inline std::string value_to_string(const Value& v) {
  if (const auto* i = std::get_if<int64_t>(&v)) return std::to_string(*i);
  return to_hex(std::get<Address>(v));
}

}  // namespace regguard
