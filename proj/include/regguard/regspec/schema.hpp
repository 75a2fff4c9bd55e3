// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regguard/util/crypto.hpp"
#include "regguard/util/values.hpp"

namespace regguard::regspec {

struct ParamDecl {
  std::string name;
  ValueKind kind = ValueKind::Int;
};

/// A guarded L2 function: its canonical signature string, 4-byte selector
/// and parameter list. Every rule binds to exactly one of these.
struct FunctionSig {
  std::string name;
  std::vector<ParamDecl> params;

  std::string canonical() const {
    std::string s = name + "(";
    for (size_t i = 0; i < params.size(); ++i) {
      if (i) s += ",";
      s += params[i].kind == ValueKind::Addr ? "address" : "uint256";
    }
    return s + ")";
  }

  /// First four bytes of the hash of the canonical signature.
  std::array<uint8_t, 4> selector() const {
    std::string c = canonical();
    Bytes32 h = sha256(std::span(reinterpret_cast<const uint8_t*>(c.data()), c.size()));
    return {h.bytes[0], h.bytes[1], h.bytes[2], h.bytes[3]};
  }

  const ParamDecl* find_param(const std::string& pname) const {
    for (const auto& p : params)
      if (p.name == pname) return &p;
    return nullptr;
  }
};

struct MapDecl {
  std::string name;
  ValueKind key_kind = ValueKind::Addr;
  // Map values are always integers: flags, balances, accumulated volumes.
};

/// The vocabulary rules are written against: which functions can be guarded
/// and which regulatory state maps may be consulted. `from` is implicitly
/// bound to the transaction sender in every rule.
struct StateSchema {
  std::vector<FunctionSig> functions;
  std::vector<MapDecl> maps;

  const FunctionSig* find_function(const std::string& canonical_sig) const {
    for (const auto& f : functions)
      if (f.canonical() == canonical_sig) return &f;
    return nullptr;
  }

  const FunctionSig* find_by_selector(const std::array<uint8_t, 4>& sel) const {
    for (const auto& f : functions)
      if (f.selector() == sel) return &f;
    return nullptr;
  }

  const MapDecl* find_map(const std::string& name) const {
    for (const auto& m : maps)
      if (m.name == name) return &m;
    return nullptr;
  }

  /// The schema the simulated rollup ships with: a token transfer plus
  /// bridge mint/redeem and a two-leg swap, and the compliance maps that
  /// fund-eligibility and AML policies consult.
  static StateSchema standard() {
    StateSchema s;
    s.functions = {
        {"transfer", {{"to", ValueKind::Addr}, {"amount", ValueKind::Int}}},
        {"bridge_mint", {{"to", ValueKind::Addr}, {"amount", ValueKind::Int}}},
        {"redeem", {{"amount", ValueKind::Int}}},
        {"swap", {{"amount_in", ValueKind::Int}, {"min_out", ValueKind::Int}}},
    };
    s.maps = {
        {"Whitelist", ValueKind::Addr},  {"Sanctions", ValueKind::Addr},
        {"EDD", ValueKind::Addr},        {"Volume24h", ValueKind::Addr},
        {"balance", ValueKind::Addr},    {"OraclePrice", ValueKind::Int},
    };
    return s;
  }
};

/// Name of the implicit sender parameter available in every rule.
inline constexpr const char* kSenderParam = "from";

}  // namespace regguard::regspec
