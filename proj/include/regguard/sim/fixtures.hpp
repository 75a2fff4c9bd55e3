// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "regguard/chain/core.hpp"
#include "regguard/chain/state.hpp"
#include "regguard/presync/cache.hpp"
#include "regguard/regspec/schema.hpp"
#include "regguard/util/bytes.hpp"

namespace regguard::sim {

using chain::Transaction;

/// Snapshot of regulatory and ledger state loaded from a JSON document, the
/// input format of the `validate` subcommand. Addresses are 0x-prefixed
/// 40-digit hex strings; every field is optional.
struct StateFixture {
  std::vector<std::pair<Address, int64_t>> balances;
  std::vector<Address> whitelist;
  std::vector<Address> sanctions;
  std::vector<Address> edd;
  std::vector<std::pair<Address, int64_t>> volume24h;
  int64_t oracle_price = 0;

  void apply(chain::L1Chain& l1, chain::L2State& l2, const chain::L1Registry& registry) const {
    auto& st = l1.mutable_state();
    auto put = [&](const std::string& map, const Address& a, int64_t v) {
      auto ref = registry.slot_for(map, Value{a});
      if (!ref) throw std::runtime_error("state fixture: no L1 layout for map " + map);
      st.write_i64(ref->contract, ref->slot, v);
    };
    for (const auto& a : whitelist) put("Whitelist", a, 1);
    for (const auto& a : sanctions) put("Sanctions", a, 1);
    for (const auto& a : edd) put("EDD", a, 1);
    for (const auto& [a, v] : balances) l2.balance[a] = v;
    for (const auto& [a, v] : volume24h) l2.record_volume(0, a, v);
    if (oracle_price > 0) {
      auto ref = registry.slot_for("OraclePrice", Value{chain::kOracleAssetId}).value();
      st.write_i64(ref.contract, ref.slot, oracle_price);
    }
  }
};

namespace fixdetail {

inline Address parse_address_str(const std::string& s, const std::string& where) {
  auto a = address_from_hex(s);
  if (!a) throw std::runtime_error(where + ": bad address '" + s + "'");
  return *a;
}

inline Address parse_address(const nlohmann::json& j, const std::string& where) {
  if (!j.is_string()) throw std::runtime_error(where + ": expected address string");
  return parse_address_str(j.get<std::string>(), where);
}

inline int64_t parse_i64(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_integer()) throw std::runtime_error(where + ": expected integer");
  return j.get<int64_t>();
}

}  // namespace fixdetail

inline StateFixture state_fixture_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("state fixture: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("state fixture: top level must be an object");
  StateFixture f;
  for (const auto& [key, val] : j.items()) {
    if (key == "balances" || key == "volume24h") {
      if (!val.is_object()) throw std::runtime_error("state fixture: " + key + " must be an object");
      auto& dst = key == "balances" ? f.balances : f.volume24h;
      for (const auto& [addr, amount] : val.items())
        dst.emplace_back(fixdetail::parse_address_str(addr, key),
                         fixdetail::parse_i64(amount, key));
    } else if (key == "whitelist" || key == "sanctions" || key == "edd") {
      if (!val.is_array()) throw std::runtime_error("state fixture: " + key + " must be an array");
      auto& dst = key == "whitelist" ? f.whitelist : key == "sanctions" ? f.sanctions : f.edd;
      for (const auto& item : val) dst.push_back(fixdetail::parse_address(item, key));
    } else if (key == "oracle_price") {
      f.oracle_price = fixdetail::parse_i64(val, key);
    } else {
      throw std::runtime_error("state fixture: unknown key '" + key + "'");
    }
  }
  return f;
}

/// Transaction list fixture: an array of call objects. `args` entries are
/// strings for addresses and integers for amounts; signatures are filled in
/// with the account's key at load time.
inline std::vector<Transaction> txs_from_json(const std::string& text,
                                              const regspec::StateSchema& schema) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("tx fixture: ") + e.what());
  }
  if (!j.is_array()) throw std::runtime_error("tx fixture: top level must be an array");
  std::vector<Transaction> out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    const auto& e = j[i];
    std::string where = "tx fixture entry " + std::to_string(i);
    if (!e.is_object()) throw std::runtime_error(where + ": expected an object");
    Transaction tx;
    if (!e.contains("from") || !e.contains("function"))
      throw std::runtime_error(where + ": needs 'from' and 'function'");
    tx.from = fixdetail::parse_address(e.at("from"), where);
    tx.function = e.at("function").get<std::string>();
    tx.nonce = e.contains("nonce") ? static_cast<uint64_t>(fixdetail::parse_i64(e.at("nonce"), where))
                                   : 0;
    const auto* fn = schema.find_function(tx.function);
    if (!fn) throw std::runtime_error(where + ": unknown function '" + tx.function + "'");
    if (e.contains("args")) {
      if (!e.at("args").is_array()) throw std::runtime_error(where + ": args must be an array");
      for (const auto& arg : e.at("args")) {
        if (arg.is_string())
          tx.args.emplace_back(fixdetail::parse_address(arg, where));
        else
          tx.args.emplace_back(fixdetail::parse_i64(arg, where));
      }
    }
    chain::Keyring::sign(tx);
    out.push_back(std::move(tx));
  }
  return out;
}

}  // namespace regguard::sim
