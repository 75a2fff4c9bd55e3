// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "regguard/regspec/eval.hpp"
#include "regguard/regspec/schema.hpp"
#include "regguard/util/bytes.hpp"
#include "regguard/util/crypto.hpp"
#include "regguard/util/values.hpp"

namespace regguard::chain {

using regspec::StateSchema;

/// An L2 transaction: sender, replay nonce, target function and arguments,
/// plus a MAC standing in for the sender's signature. Timestamps are carried
/// separately by the mempool, never inside the signed payload.
struct Transaction {
  Address from;
  uint64_t nonce = 0;
  std::string function;  // canonical signature, e.g. "transfer(address,uint256)"
  std::vector<Value> args;
  Bytes32 sig;

  std::array<uint8_t, 4> selector() const {
    Bytes32 h = sha256(
        std::span(reinterpret_cast<const uint8_t*>(function.data()), function.size()));
    return {h.bytes[0], h.bytes[1], h.bytes[2], h.bytes[3]};
  }

  /// Signed portion: selector, sender, nonce, then tagged arguments.
  std::vector<uint8_t> message_bytes() const {
    ByteWriter w;
    auto sel = selector();
    w.raw(std::span<const uint8_t>(sel.data(), sel.size()));
    w.raw(from);
    w.u64be(nonce);
    w.u32be(static_cast<uint32_t>(args.size()));
    for (const auto& a : args) {
      if (const auto* i = std::get_if<int64_t>(&a)) {
        w.u8(0);
        w.i64be(*i);
      } else {
        w.u8(1);
        w.raw(std::get<Address>(a));
      }
    }
    return w.take();
  }

  /// Full wire form: signed portion followed by the signature.
  std::vector<uint8_t> canonical_bytes() const {
    std::vector<uint8_t> out = message_bytes();
    out.insert(out.end(), sig.bytes.begin(), sig.bytes.end());
    return out;
  }

  /// Content digest; the identity the ordering layer commits to.
  Bytes32 id() const { return sha256(canonical_bytes()); }
};

inline Transaction transaction_from_bytes(std::span<const uint8_t> data,
                                          const StateSchema& schema) {
  ByteReader r(data);
  Transaction tx;
  std::array<uint8_t, 4> sel{};
  sel[0] = r.u8();
  sel[1] = r.u8();
  sel[2] = r.u8();
  sel[3] = r.u8();
  tx.from = r.address();
  tx.nonce = r.u64be();
  uint32_t argc = r.u32be();
  tx.args.reserve(argc);
  for (uint32_t i = 0; i < argc; ++i) {
    uint8_t tag = r.u8();
    if (tag == 0) {
      tx.args.push_back(r.i64be());
    } else if (tag == 1) {
      tx.args.push_back(r.address());
    } else {
      throw std::runtime_error("transaction_from_bytes: bad argument tag");
    }
  }
  tx.sig = r.bytes32();
  if (!r.done()) throw std::runtime_error("transaction_from_bytes: trailing bytes");
  const auto* fn = schema.find_by_selector(sel);
  if (!fn) throw std::runtime_error("transaction_from_bytes: unknown selector");
  tx.function = fn->canonical();
  return tx;
}

/// Holds the per-account MAC keys of the simulated rollup. Keys are derived
/// from the address, so any component can verify deterministically; this
/// stands in for public-key signatures without modelling a PKI.
class Keyring {
 public:
  static std::array<uint8_t, 32> key_for(const Address& a) {
    ByteWriter w;
    w.str("regguard-account-key");
    w.raw(a);
    return sha256(w.bytes()).bytes;
  }

  static void sign(Transaction& tx) {
    auto key = key_for(tx.from);
    auto msg = tx.message_bytes();
    tx.sig = hmac_sha256(std::span<const uint8_t>(key), std::span<const uint8_t>(msg));
  }

  static bool verify(const Transaction& tx) {
    auto key = key_for(tx.from);
    auto msg = tx.message_bytes();
    return hmac_sha256(std::span<const uint8_t>(key), std::span<const uint8_t>(msg)) == tx.sig;
  }
};

/// Tracks which (account, nonce) pairs have been consumed. Out-of-order
/// execution within a window is allowed; replays are not.
class NonceLedger {
 public:
  bool used(const Address& a, uint64_t nonce) const {
    auto it = used_.find(a);
    return it != used_.end() && it->second.count(nonce) != 0;
  }
  void consume(const Address& a, uint64_t nonce) { used_[a].insert(nonce); }

 private:
  std::unordered_map<Address, std::unordered_set<uint64_t>> used_;
};

struct SynVerdict {
  bool ok = true;
  std::string reason;
};

/// Syntactic admission: well-formed call against the schema, valid
/// signature, fresh nonce. The cheap gate ahead of semantic validation.
inline SynVerdict syn_legit(const Transaction& tx, const StateSchema& schema,
                            const NonceLedger& nonces) {
  const auto* fn = schema.find_function(tx.function);
  if (!fn) return {false, "unknown function '" + tx.function + "'"};
  if (tx.args.size() != fn->params.size())
    return {false, "argument count mismatch for '" + tx.function + "'"};
  for (size_t i = 0; i < tx.args.size(); ++i) {
    if (kind_of(tx.args[i]) != fn->params[i].kind)
      return {false, "argument " + std::to_string(i) + " has wrong type"};
  }
  if (!Keyring::verify(tx)) return {false, "signature verification failed"};
  if (nonces.used(tx.from, tx.nonce)) return {false, "nonce already used"};
  return {};
}

/// Convenience: bind a transaction's arguments (plus the implicit sender)
/// into a parameter environment for rule evaluation.
inline regspec::ParamEnv bind_params(const Transaction& tx, const StateSchema& schema) {
  regspec::ParamEnv env;
  env.params[regspec::kSenderParam] = tx.from;
  if (const auto* fn = schema.find_function(tx.function)) {
    for (size_t i = 0; i < fn->params.size() && i < tx.args.size(); ++i)
      env.params[fn->params[i].name] = tx.args[i];
  }
  return env;
}

}  // namespace regguard::chain
