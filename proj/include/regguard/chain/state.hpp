// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "regguard/chain/core.hpp"
#include "regguard/util/bytes.hpp"
#include "regguard/util/values.hpp"

namespace regguard::chain {

/// Microseconds of simulated time.
using TimeUs = uint64_t;

constexpr TimeUs kSecond = 1'000'000;
constexpr TimeUs kVolumeWindow = 24ull * 3600 * kSecond;

// ---------------------------------------------------------------------------
// L1 side
// ---------------------------------------------------------------------------

/// Where each regulatory map lives on L1: the owning contract and how keys
/// are packed into storage slots.
struct L1MapLayout {
  std::string map;
  Address contract;
  ValueKind key_kind = ValueKind::Addr;
};

struct SlotRef {
  Address contract;
  Bytes32 slot;

  bool operator==(const SlotRef& o) const = default;
  auto operator<=>(const SlotRef& o) const = default;
};

struct L1Registry {
  std::vector<L1MapLayout> maps;

  static L1Registry standard() {
    L1Registry r;
    r.maps = {
        {"Whitelist", address_from_u64(0x1001), ValueKind::Addr},
        {"Sanctions", address_from_u64(0x1002), ValueKind::Addr},
        {"EDD", address_from_u64(0x1003), ValueKind::Addr},
        {"OraclePrice", address_from_u64(0x1004), ValueKind::Int},
    };
    return r;
  }

  const L1MapLayout* find(const std::string& map) const {
    for (const auto& m : maps)
      if (m.map == map) return &m;
    return nullptr;
  }

  std::optional<SlotRef> slot_for(const std::string& map, const Value& key) const {
    const auto* m = find(map);
    if (!m) return std::nullopt;
    if (const auto* a = std::get_if<Address>(&key)) {
      if (m->key_kind != ValueKind::Addr) return std::nullopt;
      return SlotRef{m->contract, bytes32_from_address(*a)};
    }
    if (m->key_kind != ValueKind::Int) return std::nullopt;
    return SlotRef{m->contract, bytes32_from_u64(static_cast<uint64_t>(std::get<int64_t>(key)))};
  }
};

/// Confirmed L1 storage: contract -> slot -> word. Absent slots read zero.
struct L1State {
  std::unordered_map<Address, std::unordered_map<Bytes32, Bytes32>> storage;

  Bytes32 read(const Address& contract, const Bytes32& slot) const {
    auto cit = storage.find(contract);
    if (cit == storage.end()) return {};
    auto sit = cit->second.find(slot);
    return sit == cit->second.end() ? Bytes32{} : sit->second;
  }

  void write(const Address& contract, const Bytes32& slot, const Bytes32& value) {
    storage[contract][slot] = value;
  }

  int64_t read_i64(const Address& contract, const Bytes32& slot) const {
    return static_cast<int64_t>(u64_from_bytes32(read(contract, slot)));
  }

  void write_i64(const Address& contract, const Bytes32& slot, int64_t v) {
    write(contract, slot, bytes32_from_u64(static_cast<uint64_t>(v)));
  }
};

/// A write already submitted to L1 but not yet in a confirmed block; it
/// lands when the chain advances to `apply_block`.
struct L1Dependency {
  uint64_t apply_block = 0;
  Address contract;
  Bytes32 slot;
  Bytes32 value;
  uint64_t seq = 0;  // submission order, breaks ties within a block
};

/// The confirmed L1 chain plus its queue of in-flight writes. Observers can
/// ask whether a slot has unconfirmed updates pending, which is exactly what
/// the pre-synchronization validator needs to flag unstable dependencies.
class L1Chain {
 public:
  explicit L1Chain(uint64_t block_time_s = 12)
      : block_time_us_(block_time_s * kSecond) {}

  const L1State& state() const { return state_; }
  L1State& mutable_state() { return state_; }
  uint64_t block() const { return block_; }
  uint64_t block_at(TimeUs t) const { return t / block_time_us_; }
  TimeUs block_time_us() const { return block_time_us_; }

  void schedule(const L1Dependency& dep) {
    L1Dependency d = dep;
    d.seq = next_seq_++;
    pending_.push_back(d);
  }

  /// Applies every pending write with apply_block <= target, in submission
  /// order, moves the confirmed head forward, and returns the writes that
  /// landed so observers (the cache synchronizer) can follow.
  std::vector<L1Dependency> advance_to(uint64_t target_block) {
    std::vector<L1Dependency> applied;
    if (target_block <= block_ && pending_.empty()) return applied;
    std::stable_sort(pending_.begin(), pending_.end(),
                     [](const L1Dependency& a, const L1Dependency& b) {
                       return a.apply_block != b.apply_block ? a.apply_block < b.apply_block
                                                             : a.seq < b.seq;
                     });
    size_t i = 0;
    while (i < pending_.size() && pending_[i].apply_block <= target_block) {
      state_.write(pending_[i].contract, pending_[i].slot, pending_[i].value);
      applied.push_back(pending_[i]);
      ++i;
    }
    pending_.erase(pending_.begin(), pending_.begin() + i);
    if (target_block > block_) block_ = target_block;
    return applied;
  }

  bool has_pending(const SlotRef& ref) const {
    for (const auto& d : pending_)
      if (d.contract == ref.contract && d.slot == ref.slot) return true;
    return false;
  }

  std::optional<uint64_t> earliest_pending_block(const SlotRef& ref) const {
    std::optional<uint64_t> best;
    for (const auto& d : pending_) {
      if (d.contract == ref.contract && d.slot == ref.slot)
        if (!best || d.apply_block < *best) best = d.apply_block;
    }
    return best;
  }

  size_t pending_count() const { return pending_.size(); }

 private:
  L1State state_;
  std::vector<L1Dependency> pending_;
  uint64_t block_ = 0;
  uint64_t next_seq_ = 0;
  TimeUs block_time_us_;
};

// ---------------------------------------------------------------------------
// L2 side
// ---------------------------------------------------------------------------

/// A dated transfer, kept while inside the rolling volume window.
struct VolumeEntry {
  TimeUs at = 0;
  Address account;
  int64_t amount = 0;
};

/// Native L2 state: token balances, the rolling 24h transfer volume per
/// sender, consumed nonces and mint/redeem totals. Regulatory flags are not
/// here; those live on L1 and are read through the cache layer.
struct L2State {
  std::unordered_map<Address, int64_t> balance;    // primary token
  std::unordered_map<Address, int64_t> balance_b;  // counter-asset for swaps
  NonceLedger nonces;
  int64_t total_minted = 0;
  int64_t total_redeemed = 0;
  Address swap_pool = address_from_u64(0x2001);

  std::unordered_map<Address, int64_t> volume24h;
  std::deque<VolumeEntry> volume_log;

  int64_t balance_of(const Address& a) const {
    auto it = balance.find(a);
    return it == balance.end() ? 0 : it->second;
  }
  int64_t balance_b_of(const Address& a) const {
    auto it = balance_b.find(a);
    return it == balance_b.end() ? 0 : it->second;
  }
  int64_t volume_of(const Address& a) const {
    auto it = volume24h.find(a);
    return it == volume24h.end() ? 0 : it->second;
  }

  void record_volume(TimeUs now, const Address& a, int64_t amount) {
    volume24h[a] += amount;
    volume_log.push_back({now, a, amount});
  }

  /// Drops volume entries older than the 24h window.
  void expire_volume(TimeUs now) {
    while (!volume_log.empty() && volume_log.front().at + kVolumeWindow <= now) {
      const auto& e = volume_log.front();
      auto it = volume24h.find(e.account);
      if (it != volume24h.end()) {
        it->second -= e.amount;
        if (it->second <= 0) volume24h.erase(it);
      }
      volume_log.pop_front();
    }
  }

  /// Circulating supply check: every minted token is either in a balance or
  /// was redeemed back to L1.
  int64_t balance_sum() const {
    int64_t s = 0;
    for (const auto& [a, v] : balance) s += v;
    return s;
  }
};

enum class ExecStatus : uint8_t {
  Ok,
  UnknownFunction,
  BadArguments,
  InsufficientBalance,
  SlippageExceeded,
  PoolExhausted,
  NonceReplay,
  Overflow,
};

inline const char* to_string(ExecStatus s) {
  switch (s) {
    case ExecStatus::Ok: return "ok";
    case ExecStatus::UnknownFunction: return "unknown_function";
    case ExecStatus::BadArguments: return "bad_arguments";
    case ExecStatus::InsufficientBalance: return "insufficient_balance";
    case ExecStatus::SlippageExceeded: return "slippage_exceeded";
    case ExecStatus::PoolExhausted: return "pool_exhausted";
    case ExecStatus::NonceReplay: return "nonce_replay";
    case ExecStatus::Overflow: return "overflow";
  }
  return "?";
}

/// One cross-layer read made while validating or executing a transaction:
/// which slot, and the value acted upon. Settlement re-checks these against
/// confirmed L1 storage.
struct CrossLayerRead {
  SlotRef slot;
  int64_t value_used = 0;
};

struct ExecResult {
  ExecStatus status = ExecStatus::Ok;
  int64_t swap_out = 0;  // for swap calls, the computed output amount

  bool ok() const { return status == ExecStatus::Ok; }
};

/// Price scale for swap quoting: OraclePrice is counter-asset units per
/// 10^4 primary units.
constexpr int64_t kPriceScale = 10'000;
constexpr int64_t kOracleAssetId = 1;

/// Executes one transaction against L2 state. `oracle_price` is the price
/// the executor currently sees (through the cache); the caller records where
/// that value came from. Pure state-machine semantics, no randomness.
inline ExecResult apply_l2(L2State& st, const Transaction& tx, TimeUs now,
                           int64_t oracle_price = 0) {
  ExecResult res;
  if (st.nonces.used(tx.from, tx.nonce)) {
    res.status = ExecStatus::NonceReplay;
    return res;
  }
  auto need = [&](bool cond, ExecStatus fail) {
    if (res.status == ExecStatus::Ok && !cond) res.status = fail;
    return res.status == ExecStatus::Ok;
  };

  if (tx.function == "transfer(address,uint256)") {
    if (!need(tx.args.size() == 2 && kind_of(tx.args[0]) == ValueKind::Addr &&
                  kind_of(tx.args[1]) == ValueKind::Int,
              ExecStatus::BadArguments))
      return res;
    Address to = std::get<Address>(tx.args[0]);
    int64_t amount = std::get<int64_t>(tx.args[1]);
    if (!need(amount >= 0, ExecStatus::BadArguments)) return res;
    if (!need(st.balance_of(tx.from) >= amount, ExecStatus::InsufficientBalance)) return res;
    if (!need(st.balance_of(to) <= INT64_MAX - amount, ExecStatus::Overflow)) return res;
    // Debit before credit so a self-transfer nets to zero.
    st.balance[tx.from] -= amount;
    st.balance[to] += amount;
    st.record_volume(now, tx.from, amount);
  } else if (tx.function == "bridge_mint(address,uint256)") {
    if (!need(tx.args.size() == 2 && kind_of(tx.args[0]) == ValueKind::Addr &&
                  kind_of(tx.args[1]) == ValueKind::Int,
              ExecStatus::BadArguments))
      return res;
    Address to = std::get<Address>(tx.args[0]);
    int64_t amount = std::get<int64_t>(tx.args[1]);
    if (!need(amount >= 0, ExecStatus::BadArguments)) return res;
    if (!need(st.balance_of(to) <= INT64_MAX - amount && st.total_minted <= INT64_MAX - amount,
              ExecStatus::Overflow))
      return res;
    st.balance[to] += amount;
    st.total_minted += amount;
  } else if (tx.function == "redeem(uint256)") {
    if (!need(tx.args.size() == 1 && kind_of(tx.args[0]) == ValueKind::Int,
              ExecStatus::BadArguments))
      return res;
    int64_t amount = std::get<int64_t>(tx.args[0]);
    if (!need(amount >= 0, ExecStatus::BadArguments)) return res;
    if (!need(st.balance_of(tx.from) >= amount, ExecStatus::InsufficientBalance)) return res;
    st.balance[tx.from] -= amount;
    st.total_redeemed += amount;
  } else if (tx.function == "swap(uint256,uint256)") {
    if (!need(tx.args.size() == 2 && kind_of(tx.args[0]) == ValueKind::Int &&
                  kind_of(tx.args[1]) == ValueKind::Int,
              ExecStatus::BadArguments))
      return res;
    int64_t amount_in = std::get<int64_t>(tx.args[0]);
    int64_t min_out = std::get<int64_t>(tx.args[1]);
    if (!need(amount_in >= 0 && min_out >= 0 && oracle_price >= 0, ExecStatus::BadArguments))
      return res;
    if (!need(st.balance_of(tx.from) >= amount_in, ExecStatus::InsufficientBalance)) return res;
    int64_t out = 0;
    bool ovf = __builtin_mul_overflow(amount_in, oracle_price, &out);
    if (!need(!ovf, ExecStatus::Overflow)) return res;
    out /= kPriceScale;
    res.swap_out = out;
    if (!need(out >= min_out, ExecStatus::SlippageExceeded)) return res;
    if (!need(st.balance_b_of(st.swap_pool) >= out, ExecStatus::PoolExhausted)) return res;
    st.balance[tx.from] -= amount_in;
    st.balance[st.swap_pool] += amount_in;
    st.balance_b[st.swap_pool] -= out;
    st.balance_b[tx.from] += out;
  } else {
    res.status = ExecStatus::UnknownFunction;
    return res;
  }
  st.nonces.consume(tx.from, tx.nonce);
  return res;
}

/// Feasibility check with apply_l2 semantics but no writes; the sandbox the
/// validator runs transactions through. Must agree with apply_l2 on every
/// input (property-tested), so keep the two in sync.
inline ExecResult exec_check(const L2State& st, const Transaction& tx, int64_t oracle_price = 0) {
  ExecResult res;
  if (st.nonces.used(tx.from, tx.nonce)) {
    res.status = ExecStatus::NonceReplay;
    return res;
  }
  auto need = [&](bool cond, ExecStatus fail) {
    if (res.status == ExecStatus::Ok && !cond) res.status = fail;
    return res.status == ExecStatus::Ok;
  };

  if (tx.function == "transfer(address,uint256)") {
    if (!need(tx.args.size() == 2 && kind_of(tx.args[0]) == ValueKind::Addr &&
                  kind_of(tx.args[1]) == ValueKind::Int,
              ExecStatus::BadArguments))
      return res;
    Address to = std::get<Address>(tx.args[0]);
    int64_t amount = std::get<int64_t>(tx.args[1]);
    if (!need(amount >= 0, ExecStatus::BadArguments)) return res;
    if (!need(st.balance_of(tx.from) >= amount, ExecStatus::InsufficientBalance)) return res;
    need(st.balance_of(to) <= INT64_MAX - amount, ExecStatus::Overflow);
  } else if (tx.function == "bridge_mint(address,uint256)") {
    if (!need(tx.args.size() == 2 && kind_of(tx.args[0]) == ValueKind::Addr &&
                  kind_of(tx.args[1]) == ValueKind::Int,
              ExecStatus::BadArguments))
      return res;
    int64_t amount = std::get<int64_t>(tx.args[1]);
    if (!need(amount >= 0, ExecStatus::BadArguments)) return res;
    need(st.balance_of(std::get<Address>(tx.args[0])) <= INT64_MAX - amount &&
             st.total_minted <= INT64_MAX - amount,
         ExecStatus::Overflow);
  } else if (tx.function == "redeem(uint256)") {
    if (!need(tx.args.size() == 1 && kind_of(tx.args[0]) == ValueKind::Int,
              ExecStatus::BadArguments))
      return res;
    int64_t amount = std::get<int64_t>(tx.args[0]);
    if (!need(amount >= 0, ExecStatus::BadArguments)) return res;
    need(st.balance_of(tx.from) >= amount, ExecStatus::InsufficientBalance);
  } else if (tx.function == "swap(uint256,uint256)") {
    if (!need(tx.args.size() == 2 && kind_of(tx.args[0]) == ValueKind::Int &&
                  kind_of(tx.args[1]) == ValueKind::Int,
              ExecStatus::BadArguments))
      return res;
    int64_t amount_in = std::get<int64_t>(tx.args[0]);
    int64_t min_out = std::get<int64_t>(tx.args[1]);
    if (!need(amount_in >= 0 && min_out >= 0 && oracle_price >= 0, ExecStatus::BadArguments))
      return res;
    if (!need(st.balance_of(tx.from) >= amount_in, ExecStatus::InsufficientBalance)) return res;
    int64_t out = 0;
    bool ovf = __builtin_mul_overflow(amount_in, oracle_price, &out);
    if (!need(!ovf, ExecStatus::Overflow)) return res;
    out /= kPriceScale;
    res.swap_out = out;
    if (!need(out >= min_out, ExecStatus::SlippageExceeded)) return res;
    need(st.balance_b_of(st.swap_pool) >= out, ExecStatus::PoolExhausted);
  } else {
    res.status = ExecStatus::UnknownFunction;
  }
  return res;
}

/// An executed transaction queued for settlement: the transaction, the batch
/// it rode in, and the cross-layer reads its acceptance relied on.
struct SettlementRecord {
  Transaction tx;
  uint64_t window_index = 0;
  std::vector<CrossLayerRead> reads;
};

struct SettlementOutcome {
  bool ok = true;
  SlotRef mismatched_slot;
  int64_t expected = 0;  // value the reference state holds
  int64_t used = 0;      // value the L2 side acted on
};

/// Settlement check: the batch publishes the cross-layer values it acted
/// on; the L1 contract verifies each against confirmed storage at the
/// settlement block (before the batch's own writes land). Any mismatch
/// invalidates the transaction.
inline SettlementOutcome settle_l1(const SettlementRecord& rec, const L1State& reference) {
  for (const auto& r : rec.reads) {
    int64_t actual = reference.read_i64(r.slot.contract, r.slot.slot);
    if (actual != r.value_used) return {false, r.slot, actual, r.value_used};
  }
  return {};
}

}  // namespace regguard::chain
