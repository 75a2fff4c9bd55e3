// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "regguard/chain/core.hpp"
#include "regguard/chain/state.hpp"
#include "regguard/sim/config.hpp"
#include "regguard/util/rng.hpp"

namespace regguard::sim {

using chain::TimeUs;
using chain::Transaction;

/// The accounts a run is populated with. Honest accounts are whitelisted
/// and clean; the two tainted addresses exist so rule-violating traffic has
/// concrete targets, and every tenth account carries the enhanced-diligence
/// flag.
struct Population {
  std::vector<Address> accounts;
  Address sanctioned;
  Address unlisted;  // never whitelisted
  Address exploiter; // funded account used by the stale-exploit adversary

  static Population build(const ScenarioConfig& cfg) {
    Population p;
    p.accounts.reserve(cfg.accounts);
    for (uint64_t i = 0; i < cfg.accounts; ++i)
      p.accounts.push_back(address_from_u64(0x10000 + i));
    p.sanctioned = address_from_u64(0x20001);
    p.unlisted = address_from_u64(0x20002);
    p.exploiter = address_from_u64(0x20003);
    return p;
  }

  bool edd_flagged(size_t account_index) const { return account_index % 10 == 0; }
};

/// One generated arrival: the signed transaction, when it hit the mempool,
/// and whether it was built to violate policy.
struct GeneratedTx {
  Transaction tx;
  TimeUs arrival = 0;
  bool malicious = false;
};

/// Deterministic open-loop traffic source. Arrival counts are Poisson per
/// window; the class mix covers payments, swaps and bridge moves, plus an
/// injected fraction of rule-violating transfers.
class Workload {
 public:
  Workload(const ScenarioConfig& cfg, const Population& pop)
      : cfg_(cfg), pop_(pop), rng_(cfg.seed, "workload"), nonces_(cfg.accounts, 0) {
    double wsum = cfg.transfer_weight + cfg.swap_weight + cfg.bridge_weight;
    p_transfer_ = cfg.transfer_weight / wsum;
    p_swap_ = cfg.swap_weight / wsum;
  }

  std::vector<GeneratedTx> window_arrivals(uint64_t window_index) {
    TimeUs t0 = window_index * cfg_.window_us();
    uint64_t count = rng_.poisson(cfg_.tx_rate_per_window);
    std::vector<GeneratedTx> out;
    out.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
      GeneratedTx g;
      g.arrival = t0 + rng_.uniform_u64(cfg_.window_us());
      g.malicious = rng_.chance(cfg_.malicious_fraction);
      g.tx = g.malicious ? build_malicious() : build_honest();
      out.push_back(std::move(g));
    }
    std::sort(out.begin(), out.end(), [](const GeneratedTx& a, const GeneratedTx& b) {
      return a.arrival != b.arrival ? a.arrival < b.arrival
                                    : a.tx.canonical_bytes() < b.tx.canonical_bytes();
    });
    return out;
  }

  /// The price the generator quotes swaps against (loose bound, half the
  /// implied output, so honest swaps survive ordinary price movement).
  void set_reference_price(int64_t p) { reference_price_ = p; }

 private:
  size_t pick_account() { return rng_.uniform_u64(pop_.accounts.size()); }

  int64_t pick_amount() { return rng_.uniform_i64(cfg_.amount_min, cfg_.amount_max); }

  Transaction build_honest() {
    double roll = rng_.uniform01();
    size_t from_idx = pick_account();
    Transaction tx;
    tx.from = pop_.accounts[from_idx];
    tx.nonce = nonces_[from_idx]++;
    if (roll < p_transfer_) {
      size_t to_idx = pick_account();
      if (to_idx == from_idx) to_idx = (to_idx + 1) % pop_.accounts.size();
      tx.function = "transfer(address,uint256)";
      tx.args = {pop_.accounts[to_idx], Value{pick_amount()}};
    } else if (roll < p_transfer_ + p_swap_) {
      int64_t amount_in = pick_amount();
      int64_t min_out = amount_in * reference_price_ / chain::kPriceScale / 2;
      tx.function = "swap(uint256,uint256)";
      tx.args = {Value{amount_in}, Value{min_out}};
    } else if (rng_.chance(0.5)) {
      size_t to_idx = pick_account();
      tx.function = "bridge_mint(address,uint256)";
      tx.args = {pop_.accounts[to_idx], Value{pick_amount()}};
    } else {
      tx.function = "redeem(uint256)";
      tx.args = {Value{pick_amount()}};
    }
    chain::Keyring::sign(tx);
    return tx;
  }

  /// Two violation shapes: paying a sanctioned address, and moving more
  /// than the diligence-free threshold from an account without the flag.
  Transaction build_malicious() {
    size_t from_idx = pick_account();
    Transaction tx;
    tx.function = "transfer(address,uint256)";
    if (rng_.chance(0.5)) {
      tx.args = {pop_.sanctioned, Value{pick_amount()}};
    } else {
      if (pop_.edd_flagged(from_idx)) from_idx = (from_idx + 1) % pop_.accounts.size();
      size_t to_idx = pick_account();
      if (to_idx == from_idx) to_idx = (to_idx + 1) % pop_.accounts.size();
      tx.args = {pop_.accounts[to_idx], Value{int64_t{10'001} + pick_amount()}};
    }
    tx.from = pop_.accounts[from_idx];
    tx.nonce = nonces_[from_idx]++;
    chain::Keyring::sign(tx);
    return tx;
  }

  const ScenarioConfig& cfg_;
  const Population& pop_;
  Rng rng_;
  std::vector<uint64_t> nonces_;
  double p_transfer_ = 0.6;
  double p_swap_ = 0.2;
  int64_t reference_price_ = 10'000;
};

}  // namespace regguard::sim
