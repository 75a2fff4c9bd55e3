// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "regguard/chain/core.hpp"
#include "regguard/chain/state.hpp"
#include "regguard/presync/cache.hpp"
#include "regguard/presync/validator.hpp"
#include "regguard/regspec/parse.hpp"

namespace regguard::presync {

struct FailRateResult {
  uint64_t generated = 0;
  uint64_t accepted = 0;
  uint64_t delayed = 0;
  uint64_t rejected = 0;
  uint64_t settlement_failures = 0;
  double p_fail = 0.0;  // failures / accepted

  /// The guarantee the validator is designed to meet, with a three-sigma
  /// sampling allowance: p_fail may not exceed epsilon + eta by more than
  /// binomial noise.
  static double bound(double epsilon, double eta, uint64_t n) {
    double b = epsilon + eta;
    if (n == 0) return b;
    return b + 3.0 * std::sqrt(b / static_cast<double>(n));
  }
};

/// Measures the accepted-then-fails-settlement rate of the validator under
/// controlled divergence: every read hits a slot whose cache entry serves
/// its previous value with probability epsilon, and the dependency tracker
/// drops each read with probability eta. L1 itself is static, so the only
/// failure path is a stale read that the tracker never saw.
inline FailRateResult estimate_fail_rate(double epsilon, double eta, uint64_t target_accepted,
                                         uint64_t seed) {
  using namespace chain;

  auto schema = regspec::StateSchema::standard();
  auto parsed = regspec::parse_rules(
      "rule eligibility on transfer(address,uint256): Whitelist[to] >= 1 and amount <= 1000000\n",
      schema);
  if (!parsed.ok()) throw std::runtime_error("estimate_fail_rate: internal rule set invalid");

  L1Registry registry = L1Registry::standard();
  L1Chain l1;
  L1Cache cache;
  Rng cache_rng(seed, "failrate-cache");
  Rng eta_rng(seed, "failrate-eta");
  Rng workload(seed, "failrate-workload");
  cache.set_freshness(FreshnessModel::Bernoulli, epsilon, &cache_rng);

  constexpr int kAccounts = 100;
  std::vector<Address> accounts;
  accounts.reserve(kAccounts);
  L2State l2;
  for (int i = 0; i < kAccounts; ++i) {
    Address a = address_from_u64(0x100 + i);
    accounts.push_back(a);
    l2.balance[a] = 1'000'000'000;
    l2.total_minted += 1'000'000'000;
    // Each whitelist flag has a one-step history (1, then 2) so the cache
    // holds a genuine previous value distinct from the confirmed one.
    auto ref = registry.slot_for("Whitelist", Value{a});
    l1.mutable_state().write_i64(ref->contract, ref->slot, 1);
    cache.write_through(*ref, 1);
    l1.mutable_state().write_i64(ref->contract, ref->slot, 2);
    cache.write_through(*ref, 2);
  }

  ValidatorConfig cfg;
  cfg.eta = eta;

  FailRateResult out;
  uint64_t nonce = 0;
  while (out.accepted < target_accepted) {
    Transaction tx;
    tx.from = accounts[workload.uniform_u64(kAccounts)];
    tx.nonce = nonce++;
    tx.function = "transfer(address,uint256)";
    tx.args = {accounts[workload.uniform_u64(kAccounts)],
               Value{workload.uniform_i64(1, 1000)}};
    Keyring::sign(tx);
    ++out.generated;

    TxDecision d =
        validate_tx(tx, l2, cache, l1, registry, parsed.rules, parsed.schema, cfg, &eta_rng);
    switch (d.action) {
      case TxAction::Accept: {
        ++out.accepted;
        SettlementRecord rec{tx, 0, d.settlement_reads};
        if (!settle_l1(rec, l1.state()).ok) ++out.settlement_failures;
        break;
      }
      case TxAction::Delay:
        ++out.delayed;
        break;
      case TxAction::Reject:
        ++out.rejected;
        break;
    }
  }
  out.p_fail = out.accepted == 0
                   ? 0.0
                   : static_cast<double>(out.settlement_failures) / static_cast<double>(out.accepted);
  return out;
}

}  // namespace regguard::presync
