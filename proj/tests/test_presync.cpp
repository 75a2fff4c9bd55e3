// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <deque>

#include "regguard/presync/cache.hpp"
#include "regguard/presync/failrate.hpp"
#include "regguard/presync/validator.hpp"
#include "regguard/regspec/parse.hpp"

using namespace regguard;
using namespace regguard::presync;
using namespace regguard::chain;

namespace {

Transaction make_transfer(uint64_t from, uint64_t to, int64_t amount, uint64_t nonce) {
  Transaction tx;
  tx.from = address_from_u64(from);
  tx.nonce = nonce;
  tx.function = "transfer(address,uint256)";
  tx.args = {Value{address_from_u64(to)}, Value{amount}};
  Keyring::sign(tx);
  return tx;
}

Transaction make_swap(uint64_t from, int64_t amount_in, int64_t min_out, uint64_t nonce) {
  Transaction tx;
  tx.from = address_from_u64(from);
  tx.nonce = nonce;
  tx.function = "swap(uint256,uint256)";
  tx.args = {Value{amount_in}, Value{min_out}};
  Keyring::sign(tx);
  return tx;
}

/// Everything validate_tx needs, wired to the standard registry with one
/// whitelisted recipient rule.
struct Rig {
  regspec::StateSchema schema = regspec::StateSchema::standard();
  regspec::RuleSet rules;
  L1Registry registry = L1Registry::standard();
  L1Chain l1;
  L1Cache cache;
  L2State l2;
  ValidatorConfig cfg;

  explicit Rig(const std::string& rule_src =
                   "rule eligibility on transfer(address,uint256): Whitelist[to] = 1\n") {
    auto parsed = regspec::parse_rules(rule_src, schema);
    REQUIRE(parsed.ok());
    rules = parsed.rules;
    schema = parsed.schema;
    for (uint64_t i = 1; i <= 4; ++i) {
      l2.balance[address_from_u64(i)] = 1'000'000;
      l2.total_minted += 1'000'000;
      set_flag("Whitelist", i, 1, true);
    }
    l2.balance_b[l2.swap_pool] = 1'000'000'000;
  }

  SlotRef slot(const std::string& map, const Value& key) const {
    auto r = registry.slot_for(map, key);
    REQUIRE(r.has_value());
    return *r;
  }

  /// Writes confirmed L1 state, optionally syncing the cache with it.
  void set_flag(const std::string& map, uint64_t who, int64_t v, bool sync) {
    auto ref = slot(map, Value{address_from_u64(who)});
    l1.mutable_state().write_i64(ref.contract, ref.slot, v);
    if (sync) cache.write_through(ref, v);
  }

  void set_price(int64_t confirmed, int64_t cached) {
    auto ref = slot("OraclePrice", Value{kOracleAssetId});
    l1.mutable_state().write_i64(ref.contract, ref.slot, confirmed);
    cache.write_through(ref, cached);
  }

  TxDecision validate(const Transaction& tx, Rng* eta_rng = nullptr) {
    return validate_tx(tx, l2, cache, l1, registry, rules, schema, cfg, eta_rng);
  }
};

}  // namespace

TEST_CASE("cache lru matches a reference replay model") {
  const size_t kCap = 3;
  L1Cache cache(kCap);
  L1State confirmed;
  Address contract = address_from_u64(0x1001);
  const int kSlots = 8;
  for (int i = 0; i < kSlots; ++i)
    confirmed.write_i64(contract, bytes32_from_u64(i), 100 + i);

  std::deque<uint64_t> model;  // slot numbers, most recently used first
  uint64_t model_evictions = 0;
  auto touch = [&](uint64_t s) {
    auto it = std::find(model.begin(), model.end(), s);
    bool present = it != model.end();
    if (present) model.erase(it);
    model.push_front(s);
    if (!present && model.size() > kCap) {
      model.pop_back();
      ++model_evictions;
    }
    return present;
  };

  Rng rng(99);
  uint64_t model_hits = 0, model_misses = 0;
  for (int op = 0; op < 600; ++op) {
    uint64_t s = rng.uniform_u64(kSlots);
    SlotRef ref{contract, bytes32_from_u64(s)};
    if (rng.chance(0.3)) {
      cache.write_through(ref, 100 + static_cast<int64_t>(s));
      touch(s);
    } else {
      int64_t got = cache.read(ref, confirmed, 0);
      REQUIRE(got == 100 + static_cast<int64_t>(s));
      if (touch(s)) ++model_hits;
      else ++model_misses;
    }
    REQUIRE(cache.size(contract) == model.size());
    for (uint64_t m = 0; m < kSlots; ++m) {
      bool in_model = std::find(model.begin(), model.end(), m) != model.end();
      REQUIRE(cache.contains(SlotRef{contract, bytes32_from_u64(m)}) == in_model);
    }
  }
  REQUIRE(cache.stats.evictions == model_evictions);
  REQUIRE(cache.stats.hits == model_hits);
  REQUIRE(cache.stats.misses == model_misses);
  REQUIRE(cache.stats.divergent_serves == 0);
  REQUIRE(model_evictions > 0);
}

TEST_CASE("cache shards are bounded per contract") {
  L1Cache cache(2);
  L1State confirmed;
  Address a = address_from_u64(1), b = address_from_u64(2);
  for (int i = 0; i < 5; ++i) {
    cache.write_through(SlotRef{a, bytes32_from_u64(i)}, i);
    cache.write_through(SlotRef{b, bytes32_from_u64(i)}, i);
  }
  REQUIRE(cache.size(a) == 2);
  REQUIRE(cache.size(b) == 2);
  REQUIRE(cache.stats.evictions == 6);
  REQUIRE(cache.size(address_from_u64(3)) == 0);
}

TEST_CASE("exact cache serves stale values only when sync is skipped") {
  L1Cache cache;
  L1State confirmed;
  Address c = address_from_u64(0x1001);
  SlotRef ref{c, bytes32_from_u64(1)};

  confirmed.write_i64(c, ref.slot, 5);
  REQUIRE(cache.read(ref, confirmed, 0) == 5);  // miss fills from confirmed
  REQUIRE(cache.stats.misses == 1);

  confirmed.write_i64(c, ref.slot, 9);  // L1 moved, cache not synced
  REQUIRE(cache.read(ref, confirmed, 0) == 5);
  REQUIRE(cache.stats.divergent_serves == 1);

  cache.write_through(ref, 9);
  REQUIRE(cache.read(ref, confirmed, 0) == 9);
  REQUIRE(cache.stats.divergent_serves == 1);

  confirmed.write_i64(c, ref.slot, 12);
  cache.resync(ref, confirmed);
  REQUIRE(cache.read(ref, confirmed, 0) == 12);
  REQUIRE(cache.stats.write_throughs == 2);  // write_through + resync
}

TEST_CASE("bernoulli freshness serves the previous value at rate epsilon") {
  L1Cache cache;
  L1State confirmed;
  Rng rng(4242);
  cache.set_freshness(FreshnessModel::Bernoulli, 0.3, &rng);
  Address c = address_from_u64(0x1001);
  SlotRef ref{c, bytes32_from_u64(7)};

  confirmed.write_i64(c, ref.slot, 2);
  cache.write_through(ref, 1);  // history: first 1...
  cache.write_through(ref, 2);  // ...then 2, so prev=1 value=2

  const int kN = 20000;
  int stale = 0;
  for (int i = 0; i < kN; ++i)
    if (cache.read(ref, confirmed, 0) == 1) ++stale;
  double frac = static_cast<double>(stale) / kN;
  REQUIRE(std::abs(frac - 0.3) < 0.02);
  REQUIRE(cache.stats.divergent_serves == static_cast<uint64_t>(stale));
}

TEST_CASE("bernoulli staleness needs history: a value with no previous never diverges") {
  L1Cache cache;
  L1State confirmed;
  Rng rng(1);
  cache.set_freshness(FreshnessModel::Bernoulli, 1.0, &rng);
  Address c = address_from_u64(0x1001);
  SlotRef ref{c, bytes32_from_u64(3)};
  confirmed.write_i64(c, ref.slot, 8);
  cache.write_through(ref, 8);
  for (int i = 0; i < 100; ++i) REQUIRE(cache.read(ref, confirmed, 0) == 8);
  REQUIRE(cache.stats.divergent_serves == 0);

  // Epsilon zero with history present never diverges either.
  L1Cache cache0;
  Rng rng0(2);
  cache0.set_freshness(FreshnessModel::Bernoulli, 0.0, &rng0);
  cache0.write_through(ref, 7);
  cache0.write_through(ref, 8);
  for (int i = 0; i < 100; ++i) REQUIRE(cache0.read(ref, confirmed, 0) == 8);
  REQUIRE(cache0.stats.divergent_serves == 0);
}

TEST_CASE("blocklag freshness defers writes to the next block") {
  L1Cache cache;
  L1State confirmed;
  Rng rng(5);
  cache.set_freshness(FreshnessModel::BlockLag, 1.0, &rng);
  Address c = address_from_u64(0x1001);
  SlotRef ref{c, bytes32_from_u64(1)};

  confirmed.write_i64(c, ref.slot, 1);
  REQUIRE(cache.read(ref, confirmed, 0) == 1);  // miss path is immediate

  confirmed.write_i64(c, ref.slot, 2);
  cache.write_through(ref, 2, 0);               // deferred to block 1
  REQUIRE(cache.read(ref, confirmed, 0) == 1);  // same block still stale
  REQUIRE(cache.stats.divergent_serves == 1);
  REQUIRE(cache.read(ref, confirmed, 1) == 2);  // lag flushed at block 1
  REQUIRE(cache.read(ref, confirmed, 1) == 2);

  // Lag probability zero applies immediately.
  cache.set_freshness(FreshnessModel::BlockLag, 0.0, &rng);
  confirmed.write_i64(c, ref.slot, 3);
  cache.write_through(ref, 3, 1);
  REQUIRE(cache.read(ref, confirmed, 1) == 3);
}

TEST_CASE("validator accepts a clean transaction and publishes its reads") {
  Rig rig;
  auto d = rig.validate(make_transfer(1, 2, 100, 0));
  REQUIRE(d.action == TxAction::Accept);
  REQUIRE(d.accepted());
  REQUIRE(d.reject_stage == RejectStage::None);
  REQUIRE(d.severity_total == 0);
  REQUIRE(d.drift.empty());
  REQUIRE(d.settlement_reads.size() == 1);
  REQUIRE(d.settlement_reads[0].slot == rig.slot("Whitelist", Value{address_from_u64(2)}));
  REQUIRE(d.settlement_reads[0].value_used == 1);

  SettlementRecord rec{make_transfer(1, 2, 100, 0), 0, d.settlement_reads};
  REQUIRE(settle_l1(rec, rig.l1.state()).ok);
}

TEST_CASE("validator rejects on rule violation at the semantic stage") {
  Rig rig;
  auto d = rig.validate(make_transfer(1, 9, 100, 0));  // 9 is not whitelisted
  REQUIRE(d.action == TxAction::Reject);
  REQUIRE(d.reject_stage == RejectStage::Semantic);
  REQUIRE(d.semantic.failing_rule == "eligibility");
  REQUIRE_THAT(d.reason, Catch::Matchers::ContainsSubstring("rule 'eligibility'"));
  REQUIRE(d.settlement_reads.empty());
}

TEST_CASE("validator rejects infeasible execution before state checks") {
  Rig rig;
  auto d = rig.validate(make_transfer(1, 2, 10'000'000, 0));
  REQUIRE(d.action == TxAction::Reject);
  REQUIRE(d.reject_stage == RejectStage::Execution);
  REQUIRE(d.exec == ExecStatus::InsufficientBalance);
  REQUIRE_THAT(d.reason, Catch::Matchers::ContainsSubstring("insufficient_balance"));
}

TEST_CASE("eligibility drift rejects and resync heals the cache") {
  Rig rig;
  // Confirmed flag flips to 0 but the cache still says 1.
  rig.set_flag("Whitelist", 2, 0, false);

  auto d = rig.validate(make_transfer(1, 2, 100, 0));
  REQUIRE(d.action == TxAction::Reject);
  REQUIRE(d.reject_stage == RejectStage::StateDrift);
  REQUIRE(d.drift.size() == 1);
  REQUIRE(d.drift[0].map == "Whitelist");
  REQUIRE(d.drift[0].cached == 1);
  REQUIRE(d.drift[0].confirmed == 0);
  REQUIRE_FALSE(d.drift[0].in_flight);
  REQUIRE(d.severity_total == rig.cfg.eligibility_severity);
  REQUIRE_THAT(d.reason, Catch::Matchers::ContainsSubstring("severity 100"));

  // resync_on_drift pulled the confirmed value in; now the rule itself fails.
  auto d2 = rig.validate(make_transfer(1, 2, 100, 1));
  REQUIRE(d2.reject_stage == RejectStage::Semantic);
}

TEST_CASE("validator can be configured to keep drifted entries unsynced") {
  Rig rig;
  rig.cfg.resync_on_drift = false;
  rig.set_flag("Whitelist", 2, 0, false);
  REQUIRE(rig.validate(make_transfer(1, 2, 100, 0)).reject_stage == RejectStage::StateDrift);
  auto d = rig.validate(make_transfer(1, 2, 100, 1));
  REQUIRE(d.reject_stage == RejectStage::StateDrift);  // still drifted, not healed
}

TEST_CASE("in-flight dependencies delay with a concrete retry block") {
  Rig rig;
  auto ref = rig.slot("Whitelist", Value{address_from_u64(2)});
  rig.l1.schedule({2, ref.contract, ref.slot, bytes32_from_u64(1), 0});

  auto d = rig.validate(make_transfer(1, 2, 100, 0));
  REQUIRE(d.action == TxAction::Delay);
  REQUIRE(d.reject_stage == RejectStage::None);
  REQUIRE(d.drift.size() == 1);
  REQUIRE(d.drift[0].in_flight);
  REQUIRE(d.severity_total == rig.cfg.delay_threshold);
  REQUIRE(d.retry_block == 2);

  // Once the write confirms and the cache syncs, the retry goes through.
  for (const auto& dep : rig.l1.advance_to(2))
    rig.cache.write_through(SlotRef{dep.contract, dep.slot},
                            static_cast<int64_t>(u64_from_bytes32(dep.value)));
  auto d2 = rig.validate(make_transfer(1, 2, 100, 1));
  REQUIRE(d2.action == TxAction::Accept);
}

TEST_CASE("oracle drift severity scales with relative deviation") {
  Rig swap_rig("");  // no rules; stage-2 still reads the oracle for swaps

  SECTION("half a percent off delays") {
    swap_rig.set_price(10'000, 10'050);
    auto d = swap_rig.validate(make_swap(1, 100, 0, 0));
    REQUIRE(d.action == TxAction::Delay);
    REQUIRE(d.oracle_price == 10'050);
    REQUIRE(d.severity_total == 50);  // 5 permille x 10
    REQUIRE(d.retry_block == 1);      // no in-flight writes: next block

    // The divergence scan resynced the price; the retry accepts.
    auto d2 = swap_rig.validate(make_swap(1, 100, 0, 1));
    REQUIRE(d2.action == TxAction::Accept);
    REQUIRE(d2.oracle_price == 10'000);
  }

  SECTION("a hair off is informational and accepted") {
    swap_rig.set_price(10'000, 10'001);
    auto d = swap_rig.validate(make_swap(1, 100, 0, 0));
    REQUIRE(d.action == TxAction::Accept);
    REQUIRE(d.severity_total == swap_rig.cfg.informational_severity);
    REQUIRE(d.drift.size() == 1);
  }

  SECTION("ten percent off rejects") {
    swap_rig.set_price(10'000, 11'000);
    auto d = swap_rig.validate(make_swap(1, 100, 0, 0));
    REQUIRE(d.action == TxAction::Reject);
    REQUIRE(d.reject_stage == RejectStage::StateDrift);
    REQUIRE(d.severity_total == 1000);
  }

  SECTION("cached price with no confirmed value rejects outright") {
    auto ref = swap_rig.slot("OraclePrice", Value{kOracleAssetId});
    swap_rig.cache.write_through(ref, 5);  // confirmed side still zero
    auto d = swap_rig.validate(make_swap(1, 100, 0, 0));
    REQUIRE(d.action == TxAction::Reject);
    REQUIRE(d.severity_total == swap_rig.cfg.reject_threshold);
  }
}

TEST_CASE("repeated reads of one slot produce a single drift entry") {
  Rig rig(
      "rule a on transfer(address,uint256): Whitelist[to] = 1\n"
      "rule b on transfer(address,uint256): Whitelist[to] < 2\n");
  rig.cfg.resync_on_drift = false;
  rig.set_flag("Whitelist", 2, 0, false);
  auto d = rig.validate(make_transfer(1, 2, 100, 0));
  REQUIRE(d.drift.size() == 1);
  REQUIRE(d.severity_total == rig.cfg.eligibility_severity);
  REQUIRE(d.settlement_reads.size() == 2);  // settlement still sees every read
}

TEST_CASE("tracker blindness eta lets stale reads through to settlement") {
  Rig rig;
  rig.cfg.eta = 1.0;  // every read escapes the tracker
  Rng eta_rng(7);
  rig.set_flag("Whitelist", 2, 0, false);  // stale cache, rule still satisfied

  auto d = rig.validate(make_transfer(1, 2, 100, 0), &eta_rng);
  REQUIRE(d.action == TxAction::Accept);  // drift never observed
  REQUIRE(d.drift.empty());
  REQUIRE(d.settlement_reads.size() == 1);

  SettlementRecord rec{make_transfer(1, 2, 100, 0), 0, d.settlement_reads};
  auto out = settle_l1(rec, rig.l1.state());
  REQUIRE_FALSE(out.ok);  // settlement catches what the tracker missed
  REQUIRE(out.expected == 0);
  REQUIRE(out.used == 1);
}

TEST_CASE("baseline mode skips the divergence scan entirely") {
  Rig rig;
  rig.cfg.state_checks = false;
  rig.set_flag("Whitelist", 2, 0, false);
  auto d = rig.validate(make_transfer(1, 2, 100, 0));
  REQUIRE(d.action == TxAction::Accept);
  REQUIRE(d.drift.empty());
  REQUIRE(d.settlement_reads.size() == 1);  // reads still published
  SettlementRecord rec{make_transfer(1, 2, 100, 0), 0, d.settlement_reads};
  REQUIRE_FALSE(settle_l1(rec, rig.l1.state()).ok);
}

TEST_CASE("cached state view resolves l2-native maps without the cache") {
  Rig rig;
  rig.l2.record_volume(0, address_from_u64(1), 777);
  CachedStateView view(rig.l2, rig.cache, rig.l1, rig.registry, 0.0, nullptr);
  REQUIRE(view.lookup("balance", Value{address_from_u64(1)}) == 1'000'000);
  REQUIRE(view.lookup("Volume24h", Value{address_from_u64(1)}) == 777);
  REQUIRE(view.lookup("Volume24h", Value{address_from_u64(3)}) == 0);
  REQUIRE(view.reads().empty());  // nothing crossed layers

  REQUIRE(view.lookup("Whitelist", Value{address_from_u64(1)}) == 1);
  REQUIRE(view.reads().size() == 1);
  REQUIRE(view.reads()[0].map == "Whitelist");
  REQUIRE(view.reads()[0].visible);

  // Declared rule-file maps with no L1 backing read as empty.
  REQUIRE(view.lookup("CustomList", Value{address_from_u64(1)}) == 0);
  REQUIRE(view.reads().size() == 1);

  REQUIRE_FALSE(view.lookup("balance", Value{int64_t{5}}).has_value());
}

TEST_CASE("fail-rate bound formula") {
  REQUIRE(FailRateResult::bound(0.0, 0.0, 1000) == 0.0);
  REQUIRE(FailRateResult::bound(0.01, 0.02, 0) == Catch::Approx(0.03));
  double b = FailRateResult::bound(0.002, 0.003, 100'000);
  REQUIRE(b == Catch::Approx(0.005 + 3.0 * std::sqrt(0.005 / 100'000)));
}

TEST_CASE("fail rate is exactly zero when either leak channel is closed") {
  auto no_eps = estimate_fail_rate(0.0, 0.5, 5'000, 11);
  REQUIRE(no_eps.accepted == 5'000);
  REQUIRE(no_eps.settlement_failures == 0);
  REQUIRE(no_eps.p_fail == 0.0);

  auto no_eta = estimate_fail_rate(0.5, 0.0, 5'000, 12);
  REQUIRE(no_eta.settlement_failures == 0);
  REQUIRE(no_eta.p_fail == 0.0);
  REQUIRE(no_eta.rejected > 0);  // the tracker caught the stale reads instead
}

TEST_CASE("fail rate matches the closed-form stale-and-unseen probability") {
  // A read is served stale w.p. epsilon and escapes the tracker w.p. eta;
  // stale-and-seen is rejected, so conditioning on acceptance gives
  // p = eps*eta / (1 - eps*(1 - eta)).
  auto closed_form = [](double eps, double eta) {
    return eps * eta / (1.0 - eps * (1.0 - eta));
  };

  auto big = estimate_fail_rate(0.5, 0.5, 30'000, 13);
  REQUIRE(big.p_fail == Catch::Approx(closed_form(0.5, 0.5)).margin(0.015));

  auto mid = estimate_fail_rate(0.3, 0.2, 30'000, 14);
  REQUIRE(mid.p_fail == Catch::Approx(closed_form(0.3, 0.2)).margin(0.01));

  auto small = estimate_fail_rate(0.05, 0.1, 30'000, 15);
  REQUIRE(small.p_fail == Catch::Approx(closed_form(0.05, 0.1)).margin(0.005));

  // All within the advertised bound as well.
  for (const auto* r : {&big, &mid, &small}) REQUIRE(r->generated > 0);
  REQUIRE(big.p_fail <= FailRateResult::bound(0.5, 0.5, big.accepted));
  REQUIRE(mid.p_fail <= FailRateResult::bound(0.3, 0.2, mid.accepted));
  REQUIRE(small.p_fail <= FailRateResult::bound(0.05, 0.1, small.accepted));
}
