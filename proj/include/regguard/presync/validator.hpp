// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "regguard/chain/core.hpp"
#include "regguard/chain/state.hpp"
#include "regguard/presync/cache.hpp"
#include "regguard/regspec/eval.hpp"

namespace regguard::presync {

using chain::CrossLayerRead;
using chain::ExecStatus;
using chain::L1Chain;
using chain::L1Registry;
using chain::L2State;
using chain::SlotRef;
using chain::TimeUs;
using chain::Transaction;

/// One cross-layer read observed during validation. `visible` marks whether
/// the validator's dependency tracker captured it; settlement always sees
/// the full set, the tracker may not.
struct ReadRecord {
  std::string map;
  SlotRef slot;
  int64_t value_used = 0;
  bool visible = true;
};

/// Rule-language state view that resolves L2-native maps from L2 state and
/// everything in the L1 registry through the cache, recording each
/// cross-layer read as it happens.
class CachedStateView : public regspec::StateView {
 public:
  CachedStateView(const L2State& l2, L1Cache& cache, const L1Chain& l1,
                  const L1Registry& registry, double eta, Rng* eta_rng)
      : l2_(l2), cache_(cache), l1_(l1), registry_(registry), eta_(eta), eta_rng_(eta_rng) {}

  std::optional<int64_t> lookup(const std::string& map, const Value& key) const override {
    if (map == "balance") {
      if (const auto* a = std::get_if<Address>(&key)) return l2_.balance_of(*a);
      return std::nullopt;
    }
    if (map == "Volume24h") {
      if (const auto* a = std::get_if<Address>(&key)) return l2_.volume_of(*a);
      return std::nullopt;
    }
    if (registry_.find(map)) {
      auto ref = registry_.slot_for(map, key);
      if (!ref) return std::nullopt;
      int64_t v = cache_.read(*ref, l1_.state(), l1_.block());
      bool visible = !(eta_rng_ && eta_ > 0.0 && eta_rng_->chance(eta_));
      reads_.push_back({map, *ref, v, visible});
      return v;
    }
    // Declared rule-file maps with no L1 backing read as empty.
    return 0;
  }

  const std::vector<ReadRecord>& reads() const { return reads_; }

 private:
  const L2State& l2_;
  L1Cache& cache_;
  const L1Chain& l1_;
  const L1Registry& registry_;
  double eta_;
  Rng* eta_rng_;
  mutable std::vector<ReadRecord> reads_;
};

enum class TxAction : uint8_t { Accept, Delay, Reject };

inline const char* to_string(TxAction a) {
  switch (a) {
    case TxAction::Accept: return "accept";
    case TxAction::Delay: return "delay";
    case TxAction::Reject: return "reject";
  }
  return "?";
}

enum class RejectStage : uint8_t { None, Semantic, Execution, StateDrift };

/// One entry of the divergence set the validator computed: a cross-layer
/// read whose cached value disagrees with confirmed L1, or whose slot has
/// in-flight L1 writes.
struct DriftEntry {
  std::string map;
  SlotRef slot;
  int64_t cached = 0;
  int64_t confirmed = 0;
  bool in_flight = false;
  uint32_t severity = 0;
};

struct TxDecision {
  TxAction action = TxAction::Accept;
  RejectStage reject_stage = RejectStage::None;
  std::string reason;
  regspec::SemanticVerdict semantic;
  ExecStatus exec = ExecStatus::Ok;
  std::vector<DriftEntry> drift;
  uint32_t severity_total = 0;
  std::optional<uint64_t> retry_block;  // for Delay: when dependencies settle
  std::vector<CrossLayerRead> settlement_reads;
  int64_t oracle_price = 0;  // price in effect for swap execution

  bool accepted() const { return action == TxAction::Accept; }
};

struct ValidatorConfig {
  bool state_checks = true;  // false = admit on semantics alone (baseline)
  uint32_t delay_threshold = 10;
  uint32_t reject_threshold = 100;
  uint32_t eligibility_severity = 100;
  uint32_t informational_severity = 1;
  uint32_t oracle_severity_per_permille = 10;
  double eta = 0.0;  // probability a read escapes the dependency tracker
  bool resync_on_drift = true;
  std::set<std::string> eligibility_maps = {"Whitelist", "Sanctions", "EDD"};
  std::set<std::string> oracle_maps = {"OraclePrice"};
};

namespace valdetail {

inline uint32_t severity_of(const ValidatorConfig& cfg, const std::string& map, int64_t cached,
                            int64_t confirmed, bool in_flight) {
  if (in_flight) return cfg.delay_threshold;
  if (cfg.eligibility_maps.count(map)) return cfg.eligibility_severity;
  if (cfg.oracle_maps.count(map)) {
    if (confirmed == 0) return cfg.reject_threshold;
    double rel = static_cast<double>(cached > confirmed ? cached - confirmed : confirmed - cached) /
                 static_cast<double>(confirmed > 0 ? confirmed : -confirmed);
    auto permille = static_cast<uint64_t>(rel * 1000.0 + 0.5);
    uint64_t sev = permille * cfg.oracle_severity_per_permille;
    if (sev == 0) sev = cfg.informational_severity;
    return static_cast<uint32_t>(std::min<uint64_t>(sev, 1'000'000));
  }
  return cfg.informational_severity;
}

}  // namespace valdetail

/// Full admission check for one transaction: rule semantics evaluated over
/// the synchronized cache, a sandboxed execution feasibility pass, then the
/// cross-layer divergence scan with severity-scored accept / delay / reject.
/// With `state_checks` off only the first two stages run, which is the
/// baseline configuration the guarded pipeline is compared against.
inline TxDecision validate_tx(const Transaction& tx, const L2State& l2, L1Cache& cache,
                              const L1Chain& l1, const L1Registry& registry,
                              const regspec::RuleSet& rules,
                              const regspec::StateSchema& schema, const ValidatorConfig& cfg,
                              Rng* eta_rng, regspec::EvalCounters* counters = nullptr) {
  TxDecision d;
  CachedStateView view(l2, cache, l1, registry, cfg.eta, eta_rng);

  // Stage 1: policy rules over the cached regulatory state.
  auto env = chain::bind_params(tx, schema);
  d.semantic = regspec::validate_semantic(rules, tx.function, env, view, counters);
  if (!d.semantic.legitimate()) {
    d.action = TxAction::Reject;
    d.reject_stage = RejectStage::Semantic;
    d.reason = "rule '" + d.semantic.failing_rule + "': " + d.semantic.reason;
    return d;
  }

  // Stage 2: sandboxed execution feasibility, with the oracle price pulled
  // through the same recorded-read channel.
  if (tx.function == "swap(uint256,uint256)") {
    auto price = view.lookup("OraclePrice", Value{chain::kOracleAssetId});
    d.oracle_price = price.value_or(0);
  }
  d.exec = chain::exec_check(l2, tx, d.oracle_price).status;
  if (d.exec != ExecStatus::Ok) {
    d.action = TxAction::Reject;
    d.reject_stage = RejectStage::Execution;
    d.reason = std::string("execution check failed: ") + chain::to_string(d.exec);
    return d;
  }

  // The batch publishes every read it acted on, visible to the tracker or
  // not; settlement verifies them all.
  for (const auto& r : view.reads()) d.settlement_reads.push_back({r.slot, r.value_used});

  if (!cfg.state_checks) return d;

  // Stage 3: divergence set over tracked reads, severity scoring, decision.
  std::vector<DriftEntry> drift;
  for (const auto& r : view.reads()) {
    if (!r.visible) continue;
    int64_t confirmed = l1.state().read_i64(r.slot.contract, r.slot.slot);
    bool in_flight = l1.has_pending(r.slot);
    if (confirmed == r.value_used && !in_flight) continue;
    DriftEntry e;
    e.map = r.map;
    e.slot = r.slot;
    e.cached = r.value_used;
    e.confirmed = confirmed;
    e.in_flight = in_flight;
    e.severity = valdetail::severity_of(cfg, r.map, r.value_used, confirmed, in_flight);
    drift.push_back(e);
  }
  std::sort(drift.begin(), drift.end(), [](const DriftEntry& a, const DriftEntry& b) {
    return a.slot != b.slot ? a.slot < b.slot : a.map < b.map;
  });
  drift.erase(std::unique(drift.begin(), drift.end(),
                          [](const DriftEntry& a, const DriftEntry& b) {
                            return a.slot == b.slot && a.map == b.map;
                          }),
              drift.end());
  d.drift = drift;
  uint64_t total = 0;
  for (const auto& e : d.drift) total += e.severity;
  d.severity_total = static_cast<uint32_t>(std::min<uint64_t>(total, UINT32_MAX));

  if (cfg.resync_on_drift) {
    for (const auto& e : d.drift)
      if (!e.in_flight && e.cached != e.confirmed) cache.resync(e.slot, l1.state());
  }

  if (d.severity_total >= cfg.reject_threshold) {
    d.action = TxAction::Reject;
    d.reject_stage = RejectStage::StateDrift;
    d.reason = "cross-layer divergence, severity " + std::to_string(d.severity_total);
  } else if (d.severity_total >= cfg.delay_threshold) {
    d.action = TxAction::Delay;
    uint64_t retry = l1.block() + 1;
    for (const auto& e : d.drift) {
      if (e.in_flight) {
        if (auto b = l1.earliest_pending_block(e.slot)) retry = std::max(retry, *b);
      }
    }
    d.retry_block = retry;
    d.reason = "cross-layer divergence, severity " + std::to_string(d.severity_total);
  }
  return d;
}

}  // namespace regguard::presync
