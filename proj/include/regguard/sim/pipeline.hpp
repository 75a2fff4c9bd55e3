// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "regguard/chain/core.hpp"
#include "regguard/chain/state.hpp"
#include "regguard/ordering/encrypted_tx.hpp"
#include "regguard/ordering/fairness.hpp"
#include "regguard/ordering/group.hpp"
#include "regguard/ordering/threshold.hpp"
#include "regguard/ordering/window.hpp"
#include "regguard/presync/cache.hpp"
#include "regguard/presync/validator.hpp"
#include "regguard/regspec/parse.hpp"
#include "regguard/sim/config.hpp"
#include "regguard/sim/metrics.hpp"
#include "regguard/sim/workload.hpp"
#include "regguard/util/crypto.hpp"
#include "regguard/util/rng.hpp"

namespace regguard::sim {

using chain::L1Chain;
using chain::L1Registry;
using chain::L2State;
using chain::SettlementRecord;
using chain::SlotRef;
using presync::L1Cache;
using presync::TxAction;
using presync::TxDecision;
using presync::ValidatorConfig;

/// Default policy when no rules file is given: recipients must be
/// whitelisted and must not be sanctioned.
inline constexpr const char* kBuiltinRules =
    "rule recipient_whitelisted on transfer(address,uint256): Whitelist[to] = 1\n"
    "rule recipient_not_sanctioned on transfer(address,uint256): Sanctions[to] = 0\n";

/// End-to-end run of the guarded pipeline over a simulated two-layer chain:
/// open-loop traffic is threshold-encrypted, stamped and ordered per window,
/// released, admitted through the three validation stages, executed on L2
/// and finally settled against confirmed L1 state.
class Pipeline {
 public:
  explicit Pipeline(const ScenarioConfig& cfg, const std::string& rules_source = "")
      : cfg_(cfg),
        schema_(regspec::StateSchema::standard()),
        registry_(L1Registry::standard()),
        l1_(cfg.block_seconds),
        cache_(cfg.cache_capacity),
        pop_(Population::build(cfg)),
        workload_(cfg_, pop_),
        group_(ordering::PrimeGroup::by_name(cfg.group)),
        cache_rng_(cfg.seed, "cache"),
        eta_rng_(cfg.seed, "eta"),
        dkg_rng_(cfg.seed, "dkg"),
        enc_rng_(cfg.seed, "enc"),
        jitter_rng_(cfg.seed, "jitter"),
        churn_rng_(cfg.seed, "churn"),
        adversary_rng_(cfg.seed, "adversary") {
    cfg_.validate();
    auto parsed =
        regspec::parse_rules(rules_source.empty() ? kBuiltinRules : rules_source, schema_);
    if (!parsed.ok()) {
      std::string msg = "rule set rejected";
      for (const auto& d : parsed.diagnostics) msg += "\n  " + d.format();
      throw std::runtime_error(msg);
    }
    rules_ = std::move(parsed.rules);
    schema_ = std::move(parsed.schema);

    vcfg_.state_checks = cfg_.guarded;
    vcfg_.delay_threshold = cfg_.delay_threshold;
    vcfg_.reject_threshold = cfg_.reject_threshold;
    vcfg_.eta = cfg_.eta;

    presync::FreshnessModel model = presync::FreshnessModel::Exact;
    if (cfg_.freshness_model == "bernoulli") model = presync::FreshnessModel::Bernoulli;
    if (cfg_.freshness_model == "blocklag") model = presync::FreshnessModel::BlockLag;
    cache_.set_freshness(model, cfg_.epsilon, &cache_rng_);

    oracle_slot_ = *registry_.slot_for("OraclePrice", Value{chain::kOracleAssetId});
    workload_.set_reference_price(cfg_.oracle_initial_price);
    init_genesis();
  }

  RunMetrics run() {
    for (uint64_t w = 0; w < cfg_.windows; ++w) {
      TimeUs t0 = w * cfg_.window_us();
      advance_chain_to(l1_.block_at(t0));
      metrics_.windows_run++;
      auto arrivals = collect_arrivals(w, t0);
      if (!arrivals.empty()) run_window(w, t0, std::move(arrivals));
    }
    flush_settlement();
    finalize_metrics();
    check_conservation();
    return metrics_;
  }

  const L2State& l2() const { return l2_; }
  const L1Chain& l1() const { return l1_; }
  const RunMetrics& metrics() const { return metrics_; }

 private:
  struct Arrival {
    Transaction tx;
    TimeUs arrival = 0;
    bool malicious = false;
    uint32_t retries = 0;
  };
  struct DelayedTx {
    Transaction tx;
    uint64_t retry_block = 0;
    uint32_t retries = 0;
    bool malicious = false;
  };
  struct PendingSync {
    uint64_t due_block = 0;
    SlotRef slot;
    int64_t value = 0;
  };
  struct PendingSettle {
    uint64_t due_block = 0;
    SettlementRecord rec;
  };
  struct TxLabel {
    TimeUs arrival = 0;
    bool malicious = false;
    uint32_t retries = 0;
  };

  void init_genesis() {
    auto& st = l1_.mutable_state();
    for (size_t i = 0; i < pop_.accounts.size(); ++i) {
      const Address& a = pop_.accounts[i];
      auto wls = registry_.slot_for("Whitelist", Value{a}).value();
      st.write_i64(wls.contract, wls.slot, 1);
      if (pop_.edd_flagged(i)) {
        auto s = registry_.slot_for("EDD", Value{a}).value();
        st.write_i64(s.contract, s.slot, 1);
      }
      l2_.balance[a] = cfg_.initial_balance;
      whitelist_sched_.push_back(1);
    }
    auto sanc = registry_.slot_for("Sanctions", Value{pop_.sanctioned}).value();
    st.write_i64(sanc.contract, sanc.slot, 1);
    auto wl = registry_.slot_for("Whitelist", Value{pop_.sanctioned}).value();
    st.write_i64(wl.contract, wl.slot, 1);  // listed but sanctioned
    st.write_i64(oracle_slot_.contract, oracle_slot_.slot, cfg_.oracle_initial_price);
    scheduled_price_ = cfg_.oracle_initial_price;

    l2_.balance[pop_.exploiter] = cfg_.initial_balance * 100;
    l2_.balance_b[l2_.swap_pool] = int64_t{1} << 50;
    int64_t funded = 0;
    for (const auto& [a, v] : l2_.balance) funded += v;
    l2_.total_minted = funded;
  }

  uint64_t sync_delay_for(const SlotRef& ref) const {
    return ref.contract == oracle_slot_.contract ? cfg_.oracle_sync_delay_blocks
                                                 : cfg_.flag_sync_delay_blocks;
  }

  /// One L1 block step: new oracle/flag publications enter the pending set,
  /// writes due this block confirm, confirmed writes reach the cache after
  /// their sync delay, and settlement records due this block are verified.
  void advance_chain_to(uint64_t target) {
    for (uint64_t b = l1_.block() + 1; b <= target; ++b) {
      decide_churn(b);
      auto applied = l1_.advance_to(b);
      for (const auto& dep : applied) {
        uint64_t due = b + sync_delay_for({dep.contract, dep.slot});
        int64_t v = static_cast<int64_t>(u64_from_bytes32(dep.value));
        sync_queue_.push_back({due, {dep.contract, dep.slot}, v});
      }
      auto due_now = [&](const PendingSync& s) { return s.due_block <= b; };
      for (const auto& s : sync_queue_)
        if (due_now(s)) cache_.write_through(s.slot, s.value, b);
      sync_queue_.erase(std::remove_if(sync_queue_.begin(), sync_queue_.end(), due_now),
                        sync_queue_.end());
      settle_due(b);
    }
  }

  void decide_churn(uint64_t boundary) {
    if (cfg_.oracle_enabled && churn_rng_.chance(cfg_.oracle_move_probability)) {
      int64_t delta = scheduled_price_ * cfg_.oracle_move_permille / 1000;
      if (delta == 0) delta = 1;
      scheduled_price_ += churn_rng_.chance(0.5) ? delta : -delta;
      if (scheduled_price_ < 1) scheduled_price_ = 1;
      l1_.schedule({boundary + cfg_.oracle_confirm_blocks, oracle_slot_.contract,
                    oracle_slot_.slot, bytes32_from_u64(static_cast<uint64_t>(scheduled_price_)),
                    0});
    }
    if (cfg_.flag_flip_probability > 0 && churn_rng_.chance(cfg_.flag_flip_probability)) {
      size_t i = churn_rng_.uniform_u64(pop_.accounts.size());
      whitelist_sched_[i] = 1 - whitelist_sched_[i];
      auto s = registry_.slot_for("Whitelist", Value{pop_.accounts[i]}).value();
      l1_.schedule({boundary + cfg_.flag_confirm_blocks, s.contract, s.slot,
                    bytes32_from_u64(static_cast<uint64_t>(whitelist_sched_[i])), 0});
    }
  }

  void settle_due(uint64_t block) {
    auto due = [&](const PendingSettle& p) { return p.due_block <= block; };
    for (const auto& p : settle_queue_) {
      if (!due(p)) continue;
      auto outcome = chain::settle_l1(p.rec, l1_.state());
      metrics_.settled++;
      if (!outcome.ok) metrics_.settlement_failures++;
    }
    settle_queue_.erase(std::remove_if(settle_queue_.begin(), settle_queue_.end(), due),
                        settle_queue_.end());
  }

  void flush_settlement() {
    uint64_t target = l1_.block();
    for (const auto& p : settle_queue_) target = std::max(target, p.due_block);
    advance_chain_to(target);
    settle_due(target);
  }

  std::vector<Arrival> collect_arrivals(uint64_t w, TimeUs t0) {
    std::vector<Arrival> out;
    uint64_t resub = 0;
    auto due = [&](const DelayedTx& d) { return d.retry_block <= l1_.block(); };
    for (const auto& d : delayed_) {
      if (!due(d)) continue;
      out.push_back({d.tx, t0 + 1000 * resub++, d.malicious, d.retries});
    }
    delayed_.erase(std::remove_if(delayed_.begin(), delayed_.end(), due), delayed_.end());

    if (cfg_.adversary == AdversaryKind::StaleExploit && cfg_.oracle_enabled &&
        l1_.has_pending(oracle_slot_)) {
      int64_t confirmed_price = l1_.state().read_i64(oracle_slot_.contract, oracle_slot_.slot);
      Transaction tx;
      tx.from = pop_.exploiter;
      tx.nonce = exploiter_nonce_++;
      tx.function = "swap(uint256,uint256)";
      int64_t amount = cfg_.amount_max * 10;
      tx.args = {Value{amount}, Value{amount * confirmed_price / chain::kPriceScale}};
      chain::Keyring::sign(tx);
      out.push_back({std::move(tx), t0 + 500, true, 0});
      metrics_.generated++;
      metrics_.malicious_injected++;
    }

    for (auto& g : workload_.window_arrivals(w)) {
      metrics_.generated++;
      if (g.malicious) metrics_.malicious_injected++;
      out.push_back({std::move(g.tx), g.arrival, g.malicious, 0});
    }
    std::sort(out.begin(), out.end(), [](const Arrival& a, const Arrival& b) {
      return a.arrival != b.arrival ? a.arrival < b.arrival
                                    : a.tx.canonical_bytes() < b.tx.canonical_bytes();
    });
    return out;
  }

  std::array<uint8_t, 32> member_key(uint32_t member) const {
    ByteWriter wtr;
    wtr.str("stamp-key");
    wtr.u32be(member);
    return sha256(wtr.bytes()).bytes;
  }

  void run_window(uint64_t w, TimeUs t0, std::vector<Arrival> arrivals) {
    uint32_t n = cfg_.committee_n;
    uint32_t byz = cfg_.byzantine_members();
    auto keys = ordering::dkg(group_, {n, cfg_.committee_t}, dkg_rng_);

    std::vector<ordering::ArrivalRecord> records;
    records.reserve(arrivals.size());
    for (const auto& a : arrivals) {
      ordering::ArrivalRecord rec;
      rec.enc = ordering::encrypt_tx(group_, keys.public_key, a.tx.canonical_bytes(), enc_rng_);
      rec.stamps.reserve(n);
      for (uint32_t m = 1; m <= n; ++m) {
        int64_t observed = static_cast<int64_t>(a.arrival) +
                           static_cast<int64_t>(jitter_rng_.normal(0.0, cfg_.stamp_jitter_std_us));
        if (m > n - byz) observed += cfg_.byzantine_skew_us;
        if (observed < 0) observed = 0;
        rec.stamps.push_back(ordering::make_stamp(m, member_key(m), rec.enc.link_hash,
                                                  static_cast<TimeUs>(observed)));
      }
      book_[rec.enc.link_hash] = {a.arrival, a.malicious, a.retries};
      records.push_back(std::move(rec));
    }

    ordering::OrderedBatch batch;
    if (cfg_.adversary == AdversaryKind::MevPrecommit) {
      // A sequencer that ignores the attested arrivals and picks its own
      // order. It still has to commit before decryption.
      std::sort(records.begin(), records.end(),
                [](const ordering::ArrivalRecord& x, const ordering::ArrivalRecord& y) {
                  return x.enc.link_hash < y.enc.link_hash;
                });
      batch.window_index = w;
      for (auto& r : records) batch.order.push_back(std::move(r.enc));
      batch.commitment = ordering::batch_commitment(batch);
    } else {
      batch = ordering::order_window(w, std::move(records));
    }

    std::vector<uint32_t> responsive;
    for (uint32_t m = 1; m <= n - byz; ++m) responsive.push_back(m);
    auto release = ordering::release_batch(group_, batch, keys, responsive);
    if (!release.released) {
      metrics_.release_failures++;
      for (const auto& e : batch.order) book_.erase(e.link_hash);
      return;
    }
    metrics_.batches_released++;
    metrics_.undecryptable += release.undecryptable.size();

    if (release.undecryptable.empty()) {
      if (ordering::audit_execution(batch, release.tx_bytes).has_value())
        metrics_.false_evidence++;
    }
    if (cfg_.adversary == AdversaryKind::MevPostcommit && batch.order.size() >= 2) {
      auto claimed = release.tx_bytes;
      size_t i = adversary_rng_.uniform_u64(claimed.size());
      size_t j = adversary_rng_.uniform_u64(claimed.size() - 1);
      if (j >= i) ++j;
      std::swap(claimed[i], claimed[j]);
      metrics_.deviant_batches++;
      if (auto ev = ordering::audit_execution(batch, claimed)) {
        metrics_.evidence_produced++;
        if (ordering::verify_evidence(*ev) == ordering::EvidenceVerdict::Valid)
          metrics_.evidence_valid++;
      }
    }

    measure_window_fairness(batch);
    execute_ordered(w, t0, batch, release);
  }

  void measure_window_fairness(const ordering::OrderedBatch& batch) {
    std::vector<ordering::OrderedArrival> seq;
    seq.reserve(batch.order.size());
    for (size_t p = 0; p < batch.order.size(); ++p) {
      auto it = book_.find(batch.order[p].link_hash);
      if (it == book_.end()) continue;
      seq.push_back({it->second.arrival, p});
    }
    auto rep = ordering::measure_fairness(seq, cfg_.effective_alpha_us());
    metrics_.qualifying_pairs += rep.qualifying_pairs;
    metrics_.order_violations += rep.violations;
  }

  void execute_ordered(uint64_t w, TimeUs t0, const ordering::OrderedBatch& batch,
                       const ordering::ReleaseResult& release) {
    TimeUs t_exec = t0 + cfg_.window_us();
    l2_.expire_volume(t_exec);
    uint64_t settle_block = l1_.block_at(t0) + cfg_.settlement_lag_blocks;

    for (size_t p = 0; p < batch.order.size(); ++p) {
      const Bytes32& link = batch.order[p].link_hash;
      TxLabel label = book_[link];
      book_.erase(link);
      if (std::find(release.undecryptable.begin(), release.undecryptable.end(), p) !=
          release.undecryptable.end())
        continue;

      Transaction tx;
      try {
        tx = chain::transaction_from_bytes(release.tx_bytes[p], schema_);
      } catch (const std::exception&) {
        metrics_.syn_rejected++;
        continue;
      }
      auto syn = chain::syn_legit(tx, schema_, l2_.nonces);
      if (!syn.ok) {
        metrics_.syn_rejected++;
        if (label.malicious) metrics_.malicious_contained++;
        continue;
      }

      TxDecision d = validate_tx(tx, l2_, cache_, l1_, registry_, rules_, schema_, vcfg_,
                                 &eta_rng_, &counters_);
      switch (d.action) {
        case TxAction::Accept: {
          metrics_.accepted++;
          if (label.malicious) metrics_.malicious_leaked++;
          auto res = chain::apply_l2(l2_, tx, t_exec, d.oracle_price);
          if (!res.ok()) {
            metrics_.apply_failed++;
            break;
          }
          metrics_.applied++;
          settle_queue_.push_back({settle_block, {tx, w, d.settlement_reads}});
          break;
        }
        case TxAction::Delay: {
          metrics_.delays++;
          if (label.retries + 1 > cfg_.max_retries) {
            metrics_.delay_expired++;
            if (label.malicious) metrics_.malicious_contained++;
            break;
          }
          uint64_t rb = d.retry_block.value_or(l1_.block() + 1);
          delayed_.push_back({tx, rb, label.retries + 1, label.malicious});
          break;
        }
        case TxAction::Reject: {
          switch (d.reject_stage) {
            case presync::RejectStage::Semantic: metrics_.semantic_rejected++; break;
            case presync::RejectStage::Execution: metrics_.exec_rejected++; break;
            default: metrics_.state_rejected++; break;
          }
          if (label.malicious) metrics_.malicious_contained++;
          break;
        }
      }
    }
  }

  void finalize_metrics() {
    metrics_.alpha_us = cfg_.effective_alpha_us();
    const auto& cs = cache_.stats;
    metrics_.cache_reads = cs.reads;
    metrics_.cache_hits = cs.hits;
    metrics_.cache_misses = cs.misses;
    metrics_.cache_evictions = cs.evictions;
    metrics_.cache_divergent = cs.divergent_serves;
  }

  void check_conservation() {
    if (l2_.balance_sum() != l2_.total_minted - l2_.total_redeemed)
      throw std::logic_error("ledger conservation violated after run");
  }

  ScenarioConfig cfg_;
  regspec::StateSchema schema_;
  L1Registry registry_;
  regspec::RuleSet rules_;
  L1Chain l1_;
  L1Cache cache_;
  L2State l2_;
  Population pop_;
  Workload workload_;
  const ordering::PrimeGroup& group_;
  ValidatorConfig vcfg_;
  RunMetrics metrics_;
  regspec::EvalCounters counters_;

  Rng cache_rng_;
  Rng eta_rng_;
  Rng dkg_rng_;
  Rng enc_rng_;
  Rng jitter_rng_;
  Rng churn_rng_;
  Rng adversary_rng_;

  SlotRef oracle_slot_;
  int64_t scheduled_price_ = 0;
  std::vector<int64_t> whitelist_sched_;
  uint64_t exploiter_nonce_ = 0;

  std::vector<DelayedTx> delayed_;
  std::vector<PendingSync> sync_queue_;
  std::vector<PendingSettle> settle_queue_;
  std::unordered_map<Bytes32, TxLabel> book_;
};

}  // namespace regguard::sim
