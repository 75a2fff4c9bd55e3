// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>

#include "regguard/util/toml.hpp"

namespace regguard::sim {

/// Which actor misbehaves during a run.
enum class AdversaryKind : uint8_t {
  None,
  MevPrecommit,   // sequencer ignores attested arrivals when ordering
  MevPostcommit,  // sequencer commits honestly, executes a different order
  StaleExploit,   // trader times swaps to known-stale oracle entries
};

inline const char* to_string(AdversaryKind k) {
  switch (k) {
    case AdversaryKind::None: return "none";
    case AdversaryKind::MevPrecommit: return "mev_precommit";
    case AdversaryKind::MevPostcommit: return "mev_postcommit";
    case AdversaryKind::StaleExploit: return "stale_exploit";
  }
  return "?";
}

struct ScenarioConfig {
  // [scenario]
  std::string name = "default";
  uint64_t seed = 1;
  uint64_t windows = 100;
  bool guarded = true;  // false: admission runs without cross-layer checks

  // [chain]
  uint64_t window_seconds = 2;
  uint64_t block_seconds = 12;
  uint64_t settlement_lag_blocks = 1;

  // [workload]
  std::string rules_file;  // empty: built-in eligibility rule set
  uint64_t accounts = 200;
  double tx_rate_per_window = 20.0;
  double transfer_weight = 0.6;
  double swap_weight = 0.2;
  double bridge_weight = 0.2;
  int64_t amount_min = 1;
  int64_t amount_max = 1000;
  int64_t initial_balance = 100'000;
  double malicious_fraction = 0.0;

  // [cache]
  uint64_t cache_capacity = 10'000;
  std::string freshness_model = "exact";  // exact | bernoulli | blocklag
  double epsilon = 0.0;

  // [validator]
  uint32_t delay_threshold = 10;
  uint32_t reject_threshold = 100;
  uint32_t max_retries = 3;
  double eta = 0.0;

  // [oracle]
  bool oracle_enabled = false;
  double oracle_move_probability = 0.2;  // per block
  int64_t oracle_move_permille = 30;     // size of each move
  uint64_t oracle_confirm_blocks = 1;    // publish-to-confirmation latency
  uint64_t oracle_sync_delay_blocks = 3; // confirmation-to-cache latency
  int64_t oracle_initial_price = 10'000;

  // [compliance]
  double flag_flip_probability = 0.0;  // per block
  uint64_t flag_confirm_blocks = 1;
  uint64_t flag_sync_delay_blocks = 0;

  // [committee]
  uint32_t committee_n = 10;
  uint32_t committee_t = 6;
  std::string group = "bits62";
  double stamp_jitter_std_us = 3000.0;
  uint64_t alpha_us = 0;  // 0: derived from the jitter spread
  double byzantine_fraction = 0.0;
  int64_t byzantine_skew_us = 250'000;

  // [adversary]
  AdversaryKind adversary = AdversaryKind::None;

  uint64_t window_us() const { return window_seconds * 1'000'000ull; }
  uint64_t block_us() const { return block_seconds * 1'000'000ull; }

  /// Fairness tolerance: explicit, or twice the 99th percentile of the
  /// honest stamp noise magnitude (|N(0,s)| has q99 = 2.576 s).
  uint64_t effective_alpha_us() const {
    if (alpha_us > 0) return alpha_us;
    return static_cast<uint64_t>(std::ceil(2.0 * 2.576 * stamp_jitter_std_us));
  }

  uint32_t byzantine_members() const {
    return static_cast<uint32_t>(byzantine_fraction * committee_n);
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw std::runtime_error("config: " + m); };
    if (windows == 0) fail("scenario.windows must be positive");
    if (window_seconds == 0 || block_seconds == 0) fail("chain timing must be positive");
    if (settlement_lag_blocks == 0) fail("chain.settlement_lag_blocks must be at least 1");
    if (block_seconds % window_seconds != 0)
      fail("chain.block_seconds must be a multiple of chain.window_seconds");
    if (accounts < 2) fail("workload.accounts must be at least 2");
    if (tx_rate_per_window < 0) fail("workload.tx_rate_per_window must be non-negative");
    double wsum = transfer_weight + swap_weight + bridge_weight;
    if (wsum <= 0 || transfer_weight < 0 || swap_weight < 0 || bridge_weight < 0)
      fail("workload class weights must be non-negative and sum above zero");
    if (amount_min < 0 || amount_max < amount_min) fail("workload amount range is invalid");
    if (malicious_fraction < 0 || malicious_fraction > 1)
      fail("workload.malicious_fraction must be in [0, 1]");
    if (epsilon < 0 || epsilon > 1) fail("cache.epsilon must be in [0, 1]");
    if (freshness_model != "exact" && freshness_model != "bernoulli" &&
        freshness_model != "blocklag")
      fail("cache.freshness_model must be exact, bernoulli or blocklag");
    if (eta < 0 || eta > 1) fail("validator.eta must be in [0, 1]");
    if (committee_t == 0 || committee_t > committee_n) fail("committee needs 1 <= t <= n");
    if (byzantine_fraction < 0 || byzantine_fraction > 1)
      fail("committee.byzantine_fraction must be in [0, 1]");
    if (oracle_move_probability < 0 || oracle_move_probability > 1)
      fail("oracle.move_probability must be in [0, 1]");
    if (flag_flip_probability < 0 || flag_flip_probability > 1)
      fail("compliance.flip_probability must be in [0, 1]");
    if (oracle_initial_price <= 0) fail("oracle.initial_price must be positive");
  }
};

namespace configdetail {

inline void read_str(const toml::Table& t, const std::string& key, std::string& out) {
  if (auto v = t.get_string(key)) out = *v;
}
inline void read_u64(const toml::Table& t, const std::string& key, uint64_t& out) {
  if (auto v = t.get_int(key)) {
    if (*v < 0) throw std::runtime_error("config: " + key + " must be non-negative");
    out = static_cast<uint64_t>(*v);
  }
}
inline void read_u32(const toml::Table& t, const std::string& key, uint32_t& out) {
  uint64_t tmp = out;
  read_u64(t, key, tmp);
  out = static_cast<uint32_t>(tmp);
}
inline void read_i64(const toml::Table& t, const std::string& key, int64_t& out) {
  if (auto v = t.get_int(key)) out = *v;
}
inline void read_f64(const toml::Table& t, const std::string& key, double& out) {
  if (auto v = t.get_float(key)) out = *v;
}
inline void read_bool(const toml::Table& t, const std::string& key, bool& out) {
  if (auto v = t.get_bool(key)) out = *v;
}

}  // namespace configdetail

/// Loads a scenario from config text, rejecting unknown keys so typos fail
/// loudly instead of silently running defaults.
inline ScenarioConfig scenario_from_toml(const std::string& text) {
  using namespace configdetail;
  toml::Table t = toml::Table::parse(text);

  static const std::set<std::string> known = {
      "scenario.name", "scenario.seed", "scenario.windows", "scenario.mode",
      "chain.window_seconds", "chain.block_seconds", "chain.settlement_lag_blocks",
      "workload.rules_file", "workload.accounts", "workload.tx_rate_per_window",
      "workload.transfer_weight", "workload.swap_weight", "workload.bridge_weight",
      "workload.amount_min", "workload.amount_max", "workload.initial_balance",
      "workload.malicious_fraction",
      "cache.capacity_per_contract", "cache.freshness_model", "cache.epsilon",
      "validator.delay_threshold", "validator.reject_threshold", "validator.max_retries",
      "validator.eta",
      "oracle.enabled", "oracle.move_probability", "oracle.move_permille",
      "oracle.confirm_blocks", "oracle.sync_delay_blocks", "oracle.initial_price",
      "compliance.flip_probability", "compliance.confirm_blocks", "compliance.sync_delay_blocks",
      "committee.n", "committee.t", "committee.group", "committee.stamp_jitter_std_us",
      "committee.alpha_us", "committee.byzantine_fraction", "committee.byzantine_skew_us",
      "adversary.kind",
  };
  for (const auto& k : t.keys()) {
    if (!known.count(k))
      throw std::runtime_error("config line " + std::to_string(t.line_of(k)) +
                               ": unknown key '" + k + "'");
  }

  ScenarioConfig c;
  read_str(t, "scenario.name", c.name);
  read_u64(t, "scenario.seed", c.seed);
  read_u64(t, "scenario.windows", c.windows);
  std::string mode = c.guarded ? "guarded" : "baseline";
  read_str(t, "scenario.mode", mode);
  if (mode == "guarded") {
    c.guarded = true;
  } else if (mode == "baseline") {
    c.guarded = false;
  } else {
    throw std::runtime_error("config: scenario.mode must be guarded or baseline");
  }

  read_u64(t, "chain.window_seconds", c.window_seconds);
  read_u64(t, "chain.block_seconds", c.block_seconds);
  read_u64(t, "chain.settlement_lag_blocks", c.settlement_lag_blocks);

  read_str(t, "workload.rules_file", c.rules_file);
  read_u64(t, "workload.accounts", c.accounts);
  read_f64(t, "workload.tx_rate_per_window", c.tx_rate_per_window);
  read_f64(t, "workload.transfer_weight", c.transfer_weight);
  read_f64(t, "workload.swap_weight", c.swap_weight);
  read_f64(t, "workload.bridge_weight", c.bridge_weight);
  read_i64(t, "workload.amount_min", c.amount_min);
  read_i64(t, "workload.amount_max", c.amount_max);
  read_i64(t, "workload.initial_balance", c.initial_balance);
  read_f64(t, "workload.malicious_fraction", c.malicious_fraction);

  read_u64(t, "cache.capacity_per_contract", c.cache_capacity);
  read_str(t, "cache.freshness_model", c.freshness_model);
  read_f64(t, "cache.epsilon", c.epsilon);

  read_u32(t, "validator.delay_threshold", c.delay_threshold);
  read_u32(t, "validator.reject_threshold", c.reject_threshold);
  read_u32(t, "validator.max_retries", c.max_retries);
  read_f64(t, "validator.eta", c.eta);

  read_bool(t, "oracle.enabled", c.oracle_enabled);
  read_f64(t, "oracle.move_probability", c.oracle_move_probability);
  read_i64(t, "oracle.move_permille", c.oracle_move_permille);
  read_u64(t, "oracle.confirm_blocks", c.oracle_confirm_blocks);
  read_u64(t, "oracle.sync_delay_blocks", c.oracle_sync_delay_blocks);
  read_i64(t, "oracle.initial_price", c.oracle_initial_price);

  read_f64(t, "compliance.flip_probability", c.flag_flip_probability);
  read_u64(t, "compliance.confirm_blocks", c.flag_confirm_blocks);
  read_u64(t, "compliance.sync_delay_blocks", c.flag_sync_delay_blocks);

  read_u32(t, "committee.n", c.committee_n);
  read_u32(t, "committee.t", c.committee_t);
  read_str(t, "committee.group", c.group);
  read_f64(t, "committee.stamp_jitter_std_us", c.stamp_jitter_std_us);
  read_u64(t, "committee.alpha_us", c.alpha_us);
  read_f64(t, "committee.byzantine_fraction", c.byzantine_fraction);
  read_i64(t, "committee.byzantine_skew_us", c.byzantine_skew_us);

  std::string adv = "none";
  read_str(t, "adversary.kind", adv);
  if (adv == "none") c.adversary = AdversaryKind::None;
  else if (adv == "mev_precommit") c.adversary = AdversaryKind::MevPrecommit;
  else if (adv == "mev_postcommit") c.adversary = AdversaryKind::MevPostcommit;
  else if (adv == "stale_exploit") c.adversary = AdversaryKind::StaleExploit;
  else throw std::runtime_error("config: unknown adversary.kind '" + adv + "'");

  c.validate();
  return c;
}

}  // namespace regguard::sim
