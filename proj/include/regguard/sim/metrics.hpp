// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>

#include "regguard/sim/config.hpp"

namespace regguard::sim {

using ordered_json = nlohmann::ordered_json;

/// Counters collected over one simulated run. Everything here is integer
/// except the derived ratios, so reports are reproducible byte for byte.
struct RunMetrics {
  // Workload.
  uint64_t generated = 0;
  uint64_t malicious_injected = 0;

  // Admission.
  uint64_t syn_rejected = 0;
  uint64_t semantic_rejected = 0;
  uint64_t exec_rejected = 0;
  uint64_t state_rejected = 0;
  uint64_t delays = 0;          // delay verdicts issued
  uint64_t delay_expired = 0;   // transactions dropped after max retries
  uint64_t accepted = 0;

  // Execution and settlement.
  uint64_t applied = 0;
  uint64_t apply_failed = 0;
  uint64_t settled = 0;
  uint64_t settlement_failures = 0;

  // Ordering.
  uint64_t windows_run = 0;
  uint64_t batches_released = 0;
  uint64_t release_failures = 0;
  uint64_t undecryptable = 0;
  uint64_t qualifying_pairs = 0;
  uint64_t order_violations = 0;
  uint64_t alpha_us = 0;

  // Slashing.
  uint64_t deviant_batches = 0;
  uint64_t evidence_produced = 0;
  uint64_t evidence_valid = 0;
  uint64_t false_evidence = 0;

  // Cache.
  uint64_t cache_reads = 0;
  uint64_t cache_hits = 0;
  uint64_t cache_misses = 0;
  uint64_t cache_evictions = 0;
  uint64_t cache_divergent = 0;

  // Malicious containment.
  uint64_t malicious_contained = 0;
  uint64_t malicious_leaked = 0;

  double p_fail() const {
    return settled == 0 ? 0.0
                        : static_cast<double>(settlement_failures) / static_cast<double>(settled);
  }
  double beta() const {
    return qualifying_pairs == 0 ? 0.0
                                 : static_cast<double>(order_violations) /
                                       static_cast<double>(qualifying_pairs);
  }

  ordered_json to_json() const {
    ordered_json j;
    j["workload"] = {{"generated", generated}, {"malicious_injected", malicious_injected}};
    j["admission"] = {{"syn_rejected", syn_rejected},
                      {"semantic_rejected", semantic_rejected},
                      {"exec_rejected", exec_rejected},
                      {"state_rejected", state_rejected},
                      {"delays", delays},
                      {"delay_expired", delay_expired},
                      {"accepted", accepted}};
    j["execution"] = {{"applied", applied}, {"apply_failed", apply_failed}};
    j["settlement"] = {{"settled", settled},
                       {"failures", settlement_failures},
                       {"p_fail", p_fail()}};
    j["ordering"] = {{"windows", windows_run},
                     {"batches_released", batches_released},
                     {"release_failures", release_failures},
                     {"undecryptable", undecryptable},
                     {"qualifying_pairs", qualifying_pairs},
                     {"violations", order_violations},
                     {"beta", beta()},
                     {"alpha_us", alpha_us}};
    j["slashing"] = {{"deviant_batches", deviant_batches},
                     {"evidence_produced", evidence_produced},
                     {"evidence_valid", evidence_valid},
                     {"false_evidence", false_evidence}};
    j["cache"] = {{"reads", cache_reads},
                  {"hits", cache_hits},
                  {"misses", cache_misses},
                  {"evictions", cache_evictions},
                  {"divergent_serves", cache_divergent}};
    j["malicious"] = {{"injected", malicious_injected},
                      {"contained", malicious_contained},
                      {"leaked", malicious_leaked}};
    return j;
  }
};

/// Header block identifying a run; goes at the top of every report.
inline ordered_json config_json(const ScenarioConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["mode"] = c.guarded ? "guarded" : "baseline";
  j["seed"] = c.seed;
  j["windows"] = c.windows;
  j["accounts"] = c.accounts;
  j["tx_rate_per_window"] = c.tx_rate_per_window;
  j["epsilon"] = c.epsilon;
  j["eta"] = c.eta;
  j["oracle_enabled"] = c.oracle_enabled;
  j["adversary"] = to_string(c.adversary);
  j["committee_n"] = c.committee_n;
  j["committee_t"] = c.committee_t;
  j["byzantine_members"] = c.byzantine_members();
  return j;
}

inline ordered_json report_json(const ScenarioConfig& c, const RunMetrics& m) {
  ordered_json j;
  j["scenario"] = config_json(c);
  j["metrics"] = m.to_json();
  return j;
}

namespace metricsdetail {

inline void table_walk(const ordered_json& j, const std::string& indent, std::string& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_object()) {
      out += indent + it.key() + "\n";
      table_walk(it.value(), indent + "  ", out);
    } else if (it.value().is_array()) {
      out += indent + it.key() + "  [" + std::to_string(it.value().size()) + " entries]\n";
    } else {
      std::string v = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
      std::string line = indent + it.key();
      if (line.size() < 32) line += std::string(32 - line.size(), ' ');
      out += line + "  " + v + "\n";
    }
  }
}

}  // namespace metricsdetail

/// Plain-text rendering of a report for terminal use.
inline std::string report_table(const ordered_json& j) {
  std::string out;
  metricsdetail::table_walk(j, "", out);
  return out;
}

}  // namespace regguard::sim
