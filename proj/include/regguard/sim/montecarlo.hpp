// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "regguard/sim/config.hpp"
#include "regguard/sim/metrics.hpp"
#include "regguard/sim/pipeline.hpp"
#include "regguard/util/rng.hpp"
#include "regguard/util/stats.hpp"

namespace regguard::sim {

/// Accumulates one run's counters into a running total.
inline void merge_metrics(RunMetrics& into, const RunMetrics& m) {
  into.generated += m.generated;
  into.malicious_injected += m.malicious_injected;
  into.syn_rejected += m.syn_rejected;
  into.semantic_rejected += m.semantic_rejected;
  into.exec_rejected += m.exec_rejected;
  into.state_rejected += m.state_rejected;
  into.delays += m.delays;
  into.delay_expired += m.delay_expired;
  into.accepted += m.accepted;
  into.applied += m.applied;
  into.apply_failed += m.apply_failed;
  into.settled += m.settled;
  into.settlement_failures += m.settlement_failures;
  into.windows_run += m.windows_run;
  into.batches_released += m.batches_released;
  into.release_failures += m.release_failures;
  into.undecryptable += m.undecryptable;
  into.qualifying_pairs += m.qualifying_pairs;
  into.order_violations += m.order_violations;
  into.alpha_us = m.alpha_us;
  into.deviant_batches += m.deviant_batches;
  into.evidence_produced += m.evidence_produced;
  into.evidence_valid += m.evidence_valid;
  into.false_evidence += m.false_evidence;
  into.cache_reads += m.cache_reads;
  into.cache_hits += m.cache_hits;
  into.cache_misses += m.cache_misses;
  into.cache_evictions += m.cache_evictions;
  into.cache_divergent += m.cache_divergent;
  into.malicious_contained += m.malicious_contained;
  into.malicious_leaked += m.malicious_leaked;
}

/// Runs one independent trial: same scenario, seed derived from the master
/// seed and the trial index.
inline RunMetrics run_trial(const ScenarioConfig& base, uint64_t trial_index,
                            const std::string& rules_source = "") {
  ScenarioConfig c = base;
  c.seed = derive_seed(base.seed, "trial-" + std::to_string(trial_index));
  Pipeline p(c, rules_source);
  return p.run();
}

/// Repeats a scenario `trials` times across `jobs` threads. Results land in
/// per-trial slots and are aggregated in slot order, so the report is
/// byte-identical no matter how many threads ran it.
inline std::vector<RunMetrics> run_trials(const ScenarioConfig& base, uint64_t trials,
                                          unsigned jobs, const std::string& rules_source = "") {
  std::vector<RunMetrics> slots(trials);
  if (jobs < 1) jobs = 1;
  if (jobs > trials) jobs = static_cast<unsigned>(trials);
  std::atomic<uint64_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  auto worker = [&](unsigned wi) {
    try {
      for (uint64_t i = next.fetch_add(1); i < trials; i = next.fetch_add(1))
        slots[i] = run_trial(base, i, rules_source);
    } catch (...) {
      errors[wi] = std::current_exception();
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned wi = 0; wi < jobs; ++wi) pool.emplace_back(worker, wi);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return slots;
}

inline ordered_json monte_carlo_report(const ScenarioConfig& base,
                                       const std::vector<RunMetrics>& trials) {
  RunMetrics total;
  std::vector<double> p_fails, betas;
  p_fails.reserve(trials.size());
  betas.reserve(trials.size());
  ordered_json per_trial = ordered_json::array();
  for (size_t i = 0; i < trials.size(); ++i) {
    merge_metrics(total, trials[i]);
    p_fails.push_back(trials[i].p_fail());
    betas.push_back(trials[i].beta());
    ordered_json t;
    t["trial"] = i;
    t["metrics"] = trials[i].to_json();
    per_trial.push_back(std::move(t));
  }
  ordered_json agg;
  agg["trials"] = trials.size();
  agg["totals"] = total.to_json();
  if (!trials.empty()) {
    auto pf = stats::ci95(p_fails);
    agg["p_fail_mean"] = stats::mean(p_fails);
    agg["p_fail_ci95_lo"] = pf.lo;
    agg["p_fail_ci95_hi"] = pf.hi;
    agg["beta_mean"] = stats::mean(betas);
  }
  ordered_json rep;
  rep["scenario"] = config_json(base);
  rep["aggregate"] = std::move(agg);
  rep["per_trial"] = std::move(per_trial);
  return rep;
}

}  // namespace regguard::sim
