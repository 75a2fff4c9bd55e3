// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regguard/chain/core.hpp"
#include "regguard/chain/state.hpp"
#include "regguard/ordering/window.hpp"
#include "regguard/presync/cache.hpp"
#include "regguard/presync/failrate.hpp"
#include "regguard/presync/validator.hpp"
#include "regguard/regspec/parse.hpp"
#include "regguard/sim/config.hpp"
#include "regguard/sim/fixtures.hpp"
#include "regguard/sim/metrics.hpp"
#include "regguard/sim/montecarlo.hpp"
#include "regguard/sim/pipeline.hpp"

namespace {

using regguard::sim::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitRejection = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw InputError("cannot write " + out_path);
  out << text;
}

void emit_json(const ordered_json& j, const std::string& format, const std::string& out_path) {
  if (format == "table")
    emit(regguard::sim::report_table(j), out_path);
  else
    emit(j.dump(2) + "\n", out_path);
}

int cmd_rules_lint(const std::string& rules_path, const std::string& format,
                   const std::string& out_path) {
  auto schema = regguard::regspec::StateSchema::standard();
  auto res = regguard::regspec::parse_rules(read_file(rules_path), schema);
  ordered_json j;
  j["file"] = rules_path;
  ordered_json diags = ordered_json::array();
  for (const auto& d : res.diagnostics) diags.push_back(d.format());
  j["diagnostics"] = std::move(diags);
  ordered_json rules = ordered_json::array();
  for (const auto& r : res.rules.rules) {
    ordered_json e;
    e["id"] = r.id;
    e["function"] = r.function;
    e["complexity"] = r.complexity();
    e["source"] = regguard::regspec::to_source(*r.predicate);
    rules.push_back(std::move(e));
  }
  j["rules"] = std::move(rules);
  j["total_complexity"] = res.rules.total_complexity();
  j["ok"] = res.ok();
  emit_json(j, format, out_path);
  return res.ok() ? kExitOk : kExitRejection;
}

const char* stage_name(regguard::presync::RejectStage s) {
  using regguard::presync::RejectStage;
  switch (s) {
    case RejectStage::Semantic: return "semantic";
    case RejectStage::Execution: return "execution";
    case RejectStage::StateDrift: return "state_drift";
    default: return "none";
  }
}

int cmd_validate(const std::string& rules_path, const std::string& state_path,
                 const std::string& txs_path, const std::string& format,
                 const std::string& out_path) {
  namespace chain = regguard::chain;
  namespace presync = regguard::presync;
  namespace regspec = regguard::regspec;

  auto schema = regspec::StateSchema::standard();
  auto parsed = regspec::parse_rules(read_file(rules_path), schema);
  if (!parsed.ok()) {
    std::string msg = "rule set rejected:";
    for (const auto& d : parsed.diagnostics) msg += "\n  " + d.format();
    throw InputError(msg);
  }
  schema = parsed.schema;

  auto registry = chain::L1Registry::standard();
  chain::L1Chain l1;
  chain::L2State l2;
  presync::L1Cache cache;
  auto fixture = regguard::sim::state_fixture_from_json(read_file(state_path));
  fixture.apply(l1, l2, registry);
  auto txs = regguard::sim::txs_from_json(read_file(txs_path), schema);

  presync::ValidatorConfig vcfg;
  ordered_json decisions = ordered_json::array();
  uint64_t accepted = 0, delayed = 0, rejected = 0;
  for (size_t i = 0; i < txs.size(); ++i) {
    const auto& tx = txs[i];
    ordered_json row;
    row["index"] = i;
    row["id"] = regguard::to_hex(tx.id());
    row["function"] = tx.function;
    auto syn = chain::syn_legit(tx, schema, l2.nonces);
    if (!syn.ok) {
      row["action"] = "reject";
      row["stage"] = "syntactic";
      row["reason"] = syn.reason;
      rejected++;
      decisions.push_back(std::move(row));
      continue;
    }
    auto d = presync::validate_tx(tx, l2, cache, l1, registry, parsed.rules, schema, vcfg,
                                  nullptr);
    row["action"] = to_string(d.action);
    row["stage"] = stage_name(d.reject_stage);
    if (d.reject_stage == presync::RejectStage::Semantic)
      row["rule"] = d.semantic.failing_rule;
    row["reason"] = d.reason;
    row["severity"] = d.severity_total;
    if (d.accepted()) {
      accepted++;
      auto res = chain::apply_l2(l2, tx, 0, d.oracle_price);
      row["applied"] = res.ok();
    } else if (d.action == presync::TxAction::Delay) {
      delayed++;
    } else {
      rejected++;
    }
    decisions.push_back(std::move(row));
  }

  ordered_json j;
  j["rules_file"] = rules_path;
  j["transactions"] = txs.size();
  j["accepted"] = accepted;
  j["delayed"] = delayed;
  j["rejected"] = rejected;
  j["decisions"] = std::move(decisions);
  emit_json(j, format, out_path);
  return accepted == txs.size() ? kExitOk : kExitRejection;
}

regguard::sim::ScenarioConfig load_scenario(const std::string& config_path,
                                            std::string* rules_source) {
  auto cfg = regguard::sim::scenario_from_toml(read_file(config_path));
  if (!cfg.rules_file.empty()) {
    auto dir = std::filesystem::path(config_path).parent_path();
    *rules_source = read_file((dir / cfg.rules_file).string());
  }
  return cfg;
}

int cmd_simulate(const std::string& config_path, uint64_t seed_override, uint64_t trials,
                 unsigned jobs, const std::string& mode, const std::string& format,
                 const std::string& out_path) {
  std::string rules_source;
  auto cfg = load_scenario(config_path, &rules_source);
  if (seed_override != 0) cfg.seed = seed_override;
  if (mode == "guarded") cfg.guarded = true;
  if (mode == "baseline") cfg.guarded = false;
  cfg.validate();

  ordered_json j;
  if (trials <= 1) {
    regguard::sim::Pipeline p(cfg, rules_source);
    auto m = p.run();
    j = regguard::sim::report_json(cfg, m);
  } else {
    auto slots = regguard::sim::run_trials(cfg, trials, jobs, rules_source);
    j = regguard::sim::monte_carlo_report(cfg, slots);
  }
  emit_json(j, format, out_path);
  return kExitOk;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw InputError("empty list: '" + s + "'");
  return out;
}

int cmd_sweep(const std::string& epsilons, const std::string& etas, uint64_t target,
              uint64_t seed, unsigned jobs, const std::string& format,
              const std::string& out_path) {
  auto eps = parse_double_list(epsilons);
  auto ets = parse_double_list(etas);
  struct Cell {
    double eps, eta;
    regguard::presync::FailRateResult res;
  };
  std::vector<Cell> cells;
  for (double e : eps)
    for (double h : ets) cells.push_back({e, h, {}});

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      uint64_t cell_seed = regguard::derive_seed(seed, "cell-" + std::to_string(i));
      cells[i].res =
          regguard::presync::estimate_fail_rate(cells[i].eps, cells[i].eta, target, cell_seed);
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < jobs && w < cells.size(); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  bool all_within = true;
  ordered_json rows = ordered_json::array();
  for (const auto& c : cells) {
    double bound =
        regguard::presync::FailRateResult::bound(c.eps, c.eta, c.res.accepted);
    bool within = c.res.p_fail <= bound;
    all_within = all_within && within;
    ordered_json r;
    r["epsilon"] = c.eps;
    r["eta"] = c.eta;
    r["accepted"] = c.res.accepted;
    r["settlement_failures"] = c.res.settlement_failures;
    r["p_fail"] = c.res.p_fail;
    r["bound"] = bound;
    r["within_bound"] = within;
    rows.push_back(std::move(r));
  }
  ordered_json j;
  j["target_accepted"] = target;
  j["seed"] = seed;
  j["cells"] = std::move(rows);
  j["all_within_bound"] = all_within;
  emit_json(j, format, out_path);
  return all_within ? kExitOk : kExitRejection;
}

int cmd_audit_evidence(const std::string& evidence_path, const std::string& format,
                       const std::string& out_path) {
  namespace ordering = regguard::ordering;
  std::string raw = read_file(evidence_path);
  ordering::SlashingEvidence ev;
  try {
    ev = ordering::SlashingEvidence::from_bytes(
        std::span(reinterpret_cast<const uint8_t*>(raw.data()), raw.size()));
  } catch (const std::exception& e) {
    throw InputError("evidence file " + evidence_path + ": " + e.what());
  }
  auto verdict = ordering::verify_evidence(ev);
  ordered_json j;
  j["file"] = evidence_path;
  j["window_index"] = ev.window_index;
  j["position"] = ev.position;
  j["committed"] = ev.committed_hashes.size();
  j["commitment"] = regguard::to_hex(ev.commitment);
  j["verdict"] = ordering::to_string(verdict);
  emit_json(j, format, out_path);
  return verdict == ordering::EvidenceVerdict::Valid ? kExitOk : kExitRejection;
}

int cmd_report(const std::string& in_path, const std::string& out_path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(in_path));
  } catch (const std::exception& e) {
    throw InputError(std::string("report: ") + e.what());
  }
  emit(regguard::sim::report_table(j), out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regguard: rule-checked admission, cache pre-synchronization and "
               "fair-ordering pipeline over a simulated two-layer chain"};
  app.require_subcommand(1);

  std::string rules_path, state_path, txs_path, config_path, evidence_path, in_path;
  std::string format = "json", out_path, mode;
  uint64_t seed = 0, trials = 1, target = 100000;
  unsigned jobs = 1;
  std::string epsilons = "0", etas = "0";

  auto add_io = [&](CLI::App* sub) {
    sub->add_option("--format", format, "output format: json or table")
        ->check(CLI::IsMember({"json", "table"}));
    sub->add_option("--out", out_path, "write output to this file instead of stdout");
  };

  auto* lint = app.add_subcommand("rules-lint", "parse a rule file and report diagnostics");
  lint->add_option("--rules", rules_path, "rule file")->required();
  add_io(lint);

  auto* validate = app.add_subcommand(
      "validate", "run the three-stage admission check over fixture state and transactions");
  validate->add_option("--rules", rules_path, "rule file")->required();
  validate->add_option("--state", state_path, "state fixture (JSON)")->required();
  validate->add_option("--txs", txs_path, "transaction fixture (JSON)")->required();
  add_io(validate);

  auto* simulate =
      app.add_subcommand("simulate", "run a scenario end to end and report metrics");
  simulate->add_option("--config", config_path, "scenario TOML file")->required();
  simulate->add_option("--seed", seed, "override the scenario seed (0 keeps it)");
  simulate->add_option("--trials", trials, "independent trials to run");
  simulate->add_option("--jobs", jobs, "worker threads for multi-trial runs");
  simulate->add_option("--mode", mode, "override scenario mode")
      ->check(CLI::IsMember({"guarded", "baseline"}));
  add_io(simulate);

  auto* sweep = app.add_subcommand(
      "sweep", "measure settlement failure rate over a cache-staleness grid");
  sweep->add_option("--epsilons", epsilons, "comma-separated stale-serve probabilities");
  sweep->add_option("--etas", etas, "comma-separated tracker-miss probabilities");
  sweep->add_option("--target", target, "accepted transactions per cell");
  sweep->add_option("--seed", seed, "master seed");
  sweep->add_option("--jobs", jobs, "worker threads");
  add_io(sweep);

  auto* audit = app.add_subcommand("audit-evidence",
                                   "check a serialized order-deviation evidence blob");
  audit->add_option("--evidence", evidence_path, "evidence file")->required();
  add_io(audit);

  auto* report = app.add_subcommand("report", "render a stored JSON report as a table");
  report->add_option("--in", in_path, "report JSON file")->required();
  report->add_option("--out", out_path, "write output to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (lint->parsed()) return cmd_rules_lint(rules_path, format, out_path);
    if (validate->parsed())
      return cmd_validate(rules_path, state_path, txs_path, format, out_path);
    if (simulate->parsed())
      return cmd_simulate(config_path, seed, trials, jobs, mode, format, out_path);
    if (sweep->parsed())
      return cmd_sweep(epsilons, etas, target, seed, jobs, format, out_path);
    if (audit->parsed()) return cmd_audit_evidence(evidence_path, format, out_path);
    if (report->parsed()) return cmd_report(in_path, out_path);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
