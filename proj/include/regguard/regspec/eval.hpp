// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "regguard/regspec/ast.hpp"
#include "regguard/regspec/schema.hpp"

namespace regguard::regspec {

/// Read-only view of the regulatory state maps a rule may consult. Absent
/// keys read as 0 (the unset flag / zero balance convention); nullopt means
/// the map itself is not backed by the store, which is an evaluation error.
class StateView {
 public:
  virtual ~StateView() = default;
  virtual std::optional<int64_t> lookup(const std::string& map, const Value& key) const = 0;
};

/// StateView over an in-memory map of maps; the unit-test workhorse.
class MapStateView : public StateView {
 public:
  using AddrMap = std::map<Address, int64_t>;
  using IntMap = std::map<int64_t, int64_t>;

  std::map<std::string, AddrMap> addr_maps;
  std::map<std::string, IntMap> int_maps;

  std::optional<int64_t> lookup(const std::string& map, const Value& key) const override {
    if (const auto* a = std::get_if<Address>(&key)) {
      auto mit = addr_maps.find(map);
      if (mit == addr_maps.end()) return std::nullopt;
      auto it = mit->second.find(*a);
      return it == mit->second.end() ? 0 : it->second;
    }
    auto mit = int_maps.find(map);
    if (mit == int_maps.end()) return std::nullopt;
    auto it = mit->second.find(std::get<int64_t>(key));
    return it == mit->second.end() ? 0 : it->second;
  }
};

/// Per-evaluation instrumentation. `nodes_visited` counts every AST node the
/// evaluator touches, the quantity evaluation cost is measured in.
struct EvalCounters {
  uint64_t nodes_visited = 0;
  uint64_t state_lookups = 0;
  uint64_t rules_evaluated = 0;
};

struct EvalError {
  std::string message;
};

/// Bound parameter environment for one transaction.
struct ParamEnv {
  std::map<std::string, Value> params;

  const Value* find(const std::string& name) const {
    auto it = params.find(name);
    return it == params.end() ? nullptr : &it->second;
  }
};

namespace evaldetail {

struct EvalException {
  EvalError error;
};

/// Evaluates to either an integer, an address or a boolean, with checked
/// 64-bit arithmetic. Short-circuits `and`/`or`, so untaken branches cost
/// nothing and cannot fault.
class Evaluator {
 public:
  Evaluator(const ParamEnv& env, const StateView& state, EvalCounters* counters)
      : env_(env), state_(state), counters_(counters) {}

  bool eval_bool(const Expr& e) {
    visit();
    if (const auto* b = std::get_if<BoolNode>(&e.node)) {
      bool lhs = eval_bool(*b->lhs);
      if (b->op == BoolOp::And && !lhs) return false;
      if (b->op == BoolOp::Or && lhs) return true;
      return eval_bool(*b->rhs);
    }
    if (const auto* n = std::get_if<NotNode>(&e.node)) {
      return !eval_bool(*n->operand);
    }
    if (const auto* c = std::get_if<CmpNode>(&e.node)) {
      Value lhs = eval_value(*c->lhs);
      Value rhs = eval_value(*c->rhs);
      if (kind_of(lhs) != kind_of(rhs)) fail("comparison of mismatched kinds");
      if (const auto* la = std::get_if<Address>(&lhs)) {
        const auto& ra = std::get<Address>(rhs);
        return c->op == CmpOp::Eq ? *la == ra : *la != ra;
      }
      int64_t li = std::get<int64_t>(lhs), ri = std::get<int64_t>(rhs);
      switch (c->op) {
        case CmpOp::Eq: return li == ri;
        case CmpOp::Ne: return li != ri;
        case CmpOp::Lt: return li < ri;
        case CmpOp::Le: return li <= ri;
        case CmpOp::Gt: return li > ri;
        case CmpOp::Ge: return li >= ri;
      }
      fail("bad comparison operator");
    }
    fail("expression is not a predicate");
    return false;  // unreachable
  }

 private:
  Value eval_value(const Expr& e) {
    visit();
    return std::visit(
        [this](const auto& n) -> Value {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, ConstNode>) {
            return n.value;
          } else if constexpr (std::is_same_v<T, AddrNode>) {
            return n.value;
          } else if constexpr (std::is_same_v<T, ParamNode>) {
            const Value* v = env_.find(n.name);
            if (!v) fail("unbound parameter '" + n.name + "'");
            return *v;
          } else if constexpr (std::is_same_v<T, LookupNode>) {
            Value key = eval_value(*n.key);
            if (counters_) ++counters_->state_lookups;
            auto v = state_.lookup(n.map, key);
            if (!v) fail("map '" + n.map + "' is not available in state");
            return *v;
          } else if constexpr (std::is_same_v<T, ArithNode>) {
            int64_t lhs = as_int(eval_value(*n.lhs));
            int64_t rhs = as_int(eval_value(*n.rhs));
            int64_t out = 0;
            bool ovf = false;
            switch (n.op) {
              case ArithOp::Add: ovf = __builtin_add_overflow(lhs, rhs, &out); break;
              case ArithOp::Sub: ovf = __builtin_sub_overflow(lhs, rhs, &out); break;
              case ArithOp::Mul: ovf = __builtin_mul_overflow(lhs, rhs, &out); break;
            }
            if (ovf) fail("arithmetic overflow");
            return out;
          } else if constexpr (std::is_same_v<T, NegNode>) {
            int64_t v = as_int(eval_value(*n.operand));
            if (v == INT64_MIN) fail("arithmetic overflow");
            return -v;
          } else {
            fail("predicate used as a value");
            return int64_t{0};  // unreachable
          }
        },
        e.node);
  }

  int64_t as_int(const Value& v) {
    const auto* i = std::get_if<int64_t>(&v);
    if (!i) fail("expected an integer value");
    return *i;
  }

  void visit() {
    if (counters_) ++counters_->nodes_visited;
  }

  [[noreturn]] void fail(std::string msg) { throw EvalException{EvalError{std::move(msg)}}; }

  const ParamEnv& env_;
  const StateView& state_;
  EvalCounters* counters_;
};

}  // namespace evaldetail

/// Evaluates one predicate. Any fault (overflow, unbound name, missing map)
/// comes back as an EvalError rather than a verdict.
inline std::optional<EvalError> eval_predicate(const Expr& predicate, const ParamEnv& env,
                                               const StateView& state, bool* out,
                                               EvalCounters* counters = nullptr) {
  evaldetail::Evaluator ev(env, state, counters);
  try {
    *out = ev.eval_bool(predicate);
    return std::nullopt;
  } catch (const evaldetail::EvalException& e) {
    return e.error;
  }
}

enum class SemanticStatus : uint8_t { Legitimate, RuleViolated, EvalFault };

/// Outcome of checking one transaction against a rule set.
struct SemanticVerdict {
  SemanticStatus status = SemanticStatus::Legitimate;
  std::string failing_rule;  // first rule that rejected or faulted
  std::string reason;

  bool legitimate() const { return status == SemanticStatus::Legitimate; }
};

/// Checks every rule bound to `function_sig`, in declaration order, stopping
/// at the first rule that fails. A transaction is legitimate only if all
/// applicable rules hold; evaluation faults reject (fail closed) and name
/// the faulting rule.
inline SemanticVerdict validate_semantic(const RuleSet& rules, const std::string& function_sig,
                                         const ParamEnv& env, const StateView& state,
                                         EvalCounters* counters = nullptr) {
  SemanticVerdict verdict;
  for (const auto& rule : rules.rules) {
    if (rule.function != function_sig) continue;
    if (counters) ++counters->rules_evaluated;
    bool holds = false;
    auto err = eval_predicate(*rule.predicate, env, state, &holds, counters);
    if (err) {
      verdict.status = SemanticStatus::EvalFault;
      verdict.failing_rule = rule.id;
      verdict.reason = err->message;
      return verdict;
    }
    if (!holds) {
      verdict.status = SemanticStatus::RuleViolated;
      verdict.failing_rule = rule.id;
      verdict.reason = "predicate not satisfied";
      return verdict;
    }
  }
  return verdict;
}

}  // namespace regguard::regspec
