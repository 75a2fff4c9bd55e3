// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "regguard/util/values.hpp"

namespace regguard::regspec {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class CmpOp : uint8_t { Eq, Ne, Lt, Le, Gt, Ge };
enum class ArithOp : uint8_t { Add, Sub, Mul };
enum class BoolOp : uint8_t { And, Or };

inline const char* to_string(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "?";
}

inline const char* to_string(ArithOp op) {
  switch (op) {
    case ArithOp::Add: return "+";
    case ArithOp::Sub: return "-";
    case ArithOp::Mul: return "*";
  }
  return "?";
}

/// Integer literal.
struct ConstNode {
  int64_t value = 0;
};

/// Address literal (0x + 40 hex digits in source).
struct AddrNode {
  Address value;
};

/// Reference to a declared parameter of the guarded function, or to the
/// built-in sender binding `from`.
struct ParamNode {
  std::string name;
};

/// Lookup into a named regulatory state map, keyed by an address expression.
struct LookupNode {
  std::string map;
  ExprPtr key;
};

/// Binary arithmetic over integers.
struct ArithNode {
  ArithOp op;
  ExprPtr lhs, rhs;
};

/// Unary minus.
struct NegNode {
  ExprPtr operand;
};

/// Comparison; yields a boolean.
struct CmpNode {
  CmpOp op;
  ExprPtr lhs, rhs;
};

/// Boolean conjunction / disjunction.
struct BoolNode {
  BoolOp op;
  ExprPtr lhs, rhs;
};

/// Boolean negation.
struct NotNode {
  ExprPtr operand;
};

struct Expr {
  std::variant<ConstNode, AddrNode, ParamNode, LookupNode, ArithNode, NegNode, CmpNode, BoolNode,
               NotNode>
      node;
};

template <typename T, typename... Args>
ExprPtr make_expr(Args&&... args) {
  return std::make_shared<const Expr>(Expr{T{std::forward<Args>(args)...}});
}

/// Number of nodes in the expression tree. This is the complexity measure
/// that rule evaluation cost is linear in.
inline size_t node_count(const Expr& e) {
  return std::visit(
      [](const auto& n) -> size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstNode> || std::is_same_v<T, AddrNode> ||
                      std::is_same_v<T, ParamNode>) {
          return 1;
        } else if constexpr (std::is_same_v<T, LookupNode>) {
          return 1 + node_count(*n.key);
        } else if constexpr (std::is_same_v<T, ArithNode> || std::is_same_v<T, CmpNode> ||
                             std::is_same_v<T, BoolNode>) {
          return 1 + node_count(*n.lhs) + node_count(*n.rhs);
        } else {
          return 1 + node_count(*n.operand);
        }
      },
      e.node);
}

inline bool expr_equal(const Expr& a, const Expr& b);

namespace astdetail {
inline bool equal_ptr(const ExprPtr& a, const ExprPtr& b) { return expr_equal(*a, *b); }
}  // namespace astdetail

inline bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&b](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, ConstNode>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, AddrNode>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, ParamNode>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, LookupNode>) {
          return x.map == y.map && astdetail::equal_ptr(x.key, y.key);
        } else if constexpr (std::is_same_v<T, ArithNode>) {
          return x.op == y.op && astdetail::equal_ptr(x.lhs, y.lhs) &&
                 astdetail::equal_ptr(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, CmpNode>) {
          return x.op == y.op && astdetail::equal_ptr(x.lhs, y.lhs) &&
                 astdetail::equal_ptr(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, BoolNode>) {
          return x.op == y.op && astdetail::equal_ptr(x.lhs, y.lhs) &&
                 astdetail::equal_ptr(x.rhs, y.rhs);
        } else if constexpr (std::is_same_v<T, NegNode>) {
          return astdetail::equal_ptr(x.operand, y.operand);
        } else {
          return astdetail::equal_ptr(x.operand, y.operand);
        }
      },
      a.node);
}

/// Renders an expression back to rule-language source. Fully parenthesized
/// except for atoms, so the output always re-parses to an equal tree.
inline std::string to_source(const Expr& e) {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ConstNode>) {
          return std::to_string(n.value);
        } else if constexpr (std::is_same_v<T, AddrNode>) {
          return to_hex(n.value);
        } else if constexpr (std::is_same_v<T, ParamNode>) {
          return n.name;
        } else if constexpr (std::is_same_v<T, LookupNode>) {
          return n.map + "[" + to_source(*n.key) + "]";
        } else if constexpr (std::is_same_v<T, ArithNode>) {
          return "(" + to_source(*n.lhs) + " " + to_string(n.op) + " " + to_source(*n.rhs) + ")";
        } else if constexpr (std::is_same_v<T, NegNode>) {
          return "(-" + to_source(*n.operand) + ")";
        } else if constexpr (std::is_same_v<T, CmpNode>) {
          return "(" + to_source(*n.lhs) + " " + to_string(n.op) + " " + to_source(*n.rhs) + ")";
        } else if constexpr (std::is_same_v<T, BoolNode>) {
          const char* op = n.op == BoolOp::And ? "and" : "or";
          return "(" + to_source(*n.lhs) + " " + op + " " + to_source(*n.rhs) + ")";
        } else {
          return "(not " + to_source(*n.operand) + ")";
        }
      },
      e.node);
}

/// One named rule attached to one guarded function.
struct Rule {
  std::string id;
  std::string function;  // canonical signature, e.g. "transfer(address,uint256)"
  ExprPtr predicate;
  size_t source_line = 0;

  size_t complexity() const { return node_count(*predicate); }
};

/// A compiled rule set: the policy a semantic validator enforces.
struct RuleSet {
  std::vector<Rule> rules;

  /// Sum of per-rule complexities, the L that evaluation cost scales with.
  size_t total_complexity() const {
    size_t n = 0;
    for (const auto& r : rules) n += r.complexity();
    return n;
  }
};

}  // namespace regguard::regspec
