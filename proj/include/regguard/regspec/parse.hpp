// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "regguard/regspec/ast.hpp"
#include "regguard/regspec/schema.hpp"

namespace regguard::regspec {

enum class Severity : uint8_t { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  size_t line = 0;
  size_t col = 0;
  std::string message;

  std::string format() const {
    std::string s = severity == Severity::Error ? "error" : "warning";
    return s + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + message;
  }
};

struct ParseResult {
  RuleSet rules;
  StateSchema schema;  // input schema plus any maps declared in the file
  std::vector<Diagnostic> diagnostics;

  bool ok() const {
    for (const auto& d : diagnostics)
      if (d.severity == Severity::Error) return false;
    return true;
  }
};

namespace parsedetail {

enum class Tok : uint8_t { Ident, Number, AddrLit, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int64_t number = 0;
  Address addr;
  size_t line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return cur_; }
  Token next() {
    Token t = cur_;
    advance();
    return t;
  }

  std::optional<std::string> error;
  size_t error_line = 0, error_col = 0;

 private:
  void advance() {
    skip_ws();
    cur_ = Token{};
    cur_.line = line_;
    cur_.col = col_;
    if (pos_ >= src_.size()) {
      cur_.kind = Tok::End;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_'))
        bump();
      cur_.kind = Tok::Ident;
      cur_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      if (c == '0' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == 'x' || src_[pos_ + 1] == 'X')) {
        lex_addr();
        return;
      }
      size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
      cur_.kind = Tok::Number;
      std::string digits(src_.substr(start, pos_ - start));
      try {
        cur_.number = std::stoll(digits);
      } catch (const std::exception&) {
        fail("integer literal out of range");
      }
      return;
    }
    // Multi-char operators first.
    for (std::string_view op : {"==", "!=", "<=", ">="}) {
      if (src_.substr(pos_).starts_with(op)) {
        cur_.kind = Tok::Punct;
        cur_.text = std::string(op);
        bump();
        bump();
        return;
      }
    }
    if (std::string_view("()[]:,=<>+-*").find(c) != std::string_view::npos) {
      cur_.kind = Tok::Punct;
      cur_.text = std::string(1, c);
      bump();
      return;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  void lex_addr() {
    size_t start = pos_;
    bump();
    bump();  // 0x
    while (pos_ < src_.size() && std::isxdigit(static_cast<unsigned char>(src_[pos_]))) bump();
    std::string_view hex = src_.substr(start, pos_ - start);
    auto a = address_from_hex(hex);
    if (!a) {
      fail("address literal must be 0x followed by 40 hex digits");
      return;
    }
    cur_.kind = Tok::AddrLit;
    cur_.addr = *a;
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void fail(std::string msg) {
    if (!error) {
      error = std::move(msg);
      error_line = line_;
      error_col = col_;
    }
    cur_.kind = Tok::End;
    pos_ = src_.size();
  }

  std::string_view src_;
  size_t pos_ = 0;
  size_t line_ = 1, col_ = 1;
  Token cur_;
};

/// Expression types as seen by the checker.
enum class ExprType : uint8_t { Int, Addr, Bool };

struct ExprInfo {
  ExprPtr expr;
  ExprType type = ExprType::Int;
  bool is_const = true;  // no parameter or state reference in the subtree
};

struct ParseAbort {};  // unwinds to the enclosing rule on the first error in it

class Parser {
 public:
  Parser(std::string_view src, const StateSchema& schema) : lex_(src) { result_.schema = schema; }

  ParseResult run() {
    while (lex_.peek().kind != Tok::End) {
      Token t = lex_.peek();
      try {
        if (t.kind == Tok::Ident && t.text == "rule") {
          parse_rule();
        } else if (t.kind == Tok::Ident && t.text == "map") {
          parse_mapdecl();
        } else {
          error(t, "expected 'rule' or 'map' at top level");
          throw ParseAbort{};
        }
      } catch (const ParseAbort&) {
        recover();
      }
    }
    if (lex_.error) {
      result_.diagnostics.push_back(
          {Severity::Error, lex_.error_line, lex_.error_col, *lex_.error});
    }
    finish_lint();
    return std::move(result_);
  }

 private:
  void parse_mapdecl() {
    lex_.next();  // 'map'
    Token name = expect_ident("map name");
    if (result_.schema.find_map(name.text)) {
      error(name, "map '" + name.text + "' is already declared");
      throw ParseAbort{};
    }
    result_.schema.maps.push_back({name.text, ValueKind::Addr});
    declared_maps_.insert(name.text);
  }

  void parse_rule() {
    Token kw = lex_.next();  // 'rule'
    Token id = expect_ident("rule name");
    for (const auto& r : result_.rules.rules) {
      if (r.id == id.text) {
        error(id, "duplicate rule id '" + id.text + "'");
        throw ParseAbort{};
      }
    }
    Token on = expect_ident("'on'");
    if (on.text != "on") {
      error(on, "expected 'on' after rule name");
      throw ParseAbort{};
    }
    std::string sig = parse_signature();
    fn_ = result_.schema.find_function(sig);
    if (!fn_) {
      error(on, "unknown function '" + sig + "'");
      throw ParseAbort{};
    }
    expect_punct(":");
    ExprInfo body = parse_or();
    if (body.type != ExprType::Bool) {
      error(kw, "rule '" + id.text + "' must be a boolean predicate");
      throw ParseAbort{};
    }
    if (body.is_const)
      warn(kw, "rule '" + id.text + "' does not reference any parameter or state");
    Rule r;
    r.id = id.text;
    r.function = sig;
    r.predicate = body.expr;
    r.source_line = kw.line;
    result_.rules.rules.push_back(std::move(r));
  }

  std::string parse_signature() {
    Token name = expect_ident("function name");
    expect_punct("(");
    std::string sig = name.text + "(";
    bool first = true;
    while (true) {
      if (lex_.peek().kind == Tok::Punct && lex_.peek().text == ")") {
        lex_.next();
        break;
      }
      if (!first) expect_punct(",");
      Token ty = expect_ident("parameter type");
      if (ty.text != "address" && ty.text != "uint256") {
        error(ty, "unknown parameter type '" + ty.text + "' (expected address or uint256)");
        throw ParseAbort{};
      }
      if (!first) sig += ",";
      sig += ty.text;
      first = false;
    }
    return sig + ")";
  }

  // expr := or_expr
  ExprInfo parse_or() {
    ExprInfo lhs = parse_and();
    while (is_ident("or")) {
      Token op = lex_.next();
      ExprInfo rhs = parse_and();
      require_bool(lhs, op);
      require_bool(rhs, op);
      lhs = ExprInfo{make_expr<BoolNode>(BoolOp::Or, lhs.expr, rhs.expr), ExprType::Bool,
                     lhs.is_const && rhs.is_const};
    }
    return lhs;
  }

  ExprInfo parse_and() {
    ExprInfo lhs = parse_not();
    while (is_ident("and")) {
      Token op = lex_.next();
      ExprInfo rhs = parse_not();
      require_bool(lhs, op);
      require_bool(rhs, op);
      lhs = ExprInfo{make_expr<BoolNode>(BoolOp::And, lhs.expr, rhs.expr), ExprType::Bool,
                     lhs.is_const && rhs.is_const};
    }
    return lhs;
  }

  ExprInfo parse_not() {
    if (is_ident("not")) {
      Token op = lex_.next();
      ExprInfo operand = parse_not();
      require_bool(operand, op);
      return {make_expr<NotNode>(operand.expr), ExprType::Bool, operand.is_const};
    }
    return parse_cmp();
  }

  ExprInfo parse_cmp() {
    ExprInfo lhs = parse_arith();
    const Token& t = lex_.peek();
    if (t.kind != Tok::Punct) return lhs;
    CmpOp op;
    if (t.text == "=" || t.text == "==") op = CmpOp::Eq;
    else if (t.text == "!=") op = CmpOp::Ne;
    else if (t.text == "<") op = CmpOp::Lt;
    else if (t.text == "<=") op = CmpOp::Le;
    else if (t.text == ">") op = CmpOp::Gt;
    else if (t.text == ">=") op = CmpOp::Ge;
    else return lhs;
    Token opt = lex_.next();
    ExprInfo rhs = parse_arith();
    if (lhs.type == ExprType::Bool || rhs.type == ExprType::Bool) {
      error(opt, "comparison operands must be values, not predicates");
      throw ParseAbort{};
    }
    if (lhs.type != rhs.type) {
      error(opt, "cannot compare address with integer");
      throw ParseAbort{};
    }
    if (lhs.type == ExprType::Addr && op != CmpOp::Eq && op != CmpOp::Ne) {
      error(opt, "addresses only support = and !=");
      throw ParseAbort{};
    }
    return {make_expr<CmpNode>(op, lhs.expr, rhs.expr), ExprType::Bool,
            lhs.is_const && rhs.is_const};
  }

  ExprInfo parse_arith() {
    ExprInfo lhs = parse_term();
    while (lex_.peek().kind == Tok::Punct &&
           (lex_.peek().text == "+" || lex_.peek().text == "-")) {
      Token op = lex_.next();
      ExprInfo rhs = parse_term();
      require_int(lhs, op);
      require_int(rhs, op);
      ArithOp aop = op.text == "+" ? ArithOp::Add : ArithOp::Sub;
      lhs = ExprInfo{make_expr<ArithNode>(aop, lhs.expr, rhs.expr), ExprType::Int,
                     lhs.is_const && rhs.is_const};
    }
    return lhs;
  }

  ExprInfo parse_term() {
    ExprInfo lhs = parse_factor();
    while (lex_.peek().kind == Tok::Punct && lex_.peek().text == "*") {
      Token op = lex_.next();
      ExprInfo rhs = parse_factor();
      require_int(lhs, op);
      require_int(rhs, op);
      if (!lhs.is_const && !rhs.is_const) {
        error(op, "nonlinear term: product of two non-constant expressions");
        throw ParseAbort{};
      }
      lhs = ExprInfo{make_expr<ArithNode>(ArithOp::Mul, lhs.expr, rhs.expr), ExprType::Int,
                     lhs.is_const && rhs.is_const};
    }
    return lhs;
  }

  ExprInfo parse_factor() {
    if (lex_.peek().kind == Tok::Punct && lex_.peek().text == "-") {
      Token op = lex_.next();
      ExprInfo operand = parse_factor();
      require_int(operand, op);
      return {make_expr<NegNode>(operand.expr), ExprType::Int, operand.is_const};
    }
    return parse_atom();
  }

  ExprInfo parse_atom() {
    Token t = lex_.next();
    if (t.kind == Tok::Number) {
      return {make_expr<ConstNode>(t.number), ExprType::Int, true};
    }
    if (t.kind == Tok::AddrLit) {
      return {make_expr<AddrNode>(t.addr), ExprType::Addr, true};
    }
    if (t.kind == Tok::Punct && t.text == "(") {
      ExprInfo inner = parse_or();
      expect_punct(")");
      return inner;
    }
    if (t.kind == Tok::Ident) {
      if (t.text == "rule" || t.text == "map" || t.text == "on" || t.text == "and" ||
          t.text == "or" || t.text == "not") {
        error(t, "unexpected keyword '" + t.text + "' in expression");
        throw ParseAbort{};
      }
      if (lex_.peek().kind == Tok::Punct && lex_.peek().text == "[") {
        const MapDecl* m = result_.schema.find_map(t.text);
        if (!m) {
          error(t, "unknown map '" + t.text + "'");
          throw ParseAbort{};
        }
        used_maps_.insert(t.text);
        lex_.next();  // '['
        ExprInfo key = parse_or();
        expect_punct("]");
        ExprType want = m->key_kind == ValueKind::Addr ? ExprType::Addr : ExprType::Int;
        if (key.type != want) {
          error(t, "map '" + t.text + "' is keyed by " +
                       (want == ExprType::Addr ? "address" : "integer"));
          throw ParseAbort{};
        }
        return {make_expr<LookupNode>(t.text, key.expr), ExprType::Int, false};
      }
      // Parameter reference.
      if (t.text == kSenderParam) {
        return {make_expr<ParamNode>(t.text), ExprType::Addr, false};
      }
      const ParamDecl* p = fn_ ? fn_->find_param(t.text) : nullptr;
      if (!p) {
        error(t, "unknown identifier '" + t.text + "'");
        throw ParseAbort{};
      }
      return {make_expr<ParamNode>(t.text),
              p->kind == ValueKind::Addr ? ExprType::Addr : ExprType::Int, false};
    }
    error(t, "expected an expression");
    throw ParseAbort{};
  }

  bool is_ident(std::string_view kw) const {
    return lex_.peek().kind == Tok::Ident && lex_.peek().text == kw;
  }

  Token expect_ident(const std::string& what) {
    Token t = lex_.next();
    if (t.kind != Tok::Ident) {
      error(t, "expected " + what);
      throw ParseAbort{};
    }
    return t;
  }

  void expect_punct(std::string_view p) {
    Token t = lex_.next();
    if (t.kind != Tok::Punct || t.text != p) {
      error(t, "expected '" + std::string(p) + "'");
      throw ParseAbort{};
    }
  }

  void require_bool(const ExprInfo& e, const Token& at) {
    if (e.type != ExprType::Bool) {
      error(at, "operand of '" + at.text + "' must be a predicate");
      throw ParseAbort{};
    }
  }

  void require_int(const ExprInfo& e, const Token& at) {
    if (e.type != ExprType::Int) {
      error(at, "arithmetic requires integer operands");
      throw ParseAbort{};
    }
  }

  void error(const Token& at, std::string msg) {
    result_.diagnostics.push_back({Severity::Error, at.line, at.col, std::move(msg)});
  }

  void warn(const Token& at, std::string msg) {
    result_.diagnostics.push_back({Severity::Warning, at.line, at.col, std::move(msg)});
  }

  /// Skip tokens until the next top-level keyword after an error.
  void recover() {
    while (lex_.peek().kind != Tok::End) {
      if (lex_.peek().kind == Tok::Ident &&
          (lex_.peek().text == "rule" || lex_.peek().text == "map"))
        return;
      lex_.next();
    }
  }

  void finish_lint() {
    for (const auto& name : declared_maps_) {
      if (!used_maps_.count(name))
        result_.diagnostics.push_back(
            {Severity::Warning, 0, 0, "declared map '" + name + "' is never used"});
    }
  }

  Lexer lex_;
  ParseResult result_;
  const FunctionSig* fn_ = nullptr;
  std::set<std::string> declared_maps_;
  std::set<std::string> used_maps_;
};

}  // namespace parsedetail

/// Compiles rule-language source against a schema. Errors carry line and
/// column; a result with any error diagnostic has undefined rule content and
/// must not be deployed.
inline ParseResult parse_rules(std::string_view source, const StateSchema& schema) {
  parsedetail::Parser p(source, schema);
  return p.run();
}

}  // namespace regguard::regspec
