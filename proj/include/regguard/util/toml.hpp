// Copyright 2026 The RegGuard Authors. Licensed under the Apache License,
// Version 2.0. See the LICENSE file in the project root or
// http://www.apache.org/licenses/LICENSE-2.0 for details.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace regguard::toml {

/// Reader for the TOML subset used by scenario files: [section] tables,
/// key = value pairs with string / integer / float / boolean values, and
/// # comments. Keys are flattened to "section.key". Nested tables, arrays,
/// dates and multi-line strings are not part of the config surface and are
/// rejected with a line-numbered error.
class Table {
 public:
  static Table parse(std::string_view text) {
    Table t;
    std::string section;
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
      size_t eol = text.find('\n', pos);
      std::string_view line =
          text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
      pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
      ++line_no;
      line = strip(line);
      if (line.empty() || line[0] == '#') continue;
      if (line[0] == '[') {
        if (line.back() != ']' || line.size() < 3)
          throw std::runtime_error(err(line_no, "malformed table header"));
        section = std::string(strip(line.substr(1, line.size() - 2)));
        if (section.empty() || section.find('[') != std::string::npos)
          throw std::runtime_error(err(line_no, "malformed table header"));
        continue;
      }
      size_t eq = find_eq(line);
      if (eq == std::string_view::npos)
        throw std::runtime_error(err(line_no, "expected key = value"));
      std::string key(strip(line.substr(0, eq)));
      std::string_view raw = strip(line.substr(eq + 1));
      if (key.empty() || raw.empty())
        throw std::runtime_error(err(line_no, "expected key = value"));
      std::string full = section.empty() ? key : section + "." + key;
      if (t.values_.count(full))
        throw std::runtime_error(err(line_no, "duplicate key '" + full + "'"));
      t.values_[full] = parse_value(raw, line_no);
      t.lines_[full] = line_no;
    }
    return t;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.kind != Kind::String) return std::nullopt;
    return it->second.str;
  }
  std::optional<int64_t> get_int(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.kind != Kind::Int) return std::nullopt;
    return it->second.num_i;
  }
  std::optional<double> get_float(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (it->second.kind == Kind::Float) return it->second.num_f;
    if (it->second.kind == Kind::Int) return static_cast<double>(it->second.num_i);
    return std::nullopt;
  }
  std::optional<bool> get_bool(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.kind != Kind::Bool) return std::nullopt;
    return it->second.b;
  }

  /// All keys, sorted, for unknown-key validation.
  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    out.reserve(values_.size());
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
  }

  size_t line_of(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
  }

 private:
  enum class Kind { String, Int, Float, Bool };
  struct Value {
    Kind kind = Kind::Int;
    std::string str;
    int64_t num_i = 0;
    double num_f = 0.0;
    bool b = false;
  };

  static std::string err(size_t line, const std::string& msg) {
    return "config line " + std::to_string(line) + ": " + msg;
  }

  static std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
      s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
      s.remove_suffix(1);
    return s;
  }

  /// First '=' outside a quoted string.
  static size_t find_eq(std::string_view line) {
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_str = !in_str;
      if (line[i] == '=' && !in_str) return i;
    }
    return std::string_view::npos;
  }

  static Value parse_value(std::string_view raw, size_t line_no) {
    Value v;
    if (raw[0] == '"') {
      size_t end = raw.find('"', 1);
      if (end == std::string_view::npos)
        throw std::runtime_error(err(line_no, "unterminated string"));
      std::string_view rest = strip(raw.substr(end + 1));
      if (!rest.empty() && rest[0] != '#')
        throw std::runtime_error(err(line_no, "trailing content after string"));
      v.kind = Kind::String;
      v.str = std::string(raw.substr(1, end - 1));
      return v;
    }
    // Strip a trailing comment from non-string values.
    size_t hash = raw.find('#');
    if (hash != std::string_view::npos) raw = strip(raw.substr(0, hash));
    if (raw == "true" || raw == "false") {
      v.kind = Kind::Bool;
      v.b = raw == "true";
      return v;
    }
    if (raw.front() == '[' || raw.front() == '{')
      throw std::runtime_error(err(line_no, "arrays and inline tables are not supported"));
    std::string s(raw);
    bool is_float = s.find('.') != std::string::npos || s.find('e') != std::string::npos ||
                    s.find('E') != std::string::npos;
    try {
      size_t used = 0;
      if (is_float) {
        v.kind = Kind::Float;
        v.num_f = std::stod(s, &used);
      } else {
        v.kind = Kind::Int;
        v.num_i = std::stoll(s, &used, 10);
      }
      if (used != s.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::runtime_error(err(line_no, "unrecognized value '" + s + "'"));
    }
    return v;
  }

  std::map<std::string, Value> values_;
  std::map<std::string, size_t> lines_;
};

}  // namespace regguard::toml
