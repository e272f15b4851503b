#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cabinsim::toml {

// Minimal TOML subset used by the simulator configs: [section] headers,
// key = value pairs, # comments, and scalar values (string, integer,
// float, boolean) plus flat arrays of scalars. Dotted keys, multi-line
// strings, dates, and inline tables are not supported.

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<bool, std::int64_t, double, std::string, Array> data;

  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_float() const { return std::holds_alternative<double>(data); }
  bool is_number() const { return is_integer() || is_float(); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }

  bool as_bool() const { return std::get<bool>(data); }
  double as_number() const {
    return is_integer() ? static_cast<double>(std::get<std::int64_t>(data))
                        : std::get<double>(data);
  }
  std::int64_t as_integer() const { return std::get<std::int64_t>(data); }
  const std::string& as_string() const { return std::get<std::string>(data); }
  const Array& as_array() const { return std::get<Array>(data); }
};

/// Parsed document: entries keyed by "section.key" ("key" outside sections).
struct Document {
  std::map<std::string, Value> entries;

  const Value* find(std::string_view key) const {
    auto it = entries.find(std::string(key));
    return it == entries.end() ? nullptr : &it->second;
  }
};

namespace detail {

inline void skip_ws(std::string_view s, std::size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

inline bool is_bare_key_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

inline Value parse_scalar(std::string_view tok, int line) {
  if (tok.empty()) throw ParseError(line, "missing value");
  if (tok == "true") return Value{true};
  if (tok == "false") return Value{false};
  if (tok.front() == '"') {
    if (tok.size() < 2 || tok.back() != '"') throw ParseError(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < tok.size(); ++i) {
      char c = tok[i];
      if (c == '\\') {
        if (i + 2 >= tok.size()) throw ParseError(line, "dangling escape in string");
        char e = tok[++i];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '\\': out.push_back('\\'); break;
          case '"': out.push_back('"'); break;
          default: throw ParseError(line, std::string("unsupported escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    return Value{std::move(out)};
  }
  // Number: integer when it parses fully without . e E, float otherwise.
  const std::string text(tok);
  const bool looks_float = text.find_first_of(".eE") != std::string::npos;
  try {
    std::size_t used = 0;
    if (!looks_float) {
      const std::int64_t v = std::stoll(text, &used);
      if (used == text.size()) return Value{v};
    }
    const double d = std::stod(text, &used);
    if (used == text.size()) return Value{d};
  } catch (const std::exception&) {
    // fall through to the error below
  }
  throw ParseError(line, "cannot parse value '" + text + "'");
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

/// Strips a trailing comment that is not inside a string literal.
inline std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

inline Value parse_value(std::string_view tok, int line) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '[') {
    if (tok.back() != ']') throw ParseError(line, "unterminated array");
    Array arr;
    std::string_view body = tok.substr(1, tok.size() - 2);
    std::size_t start = 0;
    bool in_string = false;
    for (std::size_t i = 0; i <= body.size(); ++i) {
      if (i < body.size() && body[i] == '"' && (i == 0 || body[i - 1] != '\\'))
        in_string = !in_string;
      if (i == body.size() || (body[i] == ',' && !in_string)) {
        const std::string_view item = trim(body.substr(start, i - start));
        if (!item.empty()) arr.push_back(parse_scalar(item, line));
        start = i + 1;
      }
    }
    return Value{std::move(arr)};
  }
  return parse_scalar(tok, line);
}

}  // namespace detail

inline Document parse(std::string_view text) {
  Document doc;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    std::string_view line = detail::trim(detail::strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ParseError(line_no, "malformed section header");
      const std::string_view name = detail::trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ParseError(line_no, "empty section name");
      for (char c : name)
        if (!detail::is_bare_key_char(c) && c != '.')
          throw ParseError(line_no, "invalid section name");
      section = std::string(name);
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string_view key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(line_no, "empty key");
    for (char c : key)
      if (!detail::is_bare_key_char(c)) throw ParseError(line_no, "invalid key character");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (doc.entries.count(full)) throw ParseError(line_no, "duplicate key '" + full + "'");
    doc.entries.emplace(full, detail::parse_value(line.substr(eq + 1), line_no));
  }
  return doc;
}

inline Document parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace cabinsim::toml
