#include "erlang_rain/config.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "erlang_rain/errors.hpp"

namespace erlang_rain {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what
                                  : what),
      line_(line),
      column_(column) {}

namespace {

bool is_bare(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
}

class Cursor {
 public:
  explicit Cursor(const std::string& s, int line0 = 1) : s_(s), line_(line0) {}

  bool done() const { return i_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[i_]; }
  char get() {
    const char c = s_[i_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }
  int line() const { return line_; }
  int col() const { return col_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_, col_); }

  void skip_blanks() {
    while (peek() == ' ' || peek() == '\t' || peek() == '\r') get();
  }
  // Blanks, newlines and comments, as allowed inside arrays.
  void skip_space() {
    for (;;) {
      skip_blanks();
      if (peek() == '#') {
        while (!done() && peek() != '\n') get();
      } else if (peek() == '\n') {
        get();
      } else {
        return;
      }
    }
  }
  void end_of_line() {
    skip_blanks();
    if (peek() == '#') {
      while (!done() && peek() != '\n') get();
    }
    if (!done() && peek() != '\n') fail(std::string("unexpected character '") + peek() + "'");
    if (!done()) get();
  }

  std::string bare_word() {
    std::string w;
    while (is_bare(peek())) w += get();
    return w;
  }

  ConfigValue value() {
    ConfigValue v;
    v.line = line_;
    v.column = col_;
    const char c = peek();
    if (c == '"') {
      v.kind = ConfigValue::Kind::string;
      v.text = quoted();
    } else if (c == '[') {
      v.kind = ConfigValue::Kind::array;
      get();
      skip_space();
      while (peek() != ']') {
        if (done()) fail("unterminated array");
        v.items.push_back(value());
        skip_space();
        if (peek() == ',') {
          get();
          skip_space();
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
      get();
    } else {
      std::string w;
      while (is_bare(peek()) || peek() == '.' || peek() == '+') w += get();
      if (w == "true" || w == "false") {
        v.kind = ConfigValue::Kind::boolean;
        v.flag = w == "true";
      } else if (valid_number(w)) {
        v.kind = ConfigValue::Kind::number;
        v.text = w;
      } else {
        throw ParseError(w.empty() ? "expected a value" : "invalid value '" + w + "'", v.line, v.column);
      }
    }
    return v;
  }

 private:
  std::string quoted() {
    get();
    std::string out;
    for (;;) {
      if (done() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      const int esc_line = line_;
      const int esc_col = col_ - 1;
      if (done()) fail("unterminated string");
      switch (get()) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: throw ParseError("unknown escape sequence", esc_line, esc_col);
      }
    }
  }

  static bool valid_number(std::string w) {
    if (w.empty()) return false;
    std::erase(w, '_');
    const char* b = w.data();
    const char* e = b + w.size();
    if (*b == '+') ++b;
    if (std::string_view(b, e - b) == "inf" || std::string_view(b, e - b) == "-inf") return true;
    double x = 0.0;
    const auto [p, ec] = std::from_chars(b, e, x);
    return ec == std::errc() && p == e;
  }

  const std::string& s_;
  std::size_t i_ = 0;
  int line_;
  int col_ = 1;
};

std::string location(const ConfigValue& v) {
  return v.line > 0 ? " (line " + std::to_string(v.line) + ", column " + std::to_string(v.column) + ")" : "";
}

[[noreturn]] void type_error(const ConfigValue& v, const std::string& where, const char* expected) {
  throw ValidationError(where + ": expected " + expected + location(v));
}

std::string clean_number(const std::string& text) {
  std::string t = text;
  std::erase(t, '_');
  if (!t.empty() && t[0] == '+') t.erase(0, 1);
  return t;
}

}  // namespace

ConfigValue ConfigValue::number(double x) {
  ConfigValue v;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  v.text.assign(buf, res.ptr);
  return v;
}

ConfigValue ConfigValue::integer(std::int64_t x) {
  ConfigValue v;
  v.text = std::to_string(x);
  return v;
}

ConfigValue ConfigValue::string(std::string s) {
  ConfigValue v;
  v.kind = Kind::string;
  v.text = std::move(s);
  return v;
}

ConfigValue ConfigValue::boolean(bool b) {
  ConfigValue v;
  v.kind = Kind::boolean;
  v.flag = b;
  return v;
}

ConfigValue ConfigValue::array(std::vector<ConfigValue> items) {
  ConfigValue v;
  v.kind = Kind::array;
  v.items = std::move(items);
  return v;
}

double ConfigValue::as_double(const std::string& where) const {
  if (kind != Kind::number) type_error(*this, where, "a number");
  const std::string t = clean_number(text);
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  std::from_chars(t.data(), t.data() + t.size(), x);
  return x;
}

std::int64_t ConfigValue::as_int(const std::string& where) const {
  if (kind != Kind::number) type_error(*this, where, "an integer");
  const std::string t = clean_number(text);
  std::int64_t x = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size()) type_error(*this, where, "an integer");
  return x;
}

std::uint64_t ConfigValue::as_uint(const std::string& where) const {
  if (kind != Kind::number) type_error(*this, where, "a non-negative integer");
  const std::string t = clean_number(text);
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (ec != std::errc() || p != t.data() + t.size()) type_error(*this, where, "a non-negative integer");
  return x;
}

bool ConfigValue::as_bool(const std::string& where) const {
  if (kind != Kind::boolean) type_error(*this, where, "true or false");
  return flag;
}

const std::string& ConfigValue::as_string(const std::string& where) const {
  if (kind != Kind::string) type_error(*this, where, "a string");
  return text;
}

std::vector<double> ConfigValue::as_doubles(const std::string& where) const {
  if (kind != Kind::array) type_error(*this, where, "an array of numbers");
  std::vector<double> out;
  for (const ConfigValue& item : items) out.push_back(item.as_double(where));
  return out;
}

std::vector<std::vector<double>> ConfigValue::as_rows(const std::string& where, std::size_t width) const {
  if (kind != Kind::array) type_error(*this, where, "an array of arrays");
  std::vector<std::vector<double>> out;
  for (const ConfigValue& row : items) {
    std::vector<double> r = row.as_doubles(where);
    if (r.size() != width)
      throw ValidationError(where + ": every row needs " + std::to_string(width) + " numbers" + location(row));
    out.push_back(std::move(r));
  }
  return out;
}

ConfigDoc parse_config(const std::string& text) {
  ConfigDoc doc;
  doc[""];
  std::string section;
  Cursor c(text);
  for (;;) {
    c.skip_space();
    if (c.done()) break;
    if (c.peek() == '[') {
      c.get();
      c.skip_blanks();
      const int line = c.line();
      const int col = c.col();
      section = c.bare_word();
      if (section.empty()) c.fail("expected a section name");
      c.skip_blanks();
      if (c.peek() != ']') c.fail("expected ']'");
      c.get();
      if (doc.count(section)) throw ParseError("duplicate section [" + section + "]", line, col);
      doc[section];
      c.end_of_line();
      continue;
    }
    const int line = c.line();
    const int col = c.col();
    const std::string key = c.bare_word();
    if (key.empty()) c.fail(std::string("unexpected character '") + c.peek() + "'");
    c.skip_blanks();
    if (c.peek() != '=') c.fail("expected '=' after key '" + key + "'");
    c.get();
    c.skip_blanks();
    ConfigValue v = c.value();
    auto& table = doc[section];
    if (table.count(key)) throw ParseError("duplicate key '" + key + "'", line, col);
    table.emplace(key, std::move(v));
    c.end_of_line();
  }
  return doc;
}

ConfigDoc parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'", 0, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line(), e.column());
  }
}

ConfigValue parse_value(const std::string& text) {
  Cursor c(text, 0);
  c.skip_blanks();
  ConfigValue v = c.value();
  c.skip_blanks();
  if (!c.done()) c.fail("trailing characters after value");
  v.line = 0;
  v.column = 0;
  return v;
}

void apply_assignment(ConfigDoc& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError("expected section.key=value, got '" + assignment + "'", 0, 0);
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  const auto dot = path.find('.');
  const std::string section = dot == std::string::npos ? "" : path.substr(0, dot);
  const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
  for (const std::string& part : {section, key}) {
    for (char ch : part)
      if (!is_bare(ch)) throw ParseError("invalid key '" + path + "'", 0, 0);
  }
  if (key.empty()) throw ParseError("invalid key '" + path + "'", 0, 0);
  ConfigValue v;
  try {
    v = parse_value(text);
  } catch (const ParseError&) {
    v = ConfigValue::string(text);
  }
  doc[section][key] = std::move(v);
}

void merge_into(ConfigDoc& base, const ConfigDoc& over) {
  for (const auto& [section, table] : over) {
    auto& dst = base[section];
    for (const auto& [key, value] : table) dst[key] = value;
  }
}

std::string format_value(const ConfigValue& v) {
  switch (v.kind) {
    case ConfigValue::Kind::number:
      return v.text;
    case ConfigValue::Kind::boolean:
      return v.flag ? "true" : "false";
    case ConfigValue::Kind::string: {
      std::string out = "\"";
      for (char c : v.text) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
          out += "\\n";
        } else if (c == '\t') {
          out += "\\t";
        } else {
          out += c;
        }
      }
      return out + "\"";
    }
    case ConfigValue::Kind::array: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.items.size(); ++i) {
        if (i) out += ", ";
        out += format_value(v.items[i]);
      }
      return out + "]";
    }
  }
  return {};
}

std::string format_config(const ConfigDoc& doc) {
  std::string out;
  const auto top = doc.find("");
  if (top != doc.end()) {
    for (const auto& [key, value] : top->second) out += key + " = " + format_value(value) + "\n";
  }
  for (const auto& [section, table] : doc) {
    if (section.empty()) continue;
    out += "\n[" + section + "]\n";
    for (const auto& [key, value] : table) out += key + " = " + format_value(value) + "\n";
  }
  return out;
}

}  // namespace erlang_rain
