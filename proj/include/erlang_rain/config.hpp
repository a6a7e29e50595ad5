#pragma once

// Reader and writer for the scenario file format, a subset of TOML:
//
//   # comment
//   top_level = 1.5
//   [section]
//   key = "string" | 12 | -3.5e-4 | true | [1, 2, [3, 4]]
//
// Arrays may span lines and carry a trailing comma. Tables-in-arrays,
// dotted keys, inline tables and dates are not part of the subset.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace erlang_rain {

/// Malformed configuration text; line and column are 1-based (0 when the
/// text came from a command-line flag).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ConfigValue {
  enum class Kind { number, boolean, string, array };

  Kind kind = Kind::number;
  std::string text;                ///< number literal or decoded string
  bool flag = false;
  std::vector<ConfigValue> items;
  int line = 0;
  int column = 0;

  static ConfigValue number(double x);
  static ConfigValue integer(std::int64_t x);
  static ConfigValue string(std::string s);
  static ConfigValue boolean(bool b);
  static ConfigValue array(std::vector<ConfigValue> items);

  /// Typed accessors; `where` names the key in error messages.
  double as_double(const std::string& where) const;
  std::int64_t as_int(const std::string& where) const;
  std::uint64_t as_uint(const std::string& where) const;
  bool as_bool(const std::string& where) const;
  const std::string& as_string(const std::string& where) const;
  std::vector<double> as_doubles(const std::string& where) const;
  /// Array of fixed-width numeric rows, e.g. [[lo, hi], ...].
  std::vector<std::vector<double>> as_rows(const std::string& where, std::size_t width) const;
};

/// Section name -> key -> value. The top level is the section "".
using ConfigDoc = std::map<std::string, std::map<std::string, ConfigValue>>;

ConfigDoc parse_config(const std::string& text);
ConfigDoc parse_config_file(const std::string& path);

/// Parses a single value; throws ParseError when the text is not one.
ConfigValue parse_value(const std::string& text);

/// Applies `section.key=value` (or `key=value` for the top level). A value that
/// does not parse as a literal is taken as a bare string.
void apply_assignment(ConfigDoc& doc, const std::string& assignment);

/// Keys of `over` replace those of `base`.
void merge_into(ConfigDoc& base, const ConfigDoc& over);

std::string format_value(const ConfigValue& v);
/// Top level first, then sections in name order.
std::string format_config(const ConfigDoc& doc);

}  // namespace erlang_rain
