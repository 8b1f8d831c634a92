#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace srrw {

/// A value from a config file: number, quoted string, boolean or an array
/// of numbers.
struct ConfigValue {
  std::variant<double, std::string, bool, std::vector<double>> value;
  std::size_t line = 0;
  std::size_t column = 0;

  /// Each accessor throws ParseError (with this value's position) on a type
  /// mismatch.
  double as_double() const;
  std::uint64_t as_count() const;  // nonnegative integer, "1e6" accepted
  std::string as_string() const;
  bool as_bool() const;
  std::vector<double> as_list() const;
};

/// Line-oriented config:
///
///   # comment
///   seed = 42
///   [sweep]
///   alpha = "0:1:0.125"
///   n = 1e6
///   radii = [10, 20, 40, 80]
///   whiten = true
///
/// Keys before the first [table] belong to the table "". Duplicate keys and
/// tables are errors.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  const ConfigValue* find(const std::string& table, const std::string& key) const;
  bool has_table(const std::string& table) const { return tables_.count(table) != 0; }
  const std::map<std::string, ConfigValue>& table(const std::string& name) const;
  const std::map<std::string, std::map<std::string, ConfigValue>>& tables() const {
    return tables_;
  }

  /// Stable text form (sorted tables and keys), used for hashing.
  std::string canonical() const;

 private:
  std::map<std::string, std::map<std::string, ConfigValue>> tables_;
};

/// "lo:hi:step" (inclusive of hi within step/1000) or "a,b,c".
std::vector<double> parse_grid(std::string_view text);

/// Nonnegative integer from "1000", "1e6" or "2^20".
std::uint64_t parse_count(std::string_view text);

}  // namespace srrw
