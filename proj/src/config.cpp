#include "srrw/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "srrw/error.hpp"

namespace srrw {

namespace {

std::string type_name(const ConfigValue& v) {
  switch (v.value.index()) {
    case 0: return "number";
    case 1: return "string";
    case 2: return "boolean";
    default: return "array";
  }
}

[[noreturn]] void mismatch(const ConfigValue& v, const char* want) {
  throw ParseError(std::string("expected ") + want + ", found " + type_name(v), v.line, v.column);
}

std::optional<double> to_number(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) return std::nullopt;
  return v;
}

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t line_no) : s_(line), line_(line_no) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  std::size_t column() const { return pos_ + 1; }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, column()); }

  std::string identifier() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_' ||
            s_[pos_] == '-' || s_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ == start) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  ConfigValue value() {
    skip_ws();
    ConfigValue v;
    v.line = line_;
    v.column = column();
    const char c = peek();
    if (c == '"') {
      ++pos_;
      std::string out;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
        out.push_back(s_[pos_++]);
      }
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      v.value = std::move(out);
    } else if (c == '[') {
      ++pos_;
      std::vector<double> items;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
      } else {
        for (;;) {
          skip_ws();
          const std::size_t col = column();
          const auto tok = token();
          const auto num = to_number(tok);
          if (!num) throw ParseError("expected a number in array", line_, col);
          items.push_back(*num);
          skip_ws();
          if (peek() == ',') {
            ++pos_;
            continue;
          }
          if (peek() == ']') {
            ++pos_;
            break;
          }
          fail("expected ',' or ']'");
        }
      }
      v.value = std::move(items);
    } else {
      const auto tok = token();
      if (tok.empty()) fail("expected a value");
      if (tok == "true" || tok == "false") {
        v.value = tok == "true";
      } else if (auto num = to_number(tok)) {
        v.value = *num;
      } else {
        throw ParseError("cannot read '" + std::string(tok) + "' as a value (quote strings)",
                         v.line, v.column);
      }
    }
    return v;
  }

 private:
  std::string_view token() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != ',' &&
           s_[pos_] != ']' && s_[pos_] != '#') {
      ++pos_;
    }
    return s_.substr(start, pos_ - start);
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

double ConfigValue::as_double() const {
  if (const auto* d = std::get_if<double>(&value)) return *d;
  if (const auto* s = std::get_if<std::string>(&value)) {
    if (auto num = to_number(*s)) return *num;
  }
  mismatch(*this, "a number");
}

std::uint64_t ConfigValue::as_count() const {
  try {
    if (const auto* s = std::get_if<std::string>(&value)) return parse_count(*s);
    const double d = as_double();
    if (!(d >= 0.0) || d != std::floor(d) || d > 1.8e19) mismatch(*this, "a nonnegative integer");
    return static_cast<std::uint64_t>(d);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(e.what(), line, column);
  }
}

std::string ConfigValue::as_string() const {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  if (const auto* d = std::get_if<double>(&value)) {
    std::ostringstream o;
    o.precision(17);
    o << *d;
    return o.str();
  }
  mismatch(*this, "a string");
}

bool ConfigValue::as_bool() const {
  if (const auto* b = std::get_if<bool>(&value)) return *b;
  mismatch(*this, "a boolean");
}

std::vector<double> ConfigValue::as_list() const {
  if (const auto* l = std::get_if<std::vector<double>>(&value)) return *l;
  if (const auto* d = std::get_if<double>(&value)) return {*d};
  if (const auto* s = std::get_if<std::string>(&value)) {
    try {
      return parse_grid(*s);
    } catch (const std::exception& e) {
      throw ParseError(e.what(), line, column);
    }
  }
  mismatch(*this, "an array");
}

Config Config::parse(std::string_view text) {
  Config cfg;
  std::string current;
  cfg.tables_[current];
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    start = end + 1;

    LineParser p(line, line_no);
    if (p.at_end()) {
      if (end == text.size()) break;
      continue;
    }
    if (p.peek() == '[') {
      p.expect('[');
      const std::size_t col = p.column();
      current = p.identifier();
      p.expect(']');
      if (!p.at_end()) p.fail("unexpected text after table header");
      if (cfg.tables_.count(current) && !cfg.tables_[current].empty()) {
        throw ParseError("duplicate table [" + current + "]", line_no, col);
      }
      cfg.tables_[current];
    } else {
      p.skip_ws();
      const std::size_t col = p.column();
      const std::string key = p.identifier();
      p.expect('=');
      ConfigValue v = p.value();
      if (!p.at_end()) p.fail("unexpected text after value");
      auto& table = cfg.tables_[current];
      if (table.count(key)) throw ParseError("duplicate key '" + key + "'", line_no, col);
      table.emplace(key, std::move(v));
    }
    if (end == text.size()) break;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const ConfigValue* Config::find(const std::string& table, const std::string& key) const {
  auto t = tables_.find(table);
  if (t == tables_.end()) return nullptr;
  auto k = t->second.find(key);
  return k == t->second.end() ? nullptr : &k->second;
}

const std::map<std::string, ConfigValue>& Config::table(const std::string& name) const {
  static const std::map<std::string, ConfigValue> empty;
  auto t = tables_.find(name);
  return t == tables_.end() ? empty : t->second;
}

std::string Config::canonical() const {
  std::ostringstream o;
  o.precision(17);
  for (const auto& [name, table] : tables_) {
    if (table.empty()) continue;
    o << '[' << name << "]\n";
    for (const auto& [key, v] : table) {
      o << key << '=';
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::vector<double>>) {
              o << '[';
              for (std::size_t i = 0; i < x.size(); ++i) o << (i ? "," : "") << x[i];
              o << ']';
            } else if constexpr (std::is_same_v<T, std::string>) {
              o << '"' << x << '"';
            } else if constexpr (std::is_same_v<T, bool>) {
              o << (x ? "true" : "false");
            } else {
              o << x;
            }
          },
          v.value);
      o << '\n';
    }
  }
  return o.str();
}

std::vector<double> parse_grid(std::string_view text) {
  auto number = [](std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    auto v = to_number(s);
    if (!v) throw std::invalid_argument("cannot read '" + std::string(s) + "' as a number");
    return *v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string_view::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    if (b == std::string_view::npos) throw std::invalid_argument("grid must be lo:hi:step");
    const double lo = number(text.substr(0, a));
    const double hi = number(text.substr(a + 1, b - a - 1));
    const double step = number(text.substr(b + 1));
    if (!(step > 0.0) || hi < lo) throw std::invalid_argument("grid needs lo <= hi and step > 0");
    const auto count = static_cast<std::uint64_t>(std::floor((hi - lo) / step + 1e-3)) + 1;
    if (count > 100000) throw std::invalid_argument("grid is too large");
    for (std::uint64_t k = 0; k < count; ++k) out.push_back(lo + static_cast<double>(k) * step);
    return out;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(',', start), text.size());
    out.push_back(number(text.substr(start, end - start)));
    start = end + 1;
    if (end == text.size()) break;
  }
  return out;
}

std::uint64_t parse_count(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  const auto caret = text.find('^');
  double v = 0.0;
  if (caret != std::string_view::npos) {
    const auto base = to_number(text.substr(0, caret));
    const auto exp = to_number(text.substr(caret + 1));
    if (!base || !exp) throw std::invalid_argument("cannot read '" + std::string(text) + "'");
    v = std::pow(*base, *exp);
  } else {
    const auto num = to_number(text);
    if (!num) throw std::invalid_argument("cannot read '" + std::string(text) + "' as a count");
    v = *num;
  }
  if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19) {
    throw std::invalid_argument("'" + std::string(text) + "' is not a nonnegative integer");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace srrw
