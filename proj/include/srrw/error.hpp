#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace srrw {

/// Raised by the distribution grammar and the config reader. `line` and
/// `column` are 1-based; line is 1 for single-line inputs.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(format(what, line, column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line,
                            std::size_t column) {
    return std::to_string(line) + ":" + std::to_string(column) + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

}  // namespace srrw
