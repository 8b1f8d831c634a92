#include <cctype>
#include <charconv>
#include <string>

#include "srrw/distribution.hpp"
#include "srrw/error.hpp"
#include "srrw/model.hpp"

namespace srrw {

namespace {

class Parser {
 public:
  Parser(std::string_view text, int default_dim) : s_(text), default_dim_(default_dim) {}

  StepDistribution parse_all() {
    StepDistribution d = dist();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return d;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 1, pos_ + 1); }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(s_.substr(start, pos_ - start));
  }

  double number() {
    skip_ws();
    const char* first = s_.data() + pos_;
    const char* last = s_.data() + s_.size();
    if (first != last && *first == '+') ++first;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr == first) fail("expected a number");
    pos_ = static_cast<std::size_t>(ptr - s_.data());
    return v;
  }

  std::vector<double> vec() {
    expect('(');
    std::vector<double> v{number()};
    while (peek(',')) {
      ++pos_;
      v.push_back(number());
    }
    expect(')');
    return v;
  }

  // name = number, name = number, ...
  template <class F>
  void kwargs(F&& on_arg) {
    expect('(');
    if (peek(')')) {
      ++pos_;
      return;
    }
    do {
      if (peek(',')) ++pos_;
      const std::size_t at = pos_;
      const std::string key = ident();
      expect('=');
      const double value = number();
      if (!on_arg(key, value)) {
        pos_ = at;
        skip_ws();
        fail("unknown parameter '" + key + "'");
      }
    } while (peek(','));
    expect(')');
  }

  StepDistribution dist() {
    skip_ws();
    const std::size_t at = pos_;
    const std::string name = ident();
    try {
      if (name == "rademacher") {
        if (peek('(')) kwargs([](const std::string&, double) { return false; });
        return StepDistribution::rademacher();
      }
      if (name == "gaussian") {
        double d = default_dim_;
        if (peek('(')) {
          kwargs([&](const std::string& k, double v) {
            if (k != "d") return false;
            d = v;
            return true;
          });
        }
        if (d != static_cast<int>(d)) fail("gaussian dimension must be an integer");
        return StepDistribution::gaussian(static_cast<int>(d));
      }
      if (name == "pareto") {
        double a = 0.0, scale = 1.0;
        bool has_a = false;
        kwargs([&](const std::string& k, double v) {
          if (k == "a") {
            a = v;
            has_a = true;
          } else if (k == "scale") {
            scale = v;
          } else {
            return false;
          }
          return true;
        });
        if (!has_a) fail("pareto needs a tail index 'a'");
        return StepDistribution::pareto(a, scale);
      }
      if (name == "directions") {
        expect('[');
        std::vector<std::vector<double>> dirs{vec()};
        while (peek(',')) {
          ++pos_;
          dirs.push_back(vec());
        }
        expect(']');
        return StepDistribution::directions(std::move(dirs));
      }
      if (name == "discrete") {
        expect('[');
        std::vector<Atom> atoms;
        do {
          if (peek(',')) ++pos_;
          Atom a;
          a.point = vec();
          expect(':');
          a.prob = number();
          atoms.push_back(std::move(a));
        } while (peek(','));
        expect(']');
        return StepDistribution::discrete(std::move(atoms));
      }
      if (name == "whitened") {
        expect('(');
        StepDistribution inner = dist();
        expect(')');
        return whiten(inner);
      }
      if (name == "linear") {
        expect('(');
        StepDistribution inner = dist();
        expect(',');
        expect('[');
        std::vector<std::vector<double>> rows;
        do {
          if (peek(',')) ++pos_;
          expect('[');
          std::vector<double> row{number()};
          while (peek(',')) {
            ++pos_;
            row.push_back(number());
          }
          expect(']');
          rows.push_back(std::move(row));
        } while (peek(','));
        expect(']');
        expect(')');
        Eigen::MatrixXd m(rows.size(), rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          if (rows[r].size() != rows.front().size()) fail("matrix rows differ in length");
          for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
        }
        return inner.linear_image(m);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      pos_ = at;
      fail(std::string("invalid ") + name + ": " + e.what());
    }
    pos_ = at;
    fail("unknown distribution '" + name + "'");
  }

  std::string_view s_;
  int default_dim_;
  std::size_t pos_ = 0;
};

}  // namespace

StepDistribution parse_distribution(std::string_view text, int default_dim) {
  return Parser(text, default_dim).parse_all();
}

}  // namespace srrw
