#include "srrw/functional.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "srrw/error.hpp"

namespace srrw {

namespace {

double norm2(std::span<const double> x) noexcept {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// E h(X) by brute force, used only where no closed form is coded.
double monte_carlo_reference(const FunctionalSpec& h, const StepDistribution& dist) {
  constexpr std::size_t kDraws = 1000000;
  RngStream rng(0x5EEDF00DULL);
  std::vector<double> x(dist.dim());
  double sum = 0.0;
  for (std::size_t k = 0; k < kDraws; ++k) {
    dist.sample(rng, x);
    sum += h(x);
  }
  return sum / static_cast<double>(kDraws);
}

template <class F>
double atom_average(const StepDistribution& dist, F&& f) {
  double s = 0.0;
  for (const auto& a : dist.support()) s += a.prob * f(std::span<const double>(a.point));
  return s;
}

FunctionalSpec finish(FunctionalSpec h, const StepDistribution& dist) {
  if (!dist.has_finite_moment(h.required_moment())) {
    h.moment_warning = true;
    h.reference = StepDistribution::kInf;
    return h;
  }
  const int d = dist.dim();
  switch (h.kind) {
    case FunctionalKind::constant:
      h.reference = h.param;
      break;
    case FunctionalKind::coordinate:
      h.reference = dist.mean()[h.i];
      break;
    case FunctionalKind::norm_squared:
      h.reference = dist.second_moment().trace();
      break;
    case FunctionalKind::cross_moment:
      h.reference = dist.second_moment()(h.i, h.j);
      break;
    case FunctionalKind::norm_power:
    case FunctionalKind::tail_indicator:
      if (dist.is_discrete()) {
        h.reference = atom_average(dist, [&](std::span<const double> x) { return h(x); });
      } else if (dist.kind() == DistKind::gaussian) {
        const double dd = d;
        if (h.kind == FunctionalKind::norm_power) {
          const double q = h.param;
          h.reference = std::pow(2.0, q / 2.0) *
                        std::exp(std::lgamma((dd + q) / 2.0) - std::lgamma(dd / 2.0));
        } else {
          // E |Z|^2 1{|Z|^2 >= K^2} = d P(chi^2_{d+2} >= K^2)
          h.reference = dd * boost::math::gamma_q((dd + 2.0) / 2.0, h.param * h.param / 2.0);
        }
      } else if (dist.kind() == DistKind::pareto) {
        const double a = dist.tail_index();
        const double s = dist.scale();
        if (h.kind == FunctionalKind::norm_power) {
          h.reference = std::pow(s, h.param) * a / (a - h.param);
        } else {
          const double k = std::max(h.param, s);
          h.reference = a * std::pow(s, a) * std::pow(k, 2.0 - a) / (a - 2.0);
        }
      } else {
        h.reference = monte_carlo_reference(h, dist);
        h.approximate_reference = true;
      }
      break;
  }
  return h;
}

void check_index(int i, const StepDistribution& dist) {
  if (i < 0 || i >= dist.dim()) throw std::out_of_range("coordinate index out of range");
}

}  // namespace

double FunctionalSpec::operator()(std::span<const double> x) const noexcept {
  switch (kind) {
    case FunctionalKind::constant:
      return param;
    case FunctionalKind::coordinate:
      return x[i];
    case FunctionalKind::norm_squared:
      return norm2(x);
    case FunctionalKind::cross_moment:
      return x[i] * x[j];
    case FunctionalKind::norm_power:
      return std::pow(norm2(x), param / 2.0);
    case FunctionalKind::tail_indicator: {
      const double r2 = norm2(x);
      return r2 >= param * param ? r2 : 0.0;
    }
  }
  return 0.0;
}

double FunctionalSpec::required_moment() const noexcept {
  switch (kind) {
    case FunctionalKind::constant:
      return 0.0;
    case FunctionalKind::coordinate:
      return 1.0;
    case FunctionalKind::norm_power:
      return param;
    default:
      return 2.0;
  }
}

FunctionalSpec make_constant(double c, const StepDistribution& dist) {
  FunctionalSpec h;
  h.kind = FunctionalKind::constant;
  h.param = c;
  h.name = "const";
  return finish(h, dist);
}

FunctionalSpec make_coordinate(int i, const StepDistribution& dist) {
  check_index(i, dist);
  FunctionalSpec h;
  h.kind = FunctionalKind::coordinate;
  h.i = i;
  h.name = "coord" + std::to_string(i);
  return finish(h, dist);
}

FunctionalSpec make_norm_squared(const StepDistribution& dist) {
  FunctionalSpec h;
  h.kind = FunctionalKind::norm_squared;
  h.name = "norm2";
  return finish(h, dist);
}

FunctionalSpec make_cross_moment(int i, int j, const StepDistribution& dist) {
  check_index(i, dist);
  check_index(j, dist);
  FunctionalSpec h;
  h.kind = FunctionalKind::cross_moment;
  h.i = i;
  h.j = j;
  h.name = "cross" + std::to_string(i) + std::to_string(j);
  return finish(h, dist);
}

FunctionalSpec make_norm_power(double q, const StepDistribution& dist) {
  if (!(q > 0.0)) throw std::invalid_argument("norm power must be positive");
  FunctionalSpec h;
  h.kind = FunctionalKind::norm_power;
  h.param = q;
  h.name = "normpow";
  return finish(h, dist);
}

FunctionalSpec make_tail_indicator(double k, const StepDistribution& dist) {
  if (!(k >= 0.0)) throw std::invalid_argument("tail cutoff must be nonnegative");
  FunctionalSpec h;
  h.kind = FunctionalKind::tail_indicator;
  h.param = k;
  h.name = "tail";
  return finish(h, dist);
}

FunctionalSpec parse_functional(std::string_view text, const StepDistribution& dist) {
  const auto open = text.find('(');
  const std::string_view name = text.substr(0, open);
  std::vector<double> args;
  if (open != std::string_view::npos) {
    const auto close = text.find(')', open);
    if (close == std::string_view::npos || close + 1 != text.size()) {
      throw ParseError("malformed functional", 1, open + 1);
    }
    std::string inner(text.substr(open + 1, close - open - 1));
    std::size_t p = 0;
    while (p < inner.size()) {
      std::size_t used = 0;
      try {
        args.push_back(std::stod(inner.substr(p), &used));
      } catch (const std::exception&) {
        throw ParseError("expected a number", 1, open + 2 + p);
      }
      p += used;
      while (p < inner.size() && (inner[p] == ',' || inner[p] == ' ')) ++p;
    }
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw ParseError(std::string(name) + " takes " + std::to_string(n) + " argument(s)", 1,
                       open == std::string_view::npos ? text.size() : open + 1);
    }
  };
  if (name == "const") { need(1); return make_constant(args[0], dist); }
  if (name == "coord") { need(1); return make_coordinate(static_cast<int>(args[0]), dist); }
  if (name == "norm2") { need(0); return make_norm_squared(dist); }
  if (name == "cross") {
    need(2);
    return make_cross_moment(static_cast<int>(args[0]), static_cast<int>(args[1]), dist);
  }
  if (name == "normpow") { need(1); return make_norm_power(args[0], dist); }
  if (name == "tail") { need(1); return make_tail_indicator(args[0], dist); }
  throw ParseError("unknown functional '" + std::string(name) + "'", 1, 1);
}

}  // namespace srrw
