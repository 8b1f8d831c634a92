#pragma once

#include <span>
#include <string>

#include "srrw/distribution.hpp"

namespace srrw {

enum class FunctionalKind {
  constant,        // h(x) = c
  coordinate,      // h(x) = x(i)
  norm_squared,    // h(x) = |x|^2
  cross_moment,    // h(x) = x(i) x(j)
  norm_power,      // h(x) = |x|^q
  tail_indicator,  // h(x) = |x|^2 1{|x| >= K}
};

/// A scalar test function h together with its reference value E h(X_1) under
/// a particular step law. Empirical deviations are
///   Delta_n(h) = (1/n) sum_{i<=n} h(X_i) - E h(X_1).
struct FunctionalSpec {
  FunctionalKind kind = FunctionalKind::coordinate;
  int i = 0;
  int j = 0;
  double param = 0.0;  // c, q or K depending on kind
  std::string name;
  double reference = 0.0;
  /// Reference came from a 10^6-draw Monte Carlo estimate, not a formula.
  bool approximate_reference = false;
  /// The law lacks the moment h needs; reference is +inf and Delta_n is not
  /// meaningful, but running averages are still recorded.
  bool moment_warning = false;

  double operator()(std::span<const double> x) const noexcept;
  /// Moment order E|X|^s that makes E|h(X)| finite.
  double required_moment() const noexcept;
};

FunctionalSpec make_constant(double c, const StepDistribution& dist);
FunctionalSpec make_coordinate(int i, const StepDistribution& dist);
FunctionalSpec make_norm_squared(const StepDistribution& dist);
FunctionalSpec make_cross_moment(int i, int j, const StepDistribution& dist);
FunctionalSpec make_norm_power(double q, const StepDistribution& dist);
FunctionalSpec make_tail_indicator(double k, const StepDistribution& dist);

/// Parses "coord(0)", "norm2", "cross(0,1)", "normpow(2.5)", "tail(3)",
/// "const(1.5)" and attaches the reference value under dist.
FunctionalSpec parse_functional(std::string_view text, const StepDistribution& dist);

}  // namespace srrw
