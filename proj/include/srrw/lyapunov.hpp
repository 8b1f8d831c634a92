#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace srrw {

enum class LyapunovKind {
  sqrt_abs,       // L(x) = sqrt|x| on R
  sqrt_log,       // f(x) = sqrt(log|x|) for |x| >= 1, else 0, on R^2
  inverse_power,  // h(x) = |x|^(-delta/4) for |x| >= 1, else 1, on R^d
};

struct LyapunovFn {
  LyapunovKind kind = LyapunovKind::sqrt_abs;
  double delta = 1.0;  // inverse_power only

  double operator()(std::span<const double> x) const;
};

/// y in E_eps(x), i.e. |y| <= |x|^(1 - eps).
bool in_truncation_set(std::span<const double> x, std::span<const double> y, double eps);

enum class Inequality {
  /// L(x+y) - L(x) <= sqrt|x| (y/(2x) - y^2/(10x^2) + C y^2 1{|y| > eps|x|} / x^2), x != 0.
  sqrt_abs,
  /// f(x+y) - f(x) <= 1 + |y|/|x|, x != 0.
  sqrt_log_global,
  /// Second-order bound on f for |x| >= r and y in E_eps(x):
  ///   (1/(2 sqrt(log|x|))) (x.y/|x|^2 + |y|^2/(2|x|^2) - (x.y)^2/|x|^4 + C|y|^2/|x|^(2+eps))
  ///   - (x.y)^2 / (8 log^(3/2)|x| |x|^4) + C|y|^2 / (|x|^(2+eps) log^(3/2)|x|).
  sqrt_log_local,
  /// Bound on h for |x| >= r and y in E_eps(x):
  ///   -(delta/4) |x|^(-2-delta/4) (x.y + |y|^2/2 - (1+delta/8)(x.y)^2/|x|^2 - C|y|^2/|x|^eps).
  inverse_power_local,
};

std::string inequality_name(Inequality id);
/// Accepts the names produced by inequality_name().
Inequality parse_inequality(std::string_view name);

struct InequalityParams {
  double epsilon = 0.1;
  double r = 1.0;
  double C = 1.0;
  double delta = 1.0;
  /// Dimension for inverse_power_local; 0 alternates between 3 and 4.
  int d = 0;
  /// inverse_power_local only: use |x|^(2+delta/2) in the prefactor instead
  /// of |x|^(2+delta/4). The former does not follow from the Taylor
  /// expansion of h and fails for inward y.
  bool half_delta_prefactor = false;
};

struct Sides {
  double lhs = 0.0;
  double rhs = 0.0;
  /// lhs - rhs; positive means the inequality fails at this point.
  double slack() const noexcept { return lhs - rhs; }
  /// Violations below 1e-12 (|lhs| + |rhs|) are treated as rounding noise.
  bool holds() const noexcept;
};

/// Both sides at (x, y). Dimensions: 1 for sqrt_abs, 2 for the f bounds.
Sides evaluate(Inequality id, const InequalityParams& p, std::span<const double> x,
               std::span<const double> y);

struct CertificationResult {
  Inequality id = Inequality::sqrt_abs;
  InequalityParams params;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  /// Largest lhs - rhs seen (negative when every sample has room to spare).
  double max_violation = -std::numeric_limits<double>::infinity();
  std::vector<double> worst_x;
  std::vector<double> worst_y;
  /// Samples that failed beyond the rounding allowance.
  std::uint64_t violations = 0;
  bool pass = false;

  std::string to_json() const;
};

/// Evaluates the inequality on n stratified samples drawn from the region
/// where it is claimed: log-uniform magnitudes, a slab within 1% of the
/// truncation or indicator boundary, and near-parallel, near-antiparallel
/// and near-orthogonal (x, y) pairs. Deterministic given the seed.
CertificationResult certify(Inequality id, const InequalityParams& p, std::uint64_t n,
                            std::uint64_t seed);

/// Largest eps in (0, 1) with sqrt(1+t) - 1 <= t/2 - t^2/10 on [-eps, eps],
/// located by bisection to 1e-12.
double taylor_radius();

/// Starting parameters: for sqrt_abs the Taylor radius and C = eps^(-3/2);
/// eps = 1/16 for the local f bound; eps = 1/8, delta = 1 for h.
InequalityParams default_params(Inequality id);

struct SearchGrid {
  std::vector<double> r;
  std::vector<double> C;
};

/// Default grid for each inequality (r is ignored by the sqrt_abs and
/// sqrt_log_global bounds).
SearchGrid default_grid(Inequality id);

struct ConstantSearch {
  bool found = false;
  InequalityParams params;
  CertificationResult result;
  /// One entry per grid point tried, in search order.
  std::vector<CertificationResult> attempts;

  std::string to_json() const;
};

/// Tries r in increasing order and, for each r, C in increasing order;
/// returns the first pair with zero violations over n samples. `base`
/// supplies eps, delta and d.
ConstantSearch find_constants(Inequality id, const InequalityParams& base, const SearchGrid& grid,
                              std::uint64_t n, std::uint64_t seed);

}  // namespace srrw
