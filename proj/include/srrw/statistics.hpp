#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "srrw/distribution.hpp"
#include "srrw/functional.hpp"
#include "srrw/walk.hpp"

namespace srrw {

// ---------------------------------------------------------------------------
// Empirical deviations

struct DeltaSeries {
  std::vector<std::uint64_t> times;
  std::vector<double> values;
  /// The law lacks the moment h needs; values are the raw running averages.
  bool moment_warning = false;
};

/// Delta_n(h) = (1/n) sum_{i<=n} (h(X_i) - E h(X_1)) at the requested times
/// (every n when times is empty). The centered terms are summed with
/// compensation, so a constant h gives exactly zero.
DeltaSeries delta_n(const FunctionalSpec& h, const Trajectory& traj,
                    std::span<const std::uint64_t> times = {});

/// Frobenius norm of Delta_n(x x^T) = (1/n) sum X_i X_i^T - E X X^T.
std::vector<double> delta_second_moment_frobenius(const Trajectory& traj,
                                                  const Eigen::MatrixXd& second_moment,
                                                  std::span<const std::uint64_t> times);

// ---------------------------------------------------------------------------
// beta_n and gamma_n

/// gamma_n = (1 - alpha) / (n + 1), beta_n = prod_{k<n} (1 - gamma_k),
/// beta_1 = 1. Entry k of each vector belongs to n = k + 1.
struct BetaGamma {
  double alpha = 0.0;
  std::vector<double> beta;
  std::vector<double> gamma;
  /// beta_n n^(1 - alpha); tends to 1 / Gamma(1 + alpha).
  std::vector<double> scaled;
};

/// Accumulates log beta_n = sum log1p(-gamma_k) with compensation.
BetaGamma beta_gamma(std::uint64_t n_max, double alpha);

/// beta_n = Gamma(n + alpha) / (Gamma(1 + alpha) Gamma(n + 1)) via lgamma;
/// an independent route to the same sequence.
double beta_closed_form(std::uint64_t n, double alpha);

/// 1 / Gamma(1 + alpha).
double beta_scaling_limit(double alpha);

// ---------------------------------------------------------------------------
// Pathwise identities for Delta_n(h)

struct IdentityResidual {
  /// max over n of |Delta_{n+1} - Delta_n - gamma_n (eps_{n+1} - Delta_n)|
  /// relative to |Delta_n| + |Delta_{n+1}| + |h(X_{n+1}) - E h| / (n + 1).
  double recursion = 0.0;
  /// max over n of |Delta_n - beta_n (Delta_1 + sum_{j<n} gamma_j/beta_{j+1}
  /// eps_{j+1})| relative to beta_n (|Delta_1| + sum |gamma_j/beta_{j+1} eps_{j+1}|).
  double closed_form = 0.0;
  std::uint64_t steps = 0;
};

/// eps_{n+1}(h) = (h(X_{n+1}) - E h - alpha Delta_n(h)) / (1 - alpha).
/// The closed form starts from Delta_1 = h(X_1) - E h(X_1). Requires
/// alpha < 1 and a finite reference value.
IdentityResidual delta_identity_residual(const FunctionalSpec& h, const Trajectory& traj,
                                         double alpha);

// ---------------------------------------------------------------------------
// Rates and exponents

struct RateTrace {
  std::vector<std::uint64_t> times;
  std::vector<double> values;
  /// nu >= 1 - 1/s, where the decay is not claimed.
  bool warning = false;
};

/// n^nu |Delta_n(h)| from recorded deviations; `functional` indexes the
/// series' functionals, `moment_order` is s with E|h(X)|^s finite.
RateTrace mz_rate_trace(const CheckpointSeries& series, std::size_t functional, double nu,
                        double moment_order);

/// n^nu ||S_n / n - mean|| from recorded positions.
RateTrace mz_rate_trace_position(const CheckpointSeries& series, std::span<const double> mean,
                                 double nu, double moment_order);

struct ExponentEstimate {
  /// Least-squares slope of log ||S_n|| on log n over checkpoints with
  /// n >= n_final / 10.
  double slope = 0.0;
  /// log ||S_n|| / log n at the final checkpoint (0 when S_n = 0).
  double final_ratio = 0.0;
  std::size_t points = 0;
  bool valid = false;
};

/// Needs at least 4 checkpoints spanning at least 2 decades. Checkpoints
/// with S_n = 0 are dropped from the regression.
ExponentEstimate escape_exponent(std::span<const std::uint64_t> times,
                                 std::span<const double> norms);
ExponentEstimate escape_exponent(const CheckpointSeries& series);

struct LilTrace {
  std::vector<std::uint64_t> times;
  /// (S_n - n E X) / normalizer at each time.
  std::vector<double> ratio;
  /// max over 16 <= m <= n of the ratio (every step, not only checkpoints).
  std::vector<double> running_max;
};

/// Normalizer sqrt(2 n log log n Var / (1 - 2 alpha)) for alpha < 1/2 and
/// sqrt(2 n log n log log log n Var) for alpha = 1/2; alpha > 1/2 is
/// rejected. Uses coordinate `component` of the trajectory.
LilTrace lil_ratio(const Trajectory& traj, double alpha, double variance, double mean,
                   std::span<const std::uint64_t> times, int component = 0);
double lil_normalizer(std::uint64_t n, double alpha, double variance);

struct AngularSeries {
  std::vector<std::uint64_t> times;
  /// Unit vectors S_n / ||S_n||, row-major; the zero vector when S_n = 0.
  std::vector<double> directions;
  /// Largest pairwise distance among the last 4 directions.
  double tail_oscillation = 0.0;
};

AngularSeries angular_series(const CheckpointSeries& series);
/// Same statistic for an explicit list of positions (row-major, d columns).
double tail_oscillation(std::span<const double> positions, int d, std::size_t last = 4);

struct RecurrenceStats {
  std::vector<std::uint64_t> times;
  /// Returns to B(0, r) counted up to each time.
  std::vector<std::uint64_t> returns;
  /// min ||S_m|| over the final half n/2 < m <= n of the trajectory.
  double liminf_proxy = 0.0;
  /// Lattice walks only: visits per site inside B(0, r).
  std::map<std::vector<long long>, std::uint64_t> site_visits;
  bool lattice = false;
};

/// A walk is treated as lattice-valued when every position has integer
/// coordinates.
RecurrenceStats recurrence_stats(const Trajectory& traj, double r,
                                 std::span<const std::uint64_t> times = {});

/// Default return radius: 1 for lattice walks, 2 sqrt(E ||X||^2) otherwise.
double default_return_radius(const StepDistribution& dist);

struct ExitTime {
  double radius = 0.0;
  std::uint64_t time = 0;
  /// False when the safety horizon ran out first.
  bool exited = false;
};

inline constexpr std::uint64_t kExitSafetyHorizon = 1000000000ULL;

/// zeta_R = inf{n >= 0 : ||S_n|| >= R} for each R from one walk, S_0 = 0.
/// R = 0 gives zeta = 0. Full-mode walks are capped at kMaxFullHorizon.
std::vector<ExitTime> exit_times(const StepDistribution& dist, double alpha,
                                 std::span<const double> radii, std::uint64_t seed,
                                 std::uint64_t safety = kExitSafetyHorizon);

/// x_n = log(||S_n||^2 + n^kappa) / log n; n >= 2, kappa in (0, 1).
double xn_value(std::uint64_t n, double norm_squared, double kappa);
std::vector<double> xn_trace(const CheckpointSeries& series, double kappa);

// ---------------------------------------------------------------------------
// Report

/// Per-checkpoint series and summary scalars for one replica.
struct DiagnosticsReport {
  std::uint64_t replica = 0;
  std::vector<std::uint64_t> times;
  /// name -> one value per checkpoint time.
  std::map<std::string, std::vector<double>> series;
  std::map<std::string, double> summary;
  std::vector<std::string> warnings;

  /// Throws std::domain_error on NaN or on a series of the wrong length.
  void validate() const;
  std::string to_json() const;
  /// Header "replica,n,metric,value"; one row per checkpoint per metric.
  std::string to_csv() const;
};

/// Builds the standard report: norm, each recorded Delta_n, returns,
/// x_n (kappa), escape exponent and angular oscillation where defined.
DiagnosticsReport make_report(const CheckpointSeries& series, std::uint64_t replica,
                              double kappa = 0.9);

}  // namespace srrw
