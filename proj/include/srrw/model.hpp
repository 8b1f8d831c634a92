#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "srrw/distribution.hpp"

namespace srrw {

/// Reinforcement parameter and ambient dimension. alpha in [0, 1].
struct ModelParams {
  double alpha = 0.0;
  int d = 1;

  void validate() const;
  /// Asymptotic claims (rates, limits) are only made for alpha < 1.
  bool asymptotic_regime() const noexcept { return alpha < 1.0; }
};

/// Elephant memory p -> reinforcement alpha for a walk choosing among k
/// directions: alpha = (k p - 1) / (k - 1). Rejects p < 1/k (that would be
/// negative reinforcement).
double erw_alpha(double p, int k);

/// Inverse of erw_alpha: p = ((k - 1) alpha + 1) / k.
double erw_memory(double alpha, int k);

/// Conditional law of the next ERW step given the direction counts N_n(v):
///   P(v) = alpha N_n(v) / n + (1 - alpha) / k.
/// The counts must sum to n >= 1.
std::vector<double> erw_step_probability(std::span<const std::uint64_t> counts,
                                         std::uint64_t n, double alpha);

/// Same law for a general discrete step distribution with atom weights w:
///   P(v) = alpha N_n(v) / n + (1 - alpha) w(v).
std::vector<double> reinforced_step_law(std::span<const std::uint64_t> counts,
                                        std::uint64_t n, double alpha,
                                        std::span<const double> weights);

/// T = (E X X^T)^(-1/2) and the second-moment matrix it was computed from.
struct WhiteningMap {
  Eigen::MatrixXd transform;
  Eigen::MatrixXd second_moment;

  /// Frobenius norm of T * M * T - I.
  double residual() const;
};

/// Throws std::domain_error when the second moment is infinite or singular
/// (rank-deficient at relative tolerance 1e-9); reduce with
/// genuine_dimension() first in that case.
WhiteningMap whitening_map(const StepDistribution& dist);

/// The whitened law T X; its second-moment matrix is the identity.
StepDistribution whiten(const StepDistribution& dist);

struct GenuineDimension {
  int rank = 0;
  /// d x k matrix whose columns form a basis of the span of the support.
  Eigen::MatrixXd basis;
  /// g = (A^T A)^(-1) A^T, so that x = A g(x) on the span.
  Eigen::MatrixXd projector;

  Eigen::VectorXd coordinates(const Eigen::VectorXd& x) const { return projector * x; }
};

/// Numerical rank of E X X^T at relative tolerance 1e-9 and a basis of its
/// range. The walk pushed through `projector` is a genuinely k-dimensional
/// walk with the same alpha.
GenuineDimension genuine_dimension(const StepDistribution& dist);

/// Relative eigenvalue cutoff used by genuine_dimension and whitening_map.
inline constexpr double kRankTolerance = 1e-9;

}  // namespace srrw
