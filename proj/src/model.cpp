#include "srrw/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace srrw {

void ModelParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension out of range");
}

double erw_alpha(double p, int k) {
  if (k < 2) throw std::invalid_argument("need at least two directions");
  const double kd = static_cast<double>(k);
  if (!(p <= 1.0)) throw std::invalid_argument("memory parameter p must be <= 1");
  // p == 1/k gives alpha == 0 exactly; allow a rounding ulp below it.
  if (!(p * kd >= 1.0 - 1e-15)) {
    throw std::invalid_argument("memory parameter p < 1/k corresponds to negative reinforcement");
  }
  return std::max(0.0, (kd * p - 1.0) / (kd - 1.0));
}

double erw_memory(double alpha, int k) {
  if (k < 2) throw std::invalid_argument("need at least two directions");
  const double kd = static_cast<double>(k);
  return ((kd - 1.0) * alpha + 1.0) / kd;
}

std::vector<double> reinforced_step_law(std::span<const std::uint64_t> counts,
                                        std::uint64_t n, double alpha,
                                        std::span<const double> weights) {
  if (counts.size() != weights.size()) {
    throw std::invalid_argument("counts and weights differ in length");
  }
  if (n < 1) throw std::invalid_argument("step law needs n >= 1");
  const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total != n) {
    throw std::invalid_argument("direction counts sum to " + std::to_string(total) +
                                ", expected n = " + std::to_string(n));
  }
  std::vector<double> p(counts.size());
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = alpha * static_cast<double>(counts[i]) / nd + (1.0 - alpha) * weights[i];
  }
  return p;
}

std::vector<double> erw_step_probability(std::span<const std::uint64_t> counts,
                                         std::uint64_t n, double alpha) {
  std::vector<double> w(counts.size(), 1.0 / static_cast<double>(counts.size()));
  return reinforced_step_law(counts, n, alpha, w);
}

double WhiteningMap::residual() const {
  const auto k = second_moment.rows();
  return (transform * second_moment * transform - Eigen::MatrixXd::Identity(k, k)).norm();
}

WhiteningMap whitening_map(const StepDistribution& dist) {
  const Eigen::MatrixXd m = dist.second_moment();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  if (!(ev.minCoeff() > kRankTolerance * top)) {
    throw std::domain_error(
        "second-moment matrix is singular; the law is not genuinely " +
        std::to_string(dist.dim()) + "-dimensional (reduce it with genuine_dimension first)");
  }
  const Eigen::VectorXd inv_sqrt = ev.array().rsqrt();
  Eigen::MatrixXd t = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
  // Symmetrize away rounding so T is exactly symmetric.
  t = 0.5 * (t + t.transpose()).eval();
  return {t, m};
}

StepDistribution whiten(const StepDistribution& dist) {
  return dist.linear_image(whitening_map(dist).transform);
}

GenuineDimension genuine_dimension(const StepDistribution& dist) {
  const Eigen::MatrixXd m = dist.second_moment();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.maxCoeff();

  GenuineDimension g;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i) {
    if (top > 0.0 && ev[i] > kRankTolerance * top) keep.push_back(i);
  }
  g.rank = static_cast<int>(keep.size());
  g.basis.resize(m.rows(), g.rank);
  for (int c = 0; c < g.rank; ++c) g.basis.col(c) = es.eigenvectors().col(keep[c]);
  if (g.rank > 0) {
    const Eigen::MatrixXd ata = g.basis.transpose() * g.basis;
    g.projector = ata.ldlt().solve(g.basis.transpose());
  } else {
    g.projector.resize(0, m.rows());
  }
  return g;
}

}  // namespace srrw
