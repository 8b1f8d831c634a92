#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "srrw/rng.hpp"

namespace srrw {

inline constexpr int kMaxDim = 32;

enum class DistKind { discrete, gaussian, rademacher, directions, pareto, linear_image };

struct Atom {
  std::vector<double> point;
  double prob = 0.0;
};

/// Step law of the walk. Immutable once built; copies share the underlying
/// data, so passing by value is cheap and thread-safe.
///
/// Rademacher and direction sets are stored as discrete atoms as well, so
/// counts-mode simulation and exact enumeration work for all three.
class StepDistribution {
 public:
  /// Probabilities must be nonnegative and sum to 1 within 1e-12. The law
  /// may not be the point mass at the origin.
  static StepDistribution discrete(std::vector<Atom> atoms);
  /// Standard normal on R^d.
  static StepDistribution gaussian(int d);
  /// Uniform on {-1, +1}.
  static StepDistribution rademacher();
  /// Uniform on the given set of vectors.
  static StepDistribution directions(std::vector<std::vector<double>> dirs);
  /// Symmetric Pareto on R: sign is +-1 with equal odds and P(|X| > x) =
  /// (x/scale)^(-tail_index) for x >= scale. Moments of order s are finite
  /// iff s < tail_index.
  static StepDistribution pareto(double tail_index, double scale = 1.0);

  /// Law of M X for X ~ this. M has dim() columns.
  StepDistribution linear_image(const Eigen::MatrixXd& map) const;

  DistKind kind() const noexcept { return impl_->kind; }
  int dim() const noexcept { return impl_->d; }
  const Eigen::VectorXd& mean() const noexcept { return impl_->mean; }
  /// Supremum of s with E|X|^s finite; infinity for bounded or gaussian laws.
  double moment_order() const noexcept { return impl_->moment_order; }
  bool has_finite_moment(double s) const noexcept {
    return s < impl_->moment_order || impl_->moment_order == kInf;
  }
  bool is_discrete() const noexcept { return !impl_->atoms.empty(); }
  /// Atoms of a discrete law; empty otherwise.
  const std::vector<Atom>& support() const noexcept { return impl_->atoms; }
  /// Pareto parameters; zero / one for other kinds.
  double tail_index() const noexcept { return impl_->tail_index; }
  double scale() const noexcept { return impl_->scale; }
  /// True when every atom has integer coordinates.
  bool integer_support() const noexcept { return impl_->integer_support; }

  /// E X X^T. Throws std::domain_error if second moments are infinite.
  Eigen::MatrixXd second_moment() const;
  /// E |X|^2 (the trace of second_moment()).
  double mean_square_norm() const { return second_moment().trace(); }

  /// Draws one step into out (size dim()).
  void sample(RngStream& rng, std::span<double> out) const;

  /// Canonical text form; parse_distribution(descriptor()) gives back an
  /// equivalent law.
  std::string descriptor() const;

  static constexpr double kInf = std::numeric_limits<double>::infinity();

 private:
  struct Impl {
    DistKind kind = DistKind::discrete;
    int d = 1;
    Eigen::VectorXd mean;
    double moment_order = kInf;
    std::vector<Atom> atoms;
    std::vector<double> cumulative;
    bool integer_support = false;
    bool uniform_atoms = false;
    double tail_index = 0.0;
    double scale = 1.0;
    std::shared_ptr<const StepDistribution> base;
    Eigen::MatrixXd map;
    std::string descriptor;
  };

  explicit StepDistribution(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  static StepDistribution from_atoms(DistKind kind, std::vector<Atom> atoms,
                                     std::string descriptor);

  std::shared_ptr<const Impl> impl_;
};

/// Parses the text grammar documented in README.md, e.g.
///   rademacher
///   gaussian(d=3)
///   pareto(a=1.5, scale=1.0)
///   directions[(2,0),(-2,0),(1,1.7320508),(-1,-1.7320508)]
///   discrete[(1,0):0.25,(-1,0):0.75]
///   whitened(directions[(2,0),(-2,0)])
///   linear(gaussian(d=2), [[1,0],[0,2]])
/// Bare `gaussian` takes its dimension from default_dim. Throws ParseError
/// with a 1-based column on malformed input.
StepDistribution parse_distribution(std::string_view text, int default_dim = 1);

struct SelfTestResult {
  bool applicable = false;  // false when the variance is infinite
  bool passed = true;
  double max_z = 0.0;       // largest |mean error| / standard error over coordinates
  std::size_t draws = 0;
};

/// Checks the declared mean against an empirical mean: every coordinate must
/// lie within `z_limit` standard errors. Skipped (applicable = false) for
/// laws without a finite second moment.
SelfTestResult self_test(const StepDistribution& dist, std::uint64_t seed,
                         std::size_t draws = 100000, double z_limit = 5.0);

}  // namespace srrw
