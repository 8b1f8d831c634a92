#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "srrw/distribution.hpp"
#include "srrw/rng.hpp"
#include "srrw/walk.hpp"

namespace srrw {

/// Random recursive forest with Bernoulli bond percolation. Vertices carry
/// labels 1..n; vertex v >= 2 is attached to parent(v) < v and the edge is
/// kept iff kept(v) (xi_v = 1). Vertex 1 has xi_1 = 0 by convention.
///
/// Every cluster is rooted at its smallest label. Because a new vertex only
/// ever joins the cluster of an older vertex, the root of each vertex is
/// fixed when it is inserted, so the union-find is stored fully compressed:
/// root(v) is a direct lookup.
class Forest {
 public:
  /// F_1: the single vertex 1.
  Forest();

  /// Builds F_n from explicit choices; parents[k] and kept[k] describe vertex
  /// k + 2. Each parent must be a smaller label.
  static Forest from_edges(std::span<const std::uint64_t> parents, const std::vector<bool>& kept);

  /// Adds vertex size() + 1.
  void add_vertex(std::uint64_t parent, bool kept);

  std::uint64_t size() const noexcept { return parent_.size() - 1; }
  /// 0 for vertex 1.
  std::uint64_t parent(std::uint64_t v) const { return parent_.at(v); }
  bool kept(std::uint64_t v) const { return kept_.at(v) != 0; }
  std::uint64_t root(std::uint64_t v) const { return root_.at(v); }
  /// |c_{i,n}|; zero when i is not a root.
  std::uint64_t cluster_size(std::uint64_t i) const { return size_.at(i); }
  std::uint64_t cluster_count() const noexcept { return clusters_; }
  /// Roots in increasing label order.
  std::vector<std::uint64_t> roots() const;

  void reserve(std::uint64_t n);

 private:
  std::vector<std::uint64_t> parent_;
  std::vector<char> kept_;
  std::vector<std::uint64_t> root_;
  std::vector<std::uint64_t> size_;
  std::uint64_t clusters_ = 0;
};

/// Vertex v >= 2 attaches to a uniform vertex of {1..v-1}; the edge is kept
/// with probability alpha.
Forest grow_forest(std::uint64_t n, double alpha, RngStream& rng);

/// Spins Theta_1..Theta_n, i.i.d. from the step law, row-major.
struct SpinAssignment {
  int d = 1;
  std::vector<double> spins;

  std::uint64_t size() const noexcept { return spins.size() / static_cast<std::size_t>(d); }
  std::span<const double> spin(std::uint64_t i) const noexcept {
    return {spins.data() + (i - 1) * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }
};

SpinAssignment draw_spins(const StepDistribution& dist, std::uint64_t n, RngStream& rng);

/// S_n = sum over roots i of |c_{i,n}| Theta_i.
std::vector<double> walk_from_forest(const Forest& forest, const SpinAssignment& spins);

/// Grows a forest and its spins one vertex at a time and tracks S_n. Each
/// step is a draw of the walk, so this is a second, independent generator
/// of the same process.
class ForestWalk {
 public:
  ForestWalk(StepDistribution dist, double alpha, std::uint64_t seed);

  void step();
  std::uint64_t time() const noexcept { return forest_.size(); }
  std::span<const double> position() const noexcept { return position_; }
  const Forest& forest() const noexcept { return forest_; }
  const SpinAssignment& spins() const noexcept { return spins_; }

 private:
  StepDistribution dist_;
  double alpha_;
  RngStream rng_;
  Forest forest_;
  SpinAssignment spins_;
  std::vector<double> position_;
};

/// |c_{i,n}| / n^alpha for labels 1..max_label at each requested time.
struct ClusterTrace {
  std::vector<std::uint64_t> times;
  /// normalized[i - 1][k] for label i at times[k]; zero when i is not (yet)
  /// a root.
  std::vector<std::vector<double>> normalized;
};

ClusterTrace cluster_size_trace(std::vector<std::uint64_t> times, double alpha, RngStream& rng,
                                std::uint64_t max_label);

struct WEstimate {
  /// S_n / n^alpha.
  std::vector<double> full_sum;
  /// sum over roots i <= K of (|c_{i,n}| / n^alpha) Theta_i.
  std::vector<double> truncated;
};

/// Both estimators of the superdiffusive limit W = lim S_n / n^alpha. Only
/// defined for alpha in (1/2, 1]; K must not exceed n.
WEstimate estimate_W(double alpha, const StepDistribution& dist, std::uint64_t n,
                     std::uint64_t truncation, RngStream& rng);

/// Exact law of S_n from the forest construction, by enumeration of every
/// attachment sequence, every percolation pattern and every spin assignment
/// of the roots. n <= 7, at most 4 atoms.
Pmf forest_pmf(const StepDistribution& dist, double alpha, int n);

/// Text dump: a header line "# n=<n> alpha=<alpha>", then one line
/// "v parent kept" per vertex v >= 2.
void write_forest(std::ostream& out, const Forest& forest, double alpha);

}  // namespace srrw
