#include "srrw/forest.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace srrw {

Forest::Forest() : parent_{0, 0}, kept_{0, 0}, root_{0, 1}, size_{0, 1}, clusters_(1) {}

Forest Forest::from_edges(std::span<const std::uint64_t> parents, const std::vector<bool>& kept) {
  if (parents.size() != kept.size()) throw std::invalid_argument("parents and kept differ in size");
  Forest f;
  f.reserve(parents.size() + 1);
  for (std::size_t k = 0; k < parents.size(); ++k) f.add_vertex(parents[k], kept[k]);
  return f;
}

void Forest::reserve(std::uint64_t n) {
  parent_.reserve(n + 1);
  kept_.reserve(n + 1);
  root_.reserve(n + 1);
  size_.reserve(n + 1);
}

void Forest::add_vertex(std::uint64_t parent, bool kept) {
  const std::uint64_t v = size() + 1;
  if (parent < 1 || parent >= v) {
    throw std::invalid_argument("vertex " + std::to_string(v) + " needs a parent in [1, " +
                                std::to_string(v - 1) + "]");
  }
  parent_.push_back(parent);
  kept_.push_back(kept ? 1 : 0);
  size_.push_back(0);
  if (kept) {
    const std::uint64_t r = root_[parent];
    root_.push_back(r);
    ++size_[r];
  } else {
    root_.push_back(v);
    size_[v] = 1;
    ++clusters_;
  }
}

std::vector<std::uint64_t> Forest::roots() const {
  std::vector<std::uint64_t> r;
  r.reserve(clusters_);
  for (std::uint64_t v = 1; v <= size(); ++v) {
    if (size_[v] > 0) r.push_back(v);
  }
  return r;
}

Forest grow_forest(std::uint64_t n, double alpha, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("forest needs n >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  Forest f;
  f.reserve(n);
  for (std::uint64_t v = 2; v <= n; ++v) {
    const std::uint64_t parent = 1 + rng.index(v - 1);
    const bool kept = rng.uniform() < alpha;
    f.add_vertex(parent, kept);
  }
  return f;
}

SpinAssignment draw_spins(const StepDistribution& dist, std::uint64_t n, RngStream& rng) {
  SpinAssignment s;
  s.d = dist.dim();
  s.spins.resize(n * static_cast<std::size_t>(s.d));
  for (std::uint64_t i = 0; i < n; ++i) {
    dist.sample(rng, std::span<double>(s.spins.data() + i * s.d, static_cast<std::size_t>(s.d)));
  }
  return s;
}

std::vector<double> walk_from_forest(const Forest& forest, const SpinAssignment& spins) {
  if (spins.size() < forest.size()) throw std::invalid_argument("need one spin per vertex");
  std::vector<double> s(spins.d, 0.0);
  for (std::uint64_t i = 1; i <= forest.size(); ++i) {
    const std::uint64_t c = forest.cluster_size(i);
    if (c == 0) continue;
    const auto theta = spins.spin(i);
    for (int k = 0; k < spins.d; ++k) s[k] += static_cast<double>(c) * theta[k];
  }
  return s;
}

ForestWalk::ForestWalk(StepDistribution dist, double alpha, std::uint64_t seed)
    : dist_(std::move(dist)), alpha_(alpha), rng_(seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  spins_.d = dist_.dim();
  spins_.spins.resize(spins_.d);
  dist_.sample(rng_, spins_.spins);
  position_ = spins_.spins;
}

void ForestWalk::step() {
  const std::uint64_t v = forest_.size() + 1;
  const std::uint64_t parent = 1 + rng_.index(v - 1);
  const bool kept = rng_.uniform() < alpha_;
  forest_.add_vertex(parent, kept);
  const auto d = static_cast<std::size_t>(spins_.d);
  spins_.spins.resize(v * d);
  std::span<double> theta(spins_.spins.data() + (v - 1) * d, d);
  dist_.sample(rng_, theta);
  // The new vertex grows the cluster of forest_.root(v) by one.
  const auto spin = spins_.spin(forest_.root(v));
  for (std::size_t k = 0; k < d; ++k) position_[k] += spin[k];
}

ClusterTrace cluster_size_trace(std::vector<std::uint64_t> times, double alpha, RngStream& rng,
                                std::uint64_t max_label) {
  if (times.empty()) throw std::invalid_argument("need at least one time");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (times[k] <= times[k - 1]) throw std::invalid_argument("times must be increasing");
  }
  if (times.front() < 1) throw std::invalid_argument("times must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");

  ClusterTrace out;
  out.times = times;
  out.normalized.assign(max_label, std::vector<double>(times.size(), 0.0));
  Forest f;
  f.reserve(times.back());
  std::size_t next = 0;
  for (std::uint64_t v = 1;; ++v) {
    if (v > 1) {
      const std::uint64_t parent = 1 + rng.index(v - 1);
      f.add_vertex(parent, rng.uniform() < alpha);
    }
    if (v == times[next]) {
      const double scale = std::pow(static_cast<double>(v), alpha);
      const std::uint64_t top = std::min<std::uint64_t>(max_label, v);
      for (std::uint64_t i = 1; i <= top; ++i) {
        out.normalized[i - 1][next] = static_cast<double>(f.cluster_size(i)) / scale;
      }
      if (++next == times.size()) break;
    }
  }
  return out;
}

WEstimate estimate_W(double alpha, const StepDistribution& dist, std::uint64_t n,
                     std::uint64_t truncation, RngStream& rng) {
  if (!(alpha > 0.5 && alpha <= 1.0)) {
    throw std::invalid_argument("the limit W is only defined for alpha in (1/2, 1]");
  }
  if (truncation > n) throw std::invalid_argument("truncation K must not exceed n");
  const Forest f = grow_forest(n, alpha, rng);
  const SpinAssignment spins = draw_spins(dist, n, rng);
  const double scale = std::pow(static_cast<double>(n), alpha);

  WEstimate w;
  w.full_sum = walk_from_forest(f, spins);
  for (double& x : w.full_sum) x /= scale;
  w.truncated.assign(dist.dim(), 0.0);
  for (std::uint64_t i = 1; i <= truncation; ++i) {
    const std::uint64_t c = f.cluster_size(i);
    if (c == 0) continue;
    const double rho = static_cast<double>(c) / scale;
    const auto theta = spins.spin(i);
    for (int k = 0; k < dist.dim(); ++k) w.truncated[k] += rho * theta[k];
  }
  return w;
}

// ---------------------------------------------------------------------------

namespace {

struct ForestEnumerator {
  const StepDistribution& dist;
  double alpha;
  int n;
  std::vector<std::uint64_t> parents;
  std::vector<bool> kept;
  Pmf pmf;

  void edges(double weight) {
    const auto v = static_cast<std::uint64_t>(parents.size()) + 2;
    if (static_cast<int>(v) > n) {
      spins_for(Forest::from_edges(parents, kept), weight);
      return;
    }
    const double attach = weight / static_cast<double>(v - 1);
    for (std::uint64_t p = 1; p < v; ++p) {
      parents.push_back(p);
      for (int k = 0; k < 2; ++k) {
        const double w = k ? alpha : 1.0 - alpha;
        if (w == 0.0) continue;
        kept.push_back(k == 1);
        edges(attach * w);
        kept.pop_back();
      }
      parents.pop_back();
    }
  }

  void spins_for(const Forest& f, double weight) {
    const auto roots = f.roots();
    const auto& atoms = dist.support();
    SpinAssignment s;
    s.d = dist.dim();
    s.spins.assign(static_cast<std::size_t>(n) * s.d, 0.0);
    std::vector<std::size_t> choice(roots.size(), 0);
    // Odometer over atom choices for each root; non-root spins never enter S_n.
    for (;;) {
      double w = weight;
      for (std::size_t r = 0; r < roots.size(); ++r) {
        const auto& a = atoms[choice[r]];
        w *= a.prob;
        std::copy(a.point.begin(), a.point.end(), s.spins.begin() + (roots[r] - 1) * s.d);
      }
      if (w > 0.0) pmf[walk_from_forest(f, s)] += w;
      std::size_t r = 0;
      while (r < roots.size() && ++choice[r] == atoms.size()) choice[r++] = 0;
      if (r == roots.size()) break;
    }
  }
};

}  // namespace

Pmf forest_pmf(const StepDistribution& dist, double alpha, int n) {
  if (!dist.is_discrete()) throw std::invalid_argument("forest enumeration needs a discrete law");
  if (n < 1 || n > 7) throw std::invalid_argument("forest enumeration supports 1 <= n <= 7");
  if (dist.support().size() > 4) throw std::invalid_argument("at most 4 atoms");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  ForestEnumerator e{dist, alpha, n, {}, {}, {}};
  e.edges(1.0);
  return merge_close_atoms(e.pmf);
}

void write_forest(std::ostream& out, const Forest& forest, double alpha) {
  out << "# n=" << forest.size() << " alpha=" << alpha << '\n';
  for (std::uint64_t v = 2; v <= forest.size(); ++v) {
    out << v << ' ' << forest.parent(v) << ' ' << (forest.kept(v) ? 1 : 0) << '\n';
  }
}

}  // namespace srrw
