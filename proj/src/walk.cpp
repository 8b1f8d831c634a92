#include "srrw/walk.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "srrw/numeric.hpp"

namespace srrw {

std::vector<std::uint64_t> CheckpointSchedule::times(std::uint64_t horizon) const {
  std::vector<std::uint64_t> t;
  if (!explicit_times.empty()) {
    for (auto v : explicit_times) {
      if (v >= 1 && v <= horizon && (t.empty() || v > t.back())) t.push_back(v);
    }
    if (t.empty() || t.back() != horizon) t.push_back(horizon);
    return t;
  }
  if (!(ratio > 1.0)) throw std::invalid_argument("checkpoint ratio must exceed 1");
  if (start < 1) throw std::invalid_argument("checkpoint start must be >= 1");
  double next = static_cast<double>(start);
  while (next < static_cast<double>(horizon)) {
    auto v = static_cast<std::uint64_t>(std::ceil(next));
    if (v >= horizon) break;
    if (t.empty() || v > t.back()) t.push_back(v);
    next *= ratio;
  }
  t.push_back(horizon);
  return t;
}

void WalkConfig::validate() const {
  params.validate();
  if (params.d != dist.dim()) {
    throw std::invalid_argument("config dimension " + std::to_string(params.d) +
                                " does not match distribution dimension " +
                                std::to_string(dist.dim()));
  }
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  (void)checkpoints.times(horizon);
  if (mode == WalkMode::counts && !dist.is_discrete()) {
    throw std::invalid_argument("counts mode requires a discrete step distribution");
  }
  if (resolved_mode() == WalkMode::full && horizon > kMaxFullHorizon) {
    throw std::invalid_argument("horizon exceeds the full-mode cap of 2^28 steps");
  }
  if (return_radius && !(*return_radius > 0.0)) {
    throw std::invalid_argument("return radius must be positive");
  }
}

WalkMode WalkConfig::resolved_mode() const {
  if (mode != WalkMode::automatic) return mode;
  return dist.is_discrete() && dist.support().size() <= kAutoCountsMaxSupport ? WalkMode::counts
                                                                            : WalkMode::full;
}

// ---------------------------------------------------------------------------
// WalkState

WalkState::WalkState(const StepDistribution& dist, double alpha, bool counts_mode,
                     std::uint64_t seed)
    : dist_(dist),
      alpha_(alpha),
      counts_mode_(counts_mode),
      d_(dist_.dim()),
      rng_(seed),
      position_(d_, 0.0),
      last_(d_, 0.0) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (counts_mode_) {
    if (!dist_.is_discrete()) {
      throw std::invalid_argument("counts mode requires a discrete step distribution");
    }
    counts_.assign(dist_.support().size(), 0);
    for (const auto& a : dist_.support()) weights_.push_back(a.prob);
  }
}

WalkState::WalkState(const StepDistribution& dist, double alpha, WalkMode mode,
                     std::uint64_t seed, std::uint64_t reserve)
    : WalkState(dist, alpha,
                mode == WalkMode::counts ||
                    (mode == WalkMode::automatic && dist.is_discrete() &&
                     dist.support().size() <= kAutoCountsMaxSupport),
                seed) {
  if (!counts_mode_ && reserve > 0) history_.reserve(reserve * static_cast<std::size_t>(d_));
  // X_1 ~ mu.
  if (counts_mode_) {
    const double u = rng_.uniform();
    std::size_t k = 0;
    double acc = 0.0;
    for (; k + 1 < weights_.size(); ++k) {
      acc += weights_[k];
      if (u < acc) break;
    }
    apply_atom(k);
  } else {
    std::vector<double> x(d_);
    dist_.sample(rng_, x);
    apply_step(x);
  }
}

WalkState WalkState::from_history(StepDistribution dist, double alpha,
                                  std::span<const double> steps, std::uint64_t seed) {
  const auto d = static_cast<std::size_t>(dist.dim());
  if (steps.empty() || steps.size() % d != 0) {
    throw std::invalid_argument("history must hold a positive whole number of steps");
  }
  WalkState st(std::move(dist), alpha, false, seed);
  for (std::size_t k = 0; k < steps.size(); k += d) st.apply_step(steps.subspan(k, d));
  return st;
}

WalkState WalkState::from_counts(StepDistribution dist, double alpha,
                                 std::span<const std::uint64_t> counts, std::uint64_t seed) {
  WalkState st(std::move(dist), alpha, true, seed);
  if (counts.size() != st.counts_.size()) throw std::invalid_argument("one count per atom");
  std::uint64_t n = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    st.counts_[k] = counts[k];
    n += counts[k];
  }
  if (n < 1) throw std::invalid_argument("a frozen state needs n >= 1");
  st.n_ = n;
  for (int i = 0; i < st.d_; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      s += static_cast<double>(counts[k]) * st.dist_.support()[k].point[i];
    }
    st.position_[i] = s;
  }
  return st;
}

void WalkState::apply_atom(std::size_t k) {
  const auto& p = dist_.support()[k].point;
  for (int i = 0; i < d_; ++i) {
    position_[i] += p[i];
    last_[i] = p[i];
  }
  ++counts_[k];
  last_atom_ = k;
  ++n_;
}

void WalkState::apply_step(std::span<const double> x) {
  for (int i = 0; i < d_; ++i) {
    position_[i] += x[i];
    last_[i] = x[i];
  }
  history_.insert(history_.end(), x.begin(), x.end());
  ++n_;
}

double WalkState::norm_squared() const noexcept {
  double s = 0.0;
  for (double v : position_) s += v * v;
  return s;
}

void WalkState::step() {
  if (counts_mode_) {
    // P(v) = alpha N_n(v)/n + (1 - alpha) mu(v), one categorical draw.
    const double nd = static_cast<double>(n_);
    const double target = rng_.uniform() * nd;
    const double fresh = (1.0 - alpha_) * nd;
    double acc = 0.0;
    std::size_t k = 0;
    for (; k + 1 < counts_.size(); ++k) {
      acc += alpha_ * static_cast<double>(counts_[k]) + fresh * weights_[k];
      if (target < acc) break;
    }
    apply_atom(k);
    return;
  }
  if (rng_.uniform() < alpha_) {
    const std::uint64_t u = rng_.index(n_);
    const std::size_t off = u * static_cast<std::size_t>(d_);
    // history_ may reallocate on insert; copy first.
    for (int i = 0; i < d_; ++i) last_[i] = history_[off + i];
    apply_step(std::span<const double>(last_));
  } else {
    std::array<double, kMaxDim> x{};
    dist_.sample(rng_, std::span<double>(x.data(), d_));
    apply_step(std::span<const double>(x.data(), d_));
  }
}

// ---------------------------------------------------------------------------

std::vector<double> Trajectory::positions() const {
  std::vector<double> out(steps.size());
  std::vector<double> s(d, 0.0);
  for (std::size_t k = 0; k < steps.size(); k += d) {
    for (int i = 0; i < d; ++i) {
      s[i] += steps[k + i];
      out[k + i] = s[i];
    }
  }
  return out;
}

CheckpointSeries run_walk(const WalkConfig& config,
                          std::span<const CheckpointObserver> observers) {
  config.validate();
  const auto times = config.checkpoints.times(config.horizon);
  const WalkMode mode = config.resolved_mode();

  WalkState st(config.dist, config.params.alpha, mode, config.seed,
               mode == WalkMode::full ? config.horizon : 0);

  CheckpointSeries series;
  series.d = st.dim();
  for (const auto& h : config.functionals) series.functional_names.push_back(h.name);
  series.records.reserve(times.size());
  if (config.retain_trajectory) {
    series.trajectory = Trajectory{st.dim(), {}};
    series.trajectory->steps.reserve(config.horizon * static_cast<std::size_t>(st.dim()));
  }

  std::vector<CompensatedSum> sums(config.functionals.size());
  std::optional<ReturnCounter> returns;
  if (config.return_radius) returns.emplace(*config.return_radius);
  double max_norm2 = 0.0;
  std::size_t next = 0;

  for (;;) {
    const auto x = st.last_step();
    for (std::size_t f = 0; f < sums.size(); ++f) sums[f].add(config.functionals[f](x));
    if (series.trajectory) {
      series.trajectory->steps.insert(series.trajectory->steps.end(), x.begin(), x.end());
    }
    const double r2 = st.norm_squared();
    if (!std::isfinite(r2)) {
      series.overflow = true;
      break;
    }
    max_norm2 = std::max(max_norm2, r2);
    if (returns) returns->observe(r2);

    const std::uint64_t n = st.time();
    if (next < times.size() && n == times[next]) {
      CheckpointRecord rec;
      rec.n = n;
      rec.position.assign(st.position().begin(), st.position().end());
      rec.norm = std::sqrt(r2);
      rec.max_norm = std::sqrt(max_norm2);
      rec.returns = returns ? returns->count() : 0;
      rec.deltas.reserve(sums.size());
      const double nd = static_cast<double>(n);
      for (std::size_t f = 0; f < sums.size(); ++f) {
        const auto& h = config.functionals[f];
        const double avg = sums[f].value() / nd;
        rec.deltas.push_back(h.moment_warning ? avg : avg - h.reference);
      }
      series.records.push_back(std::move(rec));
      for (const auto& obs : observers) obs(st);
      ++next;
    }
    if (n >= config.horizon) break;
    st.step();
  }
  return series;
}

// ---------------------------------------------------------------------------
// Exact enumeration

namespace {

struct Enumerator {
  const StepDistribution& dist;
  double alpha;
  int n;
  std::vector<std::size_t> history;
  std::map<std::vector<std::uint64_t>, double> by_counts;

  void recurse(double weight) {
    const int k = static_cast<int>(history.size());
    if (k == n) {
      std::vector<std::uint64_t> counts(dist.support().size(), 0);
      for (auto a : history) ++counts[a];
      by_counts[counts] += weight;
      return;
    }
    // Copy branch: xi = 1 (prob alpha), then U uniform on {1..k}.
    if (alpha > 0.0) {
      const double w = weight * alpha / k;
      for (int u = 0; u < k; ++u) {
        history.push_back(history[u]);
        recurse(w);
        history.pop_back();
      }
    }
    // Fresh branch: xi = 0 (prob 1 - alpha), then a new draw from mu.
    if (alpha < 1.0) {
      const auto& atoms = dist.support();
      for (std::size_t v = 0; v < atoms.size(); ++v) {
        if (atoms[v].prob == 0.0) continue;
        history.push_back(v);
        recurse(weight * (1.0 - alpha) * atoms[v].prob);
        history.pop_back();
      }
    }
  }
};

}  // namespace

Pmf merge_close_atoms(const Pmf& pmf, double tol) {
  std::vector<std::pair<std::vector<double>, double>> out;
  for (const auto& [pos, p] : pmf) {
    bool merged = false;
    for (auto& [q, w] : out) {
      double diff = 0.0;
      for (std::size_t i = 0; i < pos.size(); ++i) diff = std::max(diff, std::abs(pos[i] - q[i]));
      if (diff <= tol) {
        w += p;
        merged = true;
        break;
      }
    }
    if (!merged) out.emplace_back(pos, p);
  }
  return Pmf(out.begin(), out.end());
}

Pmf exact_small_n_pmf(const StepDistribution& dist, double alpha, int n) {
  if (!dist.is_discrete()) throw std::invalid_argument("exact enumeration needs a discrete law");
  if (n < 1 || n > 8) throw std::invalid_argument("exact enumeration supports 1 <= n <= 8");
  if (dist.support().size() > 4) {
    throw std::invalid_argument("exact enumeration supports at most 4 atoms");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");

  Enumerator e{dist, alpha, n, {}, {}};
  // X_1 ~ mu.
  for (std::size_t v = 0; v < dist.support().size(); ++v) {
    if (dist.support()[v].prob == 0.0) continue;
    e.history.push_back(v);
    e.recurse(dist.support()[v].prob);
    e.history.pop_back();
  }

  Pmf raw;
  const int d = dist.dim();
  for (const auto& [counts, p] : e.by_counts) {
    std::vector<double> pos(d, 0.0);
    for (int i = 0; i < d; ++i) {
      for (std::size_t v = 0; v < counts.size(); ++v) {
        pos[i] += static_cast<double>(counts[v]) * dist.support()[v].point[i];
      }
    }
    raw[pos] += p;
  }
  return merge_close_atoms(raw);
}

// ---------------------------------------------------------------------------
// Binary dump

namespace {

template <class T>
void put(std::ostream& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes{};
  if (!in.read(bytes.data(), bytes.size())) throw std::runtime_error("trajectory file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

}  // namespace

void write_trajectory(std::ostream& out, const TrajectoryFile& file) {
  const auto& t = file.trajectory;
  const std::uint64_t n = t.length();
  out.write(kTrajectoryMagic, sizeof(kTrajectoryMagic));
  put<std::uint32_t>(out, kTrajectoryVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.d));
  put<double>(out, file.alpha);
  put<std::uint64_t>(out, file.seed);
  put<std::uint64_t>(out, n);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(file.descriptor.size()));
  out.write(file.descriptor.data(), static_cast<std::streamsize>(file.descriptor.size()));
  for (int i = 0; i < t.d; ++i) {
    for (std::uint64_t k = 0; k < n; ++k) put<double>(out, t.steps[k * t.d + i]);
  }
  if (!out) throw std::runtime_error("failed writing trajectory");
}

TrajectoryFile read_trajectory(std::istream& in) {
  char magic[8];
  if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kTrajectoryMagic)) {
    throw std::runtime_error("not a trajectory file (bad magic)");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kTrajectoryVersion) {
    throw std::runtime_error("unsupported trajectory format version " + std::to_string(version));
  }
  TrajectoryFile f;
  f.trajectory.d = static_cast<int>(get<std::uint32_t>(in));
  if (f.trajectory.d < 1 || f.trajectory.d > kMaxDim) {
    throw std::runtime_error("trajectory dimension out of range");
  }
  f.alpha = get<double>(in);
  f.seed = get<std::uint64_t>(in);
  const auto n = get<std::uint64_t>(in);
  const auto len = get<std::uint32_t>(in);
  f.descriptor.resize(len);
  if (!in.read(f.descriptor.data(), len)) throw std::runtime_error("trajectory file truncated");
  const int d = f.trajectory.d;
  f.trajectory.steps.resize(n * d);
  for (int i = 0; i < d; ++i) {
    for (std::uint64_t k = 0; k < n; ++k) f.trajectory.steps[k * d + i] = get<double>(in);
  }
  return f;
}

}  // namespace srrw
