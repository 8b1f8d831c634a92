#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srrw/distribution.hpp"
#include "srrw/functional.hpp"
#include "srrw/model.hpp"
#include "srrw/rng.hpp"

namespace srrw {

enum class WalkMode {
  full,       // keep every step; copies pick a uniform index into the history
  counts,     // keep per-atom counts; one categorical draw per step
  automatic,  // counts for discrete laws with <= kAutoCountsMaxSupport atoms
};

inline constexpr std::size_t kAutoCountsMaxSupport = 64;
/// Largest horizon accepted in full mode (the history costs 8 d n bytes).
inline constexpr std::uint64_t kMaxFullHorizon = std::uint64_t{1} << 28;

/// Geometric checkpoint times start, ceil(start g), ... below the horizon,
/// followed by the horizon itself. An explicit list overrides the geometric
/// rule.
struct CheckpointSchedule {
  std::uint64_t start = 64;
  double ratio = 2.0;
  std::vector<std::uint64_t> explicit_times;

  std::vector<std::uint64_t> times(std::uint64_t horizon) const;
};

struct WalkConfig {
  ModelParams params;
  StepDistribution dist = StepDistribution::rademacher();
  std::uint64_t horizon = 1000000;
  CheckpointSchedule checkpoints;
  std::uint64_t seed = 0;
  WalkMode mode = WalkMode::automatic;
  /// Running averages of these are recorded as Delta_n(h) at checkpoints.
  std::vector<FunctionalSpec> functionals;
  /// Count returns to the closed ball of this radius (see ReturnCounter).
  std::optional<double> return_radius;
  bool retain_trajectory = false;

  void validate() const;
  WalkMode resolved_mode() const;
};

/// Entries into the closed ball B(0, r) that follow an excursion beyond 2r.
/// S_0 = 0 starts inside the ball and does not count.
class ReturnCounter {
 public:
  explicit ReturnCounter(double r) : r2_(r * r), outer2_(4.0 * r * r) {}

  void observe(double norm_sq) noexcept {
    if (norm_sq > outer2_) {
      armed_ = true;
    } else if (armed_ && norm_sq <= r2_) {
      ++count_;
      armed_ = false;
    }
  }
  std::uint64_t count() const noexcept { return count_; }

 private:
  double r2_;
  double outer2_;
  bool armed_ = false;
  std::uint64_t count_ = 0;
};

/// One replica of the walk. Copyable, so a state can be frozen and continued
/// many times with different streams.
///
/// Full mode draws a uniform u; if u < alpha it then draws the copy index U,
/// otherwise a fresh step. U is only consumed when a copy happens, so stream
/// alignment differs from a literal "always draw U" reading while the law is
/// the same.
class WalkState {
 public:
  /// Draws X_1 from dist; time() == 1 afterwards.
  WalkState(const StepDistribution& dist, double alpha, WalkMode mode, std::uint64_t seed,
            std::uint64_t reserve = 0);

  /// Full-mode state with the given history (row-major, n x d).
  static WalkState from_history(StepDistribution dist, double alpha,
                                std::span<const double> steps, std::uint64_t seed);
  /// Counts-mode state with N_n(v) given per atom of dist.
  static WalkState from_counts(StepDistribution dist, double alpha,
                               std::span<const std::uint64_t> counts, std::uint64_t seed);

  void step();

  std::uint64_t time() const noexcept { return n_; }
  int dim() const noexcept { return d_; }
  double alpha() const noexcept { return alpha_; }
  bool counts_mode() const noexcept { return counts_mode_; }
  std::span<const double> position() const noexcept { return position_; }
  std::span<const double> last_step() const noexcept { return last_; }
  double norm_squared() const noexcept;
  /// Counts mode only: N_n(v) per atom of the distribution.
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  /// Full mode only: X_1..X_n flattened row-major.
  std::span<const double> history() const noexcept { return history_; }
  /// Counts mode only: index of the atom taken by the last step.
  std::size_t last_atom() const noexcept { return last_atom_; }
  const StepDistribution& distribution() const noexcept { return dist_; }
  void reseed(std::uint64_t seed) { rng_ = RngStream(seed); }

 private:
  WalkState(const StepDistribution& dist, double alpha, bool counts_mode, std::uint64_t seed);
  void apply_atom(std::size_t k);
  void apply_step(std::span<const double> x);

  StepDistribution dist_;
  double alpha_;
  bool counts_mode_;
  int d_;
  std::uint64_t n_ = 0;
  RngStream rng_;
  std::vector<double> position_;
  std::vector<double> last_;
  std::vector<double> history_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> weights_;
  std::size_t last_atom_ = 0;
};

struct CheckpointRecord {
  std::uint64_t n = 0;
  std::vector<double> position;
  double norm = 0.0;
  /// Delta_n(h) for each configured functional (running average when the
  /// functional carries a moment warning).
  std::vector<double> deltas;
  double max_norm = 0.0;
  std::uint64_t returns = 0;
};

/// Steps X_1..X_n, row-major.
struct Trajectory {
  int d = 1;
  std::vector<double> steps;

  std::uint64_t length() const noexcept { return steps.size() / static_cast<std::size_t>(d); }
  /// 1-based, matching X_k.
  std::span<const double> step(std::uint64_t k) const noexcept {
    return {steps.data() + (k - 1) * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
  }
  /// Positions S_1..S_n, row-major.
  std::vector<double> positions() const;
};

struct CheckpointSeries {
  int d = 1;
  std::vector<std::string> functional_names;
  std::vector<CheckpointRecord> records;
  /// |S_n| left the floating range; records stop at the last finite value.
  bool overflow = false;
  std::optional<Trajectory> trajectory;
};

using CheckpointObserver = std::function<void(const WalkState&)>;

/// Simulates one replica. The result is a pure function of the config; the
/// observers run at every checkpoint time (the horizon included).
CheckpointSeries run_walk(const WalkConfig& config,
                          std::span<const CheckpointObserver> observers = {});

/// Exact law of S_n as position -> probability.
using Pmf = std::map<std::vector<double>, double>;

/// Law of S_n by weighted enumeration of every branch of the recursive
/// construction (first draw, then per step: copy flag, copied index, fresh
/// draw). Limited to n <= 8 and at most 4 atoms. Positions equal within 1e-9
/// are merged.
Pmf exact_small_n_pmf(const StepDistribution& dist, double alpha, int n);

/// Merges positions that agree within tol (max-norm).
Pmf merge_close_atoms(const Pmf& pmf, double tol = 1e-9);

// Binary trajectory dump, little-endian:
//   char[8]  magic "SRRWTRAJ"
//   u32      format version (1)
//   u32      d
//   f64      alpha
//   u64      seed
//   u64      n
//   u32      descriptor length L, then L bytes of distribution descriptor
//   f64[n]   column 0 of the steps, then column 1, ..., column d-1
inline constexpr char kTrajectoryMagic[8] = {'S', 'R', 'R', 'W', 'T', 'R', 'A', 'J'};
inline constexpr std::uint32_t kTrajectoryVersion = 1;

struct TrajectoryFile {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string descriptor;
  Trajectory trajectory;
};

void write_trajectory(std::ostream& out, const TrajectoryFile& file);
/// Throws std::runtime_error on bad magic, unknown version or truncation.
TrajectoryFile read_trajectory(std::istream& in);

}  // namespace srrw
