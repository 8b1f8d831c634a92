#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "srrw/aggregate.hpp"
#include "srrw/distribution.hpp"
#include "srrw/walk.hpp"

namespace srrw {

inline constexpr const char* kToolVersion = "0.1.0";

/// Metadata embedded in every output file.
struct Provenance {
  std::string command;
  std::uint64_t seed = 0;
  /// FNV-1a of the canonical config text, 16 hex digits.
  std::string config_hash;

  /// "# key: value" lines for CSV headers.
  std::string csv_header() const;
  /// Object with tool_version, rng, seed, config_hash, command.
  std::string json_fields() const;
};

std::string hash_hex(std::string_view text);

/// Number of worker threads to use when the caller asks for 0.
unsigned default_threads();

/// Thrown when a replica fails; names the replica.
struct ReplicaError : std::runtime_error {
  ReplicaError(std::uint64_t replica, const std::string& what);
  std::uint64_t replica;
};

/// Runs task(i) for i in [0, count) on `threads` workers (0 = all cores).
/// Workers pull indices from a shared counter and results are stored by
/// index, so the output is independent of scheduling. If any replica throws,
/// the lowest failing index is reported as a ReplicaError after all workers
/// stop.
void run_indexed(std::uint64_t count, unsigned threads,
                 const std::function<void(std::uint64_t)>& task);

template <class R>
std::vector<R> run_replicas(std::uint64_t count, unsigned threads,
                            const std::function<R(std::uint64_t)>& task) {
  std::vector<R> out(count);
  run_indexed(count, threads, [&](std::uint64_t i) { out[i] = task(i); });
  return out;
}

/// One (alpha, d, distribution, n) cell of an experiment.
struct Cell {
  double alpha = 0.0;
  StepDistribution dist = StepDistribution::rademacher();
  std::uint64_t n = 1000;
  std::uint64_t replicas = 1;

  int d() const { return dist.dim(); }
  /// "alpha=<a>;d=<d>;dist=<descriptor>;n=<n>"; its FNV-1a hash is the cell id.
  std::string key() const;
  std::uint64_t id() const;
  /// split_seed(master, id(), replica).
  std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) const;
};

/// Scalar results of one replica.
struct ReplicaSummary {
  std::uint64_t replica = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
};

/// Runs `replicas` walks of the cell with checkpoints from `schedule` and
/// records: final norm, escape exponent slope and final ratio, angular tail
/// oscillation, x_n (kappa 0.9) and the return count at radius r (when
/// given).
std::vector<ReplicaSummary> run_cell(const Cell& cell, std::uint64_t master_seed, unsigned threads,
                                     const CheckpointSchedule& schedule = {},
                                     std::optional<double> return_radius = std::nullopt);

struct SweepRow {
  double alpha = 0.0;
  int d = 1;
  std::string dist;
  std::uint64_t n = 0;
  std::string metric;
  Summary summary;
};

struct LongRow {
  double alpha = 0.0;
  int d = 1;
  std::string dist;
  std::uint64_t n = 0;
  std::uint64_t replica = 0;
  std::string metric;
  double value = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<LongRow> long_rows;

  /// Rows keyed (alpha, d, dist, n) with columns
  /// alpha,d,dist,n,metric,mean,std,median,q05,q95,ci_half_width,replicas.
  void write_csv(std::ostream& out, const Provenance& prov) const;
  /// alpha,d,dist,n,replica,metric,value
  void write_long_csv(std::ostream& out, const Provenance& prov) const;
  void write_json(std::ostream& out, const Provenance& prov) const;
  const SweepRow* find(double alpha, const std::string& metric) const;
};

/// Folds replica summaries into a table. `metrics` selects and orders the
/// reported metrics (all when empty).
void append_cell(SweepTable& table, const Cell& cell, const std::vector<ReplicaSummary>& reps,
                 const std::vector<std::string>& metrics = {});

struct SweepPlan {
  std::vector<double> alphas;
  StepDistribution dist = StepDistribution::gaussian(3);
  std::uint64_t n = 1000000;
  std::uint64_t replicas = 200;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  /// Whiten the step law first (the default).
  bool whiten = true;
};

/// Escape-exponent phase diagram: one row per alpha with the replica
/// distribution of the last-decade slope ("exponent") and the final ratio.
SweepTable sweep_phase_diagram(const SweepPlan& plan);

/// Per-figure plot data: alpha,d,median_exponent,q05,q95,theory,regime.
/// Written to fig1a.csv for d <= 2 and fig1b.csv for d >= 3; returns the
/// path written.
std::string write_plot_data(const SweepTable& table, const std::string& dir,
                            const Provenance& prov);

// ---------------------------------------------------------------------------

struct PmfComparison {
  int n = 0;
  double alpha = 0.0;
  double max_diff = 0.0;
  /// Position with the largest difference.
  std::vector<double> worst_atom;
  double total_direct = 0.0;
  double total_forest = 0.0;
  bool pass = false;
};

struct SampleComparison {
  std::string label;
  double alpha = 0.0;
  std::uint64_t n = 0;
  std::uint64_t samples = 0;
  TwoSampleResult test;
  bool pass = false;
};

struct EquivalenceReport {
  std::vector<PmfComparison> pmf;
  std::vector<SampleComparison> samples;
  bool pass = false;

  std::string to_json(const Provenance& prov) const;
};

struct EquivalencePlan {
  int max_n = 6;
  std::vector<double> alphas{0.0, 0.25, 0.5, 0.75, 1.0};
  StepDistribution dist = StepDistribution::rademacher();
  double atom_tolerance = 1e-12;
  /// Large-n two-sample tests (skipped when samples == 0).
  std::uint64_t large_n = 1000;
  std::uint64_t samples = 100000;
  std::vector<double> sample_alphas{0.5};
  double significance = 0.001;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

/// Exact pmf of S_n from the recursive definition against the forest
/// enumeration for every n <= max_n and alpha; then chi-square tests of
/// direct (full mode) against forest-built samples and of full against
/// counts mode at large_n.
EquivalenceReport equivalence_suite(const EquivalencePlan& plan);

/// S_n of `samples` independent walks (row-major), direct construction.
std::vector<double> sample_direct(const StepDistribution& dist, double alpha, std::uint64_t n,
                                  std::uint64_t samples, WalkMode mode, std::uint64_t seed,
                                  unsigned threads);
/// Same from ForestWalk.
std::vector<double> sample_forest(const StepDistribution& dist, double alpha, std::uint64_t n,
                                  std::uint64_t samples, std::uint64_t seed, unsigned threads);

// ---------------------------------------------------------------------------

/// m_1 = E|X|^2, m_{n+1} = m_n (1 + 2 alpha / n) + E|X|^2: the exact
/// E|S_n|^2 for a mean-zero step law. Entry k is m_{k+1}.
std::vector<double> second_moment_oracle(double alpha, double mean_square, std::uint64_t n);

struct MomentRow {
  std::uint64_t n = 0;
  double oracle = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double rel_error = 0.0;
};

struct MomentReport {
  double alpha = 0.0;
  std::string dist;
  std::uint64_t replicas = 0;
  std::vector<MomentRow> rows;
  double max_abs_z = 0.0;
  double max_rel_error = 0.0;
};

/// Dense checkpoints 1, 2, 4, ..., and n.
std::vector<std::uint64_t> dense_checkpoints(std::uint64_t n);

/// Empirical E|S_n|^2 over replicas against the oracle at dense checkpoints.
/// Requires a mean-zero law with finite second moment.
MomentReport moments_experiment(double alpha, const StepDistribution& dist, std::uint64_t n,
                                std::uint64_t replicas, std::uint64_t seed, unsigned threads);

struct ExitRow {
  double radius = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  /// mean / R^2.
  double scaled = 0.0;
  std::uint64_t non_exits = 0;
};

struct ExitReport {
  double alpha = 0.0;
  std::string dist;
  std::uint64_t replicas = 0;
  std::vector<ExitRow> rows;
  /// max over R of scaled / min over R of scaled (radii > 0 only).
  double ratio = 0.0;
};

ExitReport exit_time_experiment(double alpha, const StepDistribution& dist,
                                const std::vector<double>& radii, std::uint64_t replicas,
                                std::uint64_t seed, unsigned threads,
                                std::uint64_t safety = 1000000000ULL);

/// Six unit steps at 60 degree spacing (the triangular lattice).
StepDistribution triangular_lattice();

}  // namespace srrw
