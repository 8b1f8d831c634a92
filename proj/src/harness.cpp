#include "srrw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "srrw/forest.hpp"
#include "srrw/model.hpp"
#include "srrw/numeric.hpp"
#include "srrw/rng.hpp"
#include "srrw/statistics.hpp"

namespace srrw {

std::string hash_hex(std::string_view text) {
  std::ostringstream o;
  o << std::hex;
  o.width(16);
  o.fill('0');
  o << hash_name(text);
  return o.str();
}

std::string Provenance::csv_header() const {
  std::ostringstream o;
  o << "# tool: srrw " << kToolVersion << '\n'
    << "# rng: " << kRngIdentity << '\n'
    << "# seed: " << seed << '\n'
    << "# config_hash: " << config_hash << '\n'
    << "# command: " << command << '\n';
  return o.str();
}

std::string Provenance::json_fields() const {
  nlohmann::ordered_json j;
  j["tool_version"] = kToolVersion;
  j["rng"] = kRngIdentity;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["command"] = command;
  return j.dump();
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

ReplicaError::ReplicaError(std::uint64_t r, const std::string& what)
    : std::runtime_error("replica " + std::to_string(r) + " failed: " + what), replica(r) {}

void run_indexed(std::uint64_t count, unsigned threads,
                 const std::function<void(std::uint64_t)>& task) {
  if (threads == 0) threads = default_threads();
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(count, 1)));
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::optional<std::uint64_t> failed;
  std::string message;

  auto worker = [&] {
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::uint64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        task(i);
      } catch (const std::exception& e) {
        std::lock_guard lock(mu);
        if (!failed || i < *failed) {
          failed = i;
          message = e.what();
        }
        stop = true;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failed) throw ReplicaError(*failed, message);
}

// ---------------------------------------------------------------------------

std::string Cell::key() const {
  std::ostringstream o;
  o.precision(17);
  o << "alpha=" << alpha << ";d=" << d() << ";dist=" << dist.descriptor() << ";n=" << n;
  return o.str();
}

std::uint64_t Cell::id() const { return hash_name(key()); }

std::uint64_t Cell::replica_seed(std::uint64_t master, std::uint64_t replica) const {
  return split_seed(master, id(), replica);
}

std::vector<ReplicaSummary> run_cell(const Cell& cell, std::uint64_t master_seed, unsigned threads,
                                     const CheckpointSchedule& schedule,
                                     std::optional<double> return_radius) {
  if (cell.replicas < 1) throw std::invalid_argument("a cell needs at least one replica");
  WalkConfig base;
  base.params = {cell.alpha, cell.d()};
  base.dist = cell.dist;
  base.horizon = cell.n;
  base.checkpoints = schedule;
  base.return_radius = return_radius;
  base.validate();
  return run_replicas<ReplicaSummary>(cell.replicas, threads, [&](std::uint64_t i) {
    WalkConfig cfg = base;
    cfg.seed = cell.replica_seed(master_seed, i);
    const auto series = run_walk(cfg);
    ReplicaSummary s;
    s.replica = i;
    s.seed = cfg.seed;
    const auto& last = series.records.back();
    s.metrics["norm"] = last.norm;
    s.metrics["angular_oscillation"] = angular_series(series).tail_oscillation;
    if (last.n >= 2) s.metrics["xn"] = xn_value(last.n, last.norm * last.norm, 0.9);
    if (return_radius) s.metrics["returns"] = static_cast<double>(last.returns);
    if (series.records.size() >= 4 && last.n >= 100 * series.records.front().n) {
      const auto e = escape_exponent(series);
      s.metrics["exponent_final_ratio"] = e.final_ratio;
      if (e.valid) s.metrics["exponent"] = e.slope;
    }
    return s;
  });
}

void append_cell(SweepTable& table, const Cell& cell, const std::vector<ReplicaSummary>& reps,
                 const std::vector<std::string>& metrics) {
  std::vector<std::string> names = metrics;
  if (names.empty()) {
    std::map<std::string, int> seen;
    for (const auto& r : reps) {
      for (const auto& [k, v] : r.metrics) seen[k];
    }
    for (const auto& [k, v] : seen) names.push_back(k);
  }
  const std::string dist = cell.dist.descriptor();
  for (const auto& name : names) {
    SampleSummary acc;
    for (const auto& r : reps) {
      auto it = r.metrics.find(name);
      if (it == r.metrics.end()) continue;
      acc.add(it->second);
      table.long_rows.push_back({cell.alpha, cell.d(), dist, cell.n, r.replica, name, it->second});
    }
    table.rows.push_back({cell.alpha, cell.d(), dist, cell.n, name, acc.finalize()});
  }
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void SweepTable::write_csv(std::ostream& out, const Provenance& prov) const {
  out << prov.csv_header();
  out << "alpha,d,dist,n,metric,mean,std,median,q05,q95,ci_half_width,replicas\n";
  const auto old = out.precision(17);
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << r.alpha << ',' << r.d << ',' << csv_quote(r.dist) << ',' << r.n << ',' << r.metric << ','
        << s.mean << ',' << s.std << ',' << s.median << ',' << s.q05 << ',' << s.q95 << ','
        << s.ci_half << ',' << s.count << '\n';
  }
  out.precision(old);
}

void SweepTable::write_long_csv(std::ostream& out, const Provenance& prov) const {
  out << prov.csv_header();
  out << "alpha,d,dist,n,replica,metric,value\n";
  const auto old = out.precision(17);
  for (const auto& r : long_rows) {
    out << r.alpha << ',' << r.d << ',' << csv_quote(r.dist) << ',' << r.n << ',' << r.replica
        << ',' << r.metric << ',' << r.value << '\n';
  }
  out.precision(old);
}

void SweepTable::write_json(std::ostream& out, const Provenance& prov) const {
  nlohmann::ordered_json j;
  j["provenance"] = nlohmann::ordered_json::parse(prov.json_fields());
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["alpha"] = r.alpha;
    row["d"] = r.d;
    row["dist"] = r.dist;
    row["n"] = r.n;
    row["metric"] = r.metric;
    row["mean"] = r.summary.mean;
    row["std"] = r.summary.std;
    row["median"] = r.summary.median;
    row["q05"] = r.summary.q05;
    row["q95"] = r.summary.q95;
    row["ci_half_width"] = r.summary.ci_half;
    row["replicas"] = r.summary.count;
    j["rows"].push_back(row);
  }
  out << j.dump(2) << '\n';
}

const SweepRow* SweepTable::find(double alpha, const std::string& metric) const {
  for (const auto& r : rows) {
    if (r.alpha == alpha && r.metric == metric) return &r;
  }
  return nullptr;
}

SweepTable sweep_phase_diagram(const SweepPlan& plan) {
  if (plan.alphas.empty()) throw std::invalid_argument("empty alpha grid");
  const StepDistribution dist = plan.whiten ? whiten(plan.dist) : plan.dist;
  SweepTable table;
  for (double a : plan.alphas) {
    Cell cell{a, dist, plan.n, plan.replicas};
    const auto reps = run_cell(cell, plan.seed, plan.threads);
    append_cell(table, cell, reps, {"exponent"});
  }
  return table;
}

std::string write_plot_data(const SweepTable& table, const std::string& dir,
                            const Provenance& prov) {
  if (table.rows.empty()) throw std::invalid_argument("empty sweep table");
  const int d = table.rows.front().d;
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / (d <= 2 ? "fig1a.csv" : "fig1b.csv")).string();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << prov.csv_header();
  out << "alpha,d,median_exponent,q05,q95,theory,regime\n";
  out.precision(17);
  for (const auto& r : table.rows) {
    if (r.metric != "exponent") continue;
    const char* regime = d >= 3 ? "transient" : (r.alpha <= 0.5 ? "recurrent" : "transient");
    out << r.alpha << ',' << r.d << ',' << r.summary.median << ',' << r.summary.q05 << ','
        << r.summary.q95 << ',' << std::max(r.alpha, 0.5) << ',' << regime << '\n';
  }
  return path;
}

// ---------------------------------------------------------------------------

std::vector<double> sample_direct(const StepDistribution& dist, double alpha, std::uint64_t n,
                                  std::uint64_t samples, WalkMode mode, std::uint64_t seed,
                                  unsigned threads) {
  const int d = dist.dim();
  std::vector<double> out(samples * static_cast<std::size_t>(d));
  const std::uint64_t cell = hash_name(mode == WalkMode::counts ? "direct-counts" : "direct-full");
  run_indexed(samples, threads, [&](std::uint64_t i) {
    WalkState st(dist, alpha, mode, split_seed(seed, cell, i), mode == WalkMode::full ? n : 0);
    while (st.time() < n) st.step();
    std::copy(st.position().begin(), st.position().end(), out.begin() + i * d);
  });
  return out;
}

std::vector<double> sample_forest(const StepDistribution& dist, double alpha, std::uint64_t n,
                                  std::uint64_t samples, std::uint64_t seed, unsigned threads) {
  const int d = dist.dim();
  std::vector<double> out(samples * static_cast<std::size_t>(d));
  const std::uint64_t cell = hash_name("forest");
  run_indexed(samples, threads, [&](std::uint64_t i) {
    ForestWalk fw(dist, alpha, split_seed(seed, cell, i));
    while (fw.time() < n) fw.step();
    std::copy(fw.position().begin(), fw.position().end(), out.begin() + i * d);
  });
  return out;
}

EquivalenceReport equivalence_suite(const EquivalencePlan& plan) {
  if (plan.max_n < 1 || plan.max_n > 7) throw std::invalid_argument("max_n must lie in [1, 7]");
  EquivalenceReport rep;
  rep.pass = true;
  for (double a : plan.alphas) {
    for (int n = 1; n <= plan.max_n; ++n) {
      const Pmf direct = exact_small_n_pmf(plan.dist, a, n);
      const Pmf forest = forest_pmf(plan.dist, a, n);
      PmfComparison c;
      c.n = n;
      c.alpha = a;
      // Union of atoms, matched within the merge tolerance.
      Pmf all = direct;
      for (const auto& [pos, p] : forest) all.emplace(pos, 0.0);
      all = merge_close_atoms(all);
      auto mass_near = [](const Pmf& pmf, const std::vector<double>& at) {
        double m = 0.0;
        for (const auto& [pos, p] : pmf) {
          double diff = 0.0;
          for (std::size_t i = 0; i < pos.size(); ++i) diff = std::max(diff, std::abs(pos[i] - at[i]));
          if (diff <= 1e-9) m += p;
        }
        return m;
      };
      for (const auto& [pos, unused] : all) {
        const double diff = std::abs(mass_near(direct, pos) - mass_near(forest, pos));
        if (diff > c.max_diff || c.worst_atom.empty()) {
          c.max_diff = diff;
          c.worst_atom = pos;
        }
      }
      for (const auto& [pos, p] : direct) c.total_direct += p;
      for (const auto& [pos, p] : forest) c.total_forest += p;
      c.pass = c.max_diff <= plan.atom_tolerance && std::abs(c.total_direct - 1.0) <= 1e-12 &&
               std::abs(c.total_forest - 1.0) <= 1e-12;
      rep.pass = rep.pass && c.pass;
      rep.pmf.push_back(std::move(c));
    }
  }
  if (plan.samples > 0) {
    const int d = plan.dist.dim();
    for (double a : plan.sample_alphas) {
      const auto full = sample_direct(plan.dist, a, plan.large_n, plan.samples, WalkMode::full,
                                      plan.seed, plan.threads);
      const auto forest = sample_forest(plan.dist, a, plan.large_n, plan.samples, plan.seed,
                                        plan.threads);
      SampleComparison c{"direct-vs-forest", a, plan.large_n, plan.samples,
                         chi_square_two_sample(full, forest, d), false};
      c.pass = c.test.p_value > plan.significance;
      rep.pass = rep.pass && c.pass;
      rep.samples.push_back(c);
      if (plan.dist.is_discrete()) {
        const auto counts = sample_direct(plan.dist, a, plan.large_n, plan.samples,
                                          WalkMode::counts, plan.seed, plan.threads);
        SampleComparison m{"full-vs-counts", a, plan.large_n, plan.samples,
                           chi_square_two_sample(full, counts, d), false};
        m.pass = m.test.p_value > plan.significance;
        rep.pass = rep.pass && m.pass;
        rep.samples.push_back(m);
      }
    }
  }
  return rep;
}

std::string EquivalenceReport::to_json(const Provenance& prov) const {
  nlohmann::ordered_json j;
  j["provenance"] = nlohmann::ordered_json::parse(prov.json_fields());
  j["pass"] = pass;
  j["pmf"] = nlohmann::ordered_json::array();
  for (const auto& c : pmf) {
    j["pmf"].push_back({{"n", c.n},
                        {"alpha", c.alpha},
                        {"max_diff", c.max_diff},
                        {"worst_atom", c.worst_atom},
                        {"total_direct", c.total_direct},
                        {"total_forest", c.total_forest},
                        {"pass", c.pass}});
  }
  j["two_sample"] = nlohmann::ordered_json::array();
  for (const auto& c : samples) {
    j["two_sample"].push_back({{"comparison", c.label},
                               {"alpha", c.alpha},
                               {"n", c.n},
                               {"samples_per_side", c.samples},
                               {"chi_square", c.test.statistic},
                               {"dof", c.test.dof},
                               {"p_value", c.test.p_value},
                               {"pass", c.pass}});
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------

std::vector<double> second_moment_oracle(double alpha, double mean_square, std::uint64_t n) {
  std::vector<double> m;
  m.reserve(n);
  double v = mean_square;
  for (std::uint64_t k = 1; k <= n; ++k) {
    m.push_back(v);
    v = v * (1.0 + 2.0 * alpha / static_cast<double>(k)) + mean_square;
  }
  return m;
}

std::vector<std::uint64_t> dense_checkpoints(std::uint64_t n) {
  std::vector<std::uint64_t> t;
  for (std::uint64_t k = 1; k < n; k *= 2) t.push_back(k);
  t.push_back(n);
  return t;
}

MomentReport moments_experiment(double alpha, const StepDistribution& dist, std::uint64_t n,
                                std::uint64_t replicas, std::uint64_t seed, unsigned threads) {
  if (replicas < 2) throw std::invalid_argument("need at least 2 replicas");
  if (dist.mean().norm() > 1e-12) throw std::invalid_argument("the oracle needs a mean-zero law");
  const double ms = dist.mean_square_norm();
  const auto times = dense_checkpoints(n);
  const auto oracle = second_moment_oracle(alpha, ms, n);

  Cell cell{alpha, dist, n, replicas};
  CheckpointSchedule sched;
  sched.explicit_times = times;
  WalkConfig base;
  base.params = {alpha, dist.dim()};
  base.dist = dist;
  base.horizon = n;
  base.checkpoints = sched;
  base.validate();

  // values[r][k] = |S_{t_k}|^2 for replica r
  auto values = run_replicas<std::vector<double>>(replicas, threads, [&](std::uint64_t i) {
    WalkConfig cfg = base;
    cfg.seed = cell.replica_seed(seed, i);
    const auto series = run_walk(cfg);
    std::vector<double> v;
    for (const auto& rec : series.records) v.push_back(rec.norm * rec.norm);
    return v;
  });

  MomentReport rep;
  rep.alpha = alpha;
  rep.dist = dist.descriptor();
  rep.replicas = replicas;
  for (std::size_t k = 0; k < times.size(); ++k) {
    CompensatedSum s, sq;
    for (const auto& v : values) s.add(v[k]);
    const double m = s.value() / static_cast<double>(replicas);
    for (const auto& v : values) sq.add((v[k] - m) * (v[k] - m));
    const double var = sq.value() / static_cast<double>(replicas - 1);
    MomentRow row;
    row.n = times[k];
    row.oracle = oracle[times[k] - 1];
    row.mean = m;
    row.std_error = std::sqrt(var / static_cast<double>(replicas));
    row.z = row.std_error > 0.0 ? (m - row.oracle) / row.std_error
                                : (m == row.oracle ? 0.0 : std::numeric_limits<double>::infinity());
    row.rel_error = std::abs(m - row.oracle) / row.oracle;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z));
    rep.max_rel_error = std::max(rep.max_rel_error, row.rel_error);
    rep.rows.push_back(row);
  }
  return rep;
}

ExitReport exit_time_experiment(double alpha, const StepDistribution& dist,
                                const std::vector<double>& radii, std::uint64_t replicas,
                                std::uint64_t seed, unsigned threads, std::uint64_t safety) {
  if (replicas < 2) throw std::invalid_argument("need at least 2 replicas");
  Cell cell{alpha, dist, 0, replicas};
  auto samples = run_replicas<std::vector<ExitTime>>(replicas, threads, [&](std::uint64_t i) {
    return exit_times(dist, alpha, radii, cell.replica_seed(seed, i), safety);
  });
  ExitReport rep;
  rep.alpha = alpha;
  rep.dist = dist.descriptor();
  rep.replicas = replicas;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    SampleSummary acc;
    ExitRow row;
    row.radius = radii[k];
    for (const auto& s : samples) {
      acc.add(static_cast<double>(s[k].time));
      if (!s[k].exited) ++row.non_exits;
    }
    const auto sum = acc.finalize();
    row.mean = sum.mean;
    row.std_error = sum.std / std::sqrt(static_cast<double>(sum.count));
    row.scaled = radii[k] > 0.0 ? sum.mean / (radii[k] * radii[k]) : 0.0;
    if (radii[k] > 0.0) {
      lo = std::min(lo, row.scaled);
      hi = std::max(hi, row.scaled);
    }
    rep.rows.push_back(row);
  }
  rep.ratio = lo > 0.0 && std::isfinite(lo) ? hi / lo : 0.0;
  return rep;
}

StepDistribution triangular_lattice() {
  std::vector<std::vector<double>> dirs;
  for (int k = 0; k < 6; ++k) {
    const double t = k * std::numbers::pi / 3.0;
    dirs.push_back({std::cos(t), std::sin(t)});
  }
  return StepDistribution::directions(std::move(dirs));
}

}  // namespace srrw
