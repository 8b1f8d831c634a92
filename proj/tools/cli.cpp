#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "srrw/config.hpp"
#include "srrw/error.hpp"
#include "srrw/functional.hpp"
#include "srrw/harness.hpp"
#include "srrw/lyapunov.hpp"
#include "srrw/model.hpp"
#include "srrw/statistics.hpp"
#include "srrw/walk.hpp"

namespace srrw {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckFailed {};

/// Maps config keys of one table to options; flags given on the command
/// line win over the config.
class Bindings {
 public:
  void add(const std::string& key, CLI::Option* opt, std::function<void(const ConfigValue&)> set) {
    bindings_[key] = {opt, std::move(set)};
  }

  void apply(const Config& cfg, const std::string& table) const {
    for (const auto& [key, value] : cfg.table(table)) {
      auto it = bindings_.find(key);
      if (it == bindings_.end()) {
        const std::string where = table.empty() ? "top level" : "[" + table + "]";
        throw ParseError("unknown key '" + key + "' in " + where, value.line, value.column);
      }
      if (it->second.opt->count() == 0) it->second.set(value);
    }
  }

 private:
  struct Binding {
    CLI::Option* opt;
    std::function<void(const ConfigValue&)> set;
  };
  std::map<std::string, Binding> bindings_;
};

std::string join_list(const std::vector<double>& v) {
  std::ostringstream o;
  o.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) o << (i ? "," : "") << v[i];
  return o.str();
}

void opt(CLI::App* app, Bindings& b, const std::string& name, double& v, const std::string& help) {
  auto* o = app->add_option("--" + name, v, help)->capture_default_str();
  b.add(name, o, [&v](const ConfigValue& c) { v = c.as_double(); });
}

void opt(CLI::App* app, Bindings& b, const std::string& name, int& v, const std::string& help) {
  auto* o = app->add_option("--" + name, v, help)->capture_default_str();
  b.add(name, o, [&v](const ConfigValue& c) {
    const double x = c.as_double();
    if (x != std::floor(x)) throw ParseError("expected an integer", c.line, c.column);
    v = static_cast<int>(x);
  });
}

void opt(CLI::App* app, Bindings& b, const std::string& name, std::string& v,
         const std::string& help) {
  auto* o = app->add_option("--" + name, v, help)->capture_default_str();
  b.add(name, o, [&v](const ConfigValue& c) { v = c.as_string(); });
}

/// Counts accept "1000", "1e6" and "2^20".
void count_opt(CLI::App* app, Bindings& b, const std::string& name, std::string& v,
               const std::string& help) {
  auto* o = app->add_option("--" + name, v, help)->capture_default_str();
  b.add(name, o, [&v](const ConfigValue& c) { v = std::to_string(c.as_count()); });
}

/// Lists accept "lo:hi:step", "a,b,c" or an array in the config.
void list_opt(CLI::App* app, Bindings& b, const std::string& name, std::string& v,
              const std::string& help) {
  auto* o = app->add_option("--" + name, v, help)->capture_default_str();
  b.add(name, o, [&v](const ConfigValue& c) { v = join_list(c.as_list()); });
}

void flag(CLI::App* app, Bindings& b, const std::string& name, bool& v, const std::string& help) {
  auto* o = app->add_flag("--" + name, v, help);
  b.add(name, o, [&v](const ConfigValue& c) { v = c.as_bool(); });
}

std::uint64_t count_of(const std::string& s, const char* what) {
  try {
    return parse_count(s);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--") + what + ": " + e.what());
  }
}

std::vector<double> list_of(const std::string& s, const char* what) {
  try {
    return parse_grid(s);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--") + what + ": " + e.what());
  }
}

StepDistribution dist_of(const std::string& text, int d) {
  StepDistribution dist = text == "triangular" ? triangular_lattice() : parse_distribution(text, d);
  if (dist.dim() != d) {
    throw UsageError("--dist has dimension " + std::to_string(dist.dim()) + " but --d is " +
                     std::to_string(d));
  }
  return dist;
}

/// Writes to --out when given, else to the console stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw UsageError("cannot write '" + path + "'");
      out_ = file_.get();
    }
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

void write_file(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  fn(f);
}

nlohmann::ordered_json provenance_json(const Provenance& prov) {
  return nlohmann::ordered_json::parse(prov.json_fields());
}

struct Globals {
  std::string seed = "0";
  int threads = 0;
  std::string out;
  std::string config;
};

// ---------------------------------------------------------------------------

struct SimulateArgs {
  double alpha = 0.5;
  int d = 1;
  std::string dist = "rademacher";
  std::string n = "100000";
  std::string mode = "auto";
  std::string checkpoint_start = "64";
  double checkpoint_ratio = 2.0;
  std::vector<std::string> functionals;
  std::string return_radius;
  std::string replicas = "1";
  std::string format = "csv";
  std::string dump_trajectory;
};

int do_simulate(const SimulateArgs& a, const Globals& g, const Provenance& prov, std::ostream& out) {
  const StepDistribution dist = dist_of(a.dist, a.d);
  WalkConfig cfg;
  cfg.params = {a.alpha, a.d};
  cfg.dist = dist;
  cfg.horizon = count_of(a.n, "n");
  cfg.checkpoints.start = count_of(a.checkpoint_start, "checkpoint-start");
  cfg.checkpoints.ratio = a.checkpoint_ratio;
  if (a.mode == "auto") cfg.mode = WalkMode::automatic;
  else if (a.mode == "full") cfg.mode = WalkMode::full;
  else if (a.mode == "counts") cfg.mode = WalkMode::counts;
  else throw UsageError("--mode must be auto, full or counts");
  for (const auto& f : a.functionals) cfg.functionals.push_back(parse_functional(f, dist));
  if (a.return_radius == "auto") cfg.return_radius = default_return_radius(dist);
  else if (!a.return_radius.empty()) cfg.return_radius = list_of(a.return_radius, "return-radius").at(0);
  if (a.format != "csv" && a.format != "json") throw UsageError("--format must be csv or json");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  Cell cell{a.alpha, dist, cfg.horizon, count_of(a.replicas, "replicas")};
  if (cell.replicas < 1) throw UsageError("--replicas must be at least 1");
  const auto series = run_replicas<CheckpointSeries>(cell.replicas, static_cast<unsigned>(g.threads),
                                                     [&](std::uint64_t i) {
                                                       WalkConfig c = cfg;
                                                       c.seed = cell.replica_seed(prov.seed, i);
                                                       c.retain_trajectory = i == 0 && !a.dump_trajectory.empty();
                                                       return run_walk(c);
                                                     });
  if (!a.dump_trajectory.empty()) {
    std::ofstream f(a.dump_trajectory, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + a.dump_trajectory + "'");
    write_trajectory(f, {a.alpha, cell.replica_seed(prov.seed, 0), dist.descriptor(), *series[0].trajectory});
  }

  Sink sink(g.out, out);
  if (a.format == "json") {
    nlohmann::ordered_json j;
    j["provenance"] = provenance_json(prov);
    j["replicas"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < series.size(); ++i) {
      j["replicas"].push_back(nlohmann::ordered_json::parse(make_report(series[i], i).to_json()));
    }
    *sink << j.dump(2) << '\n';
    return 0;
  }
  auto& o = *sink;
  o << prov.csv_header();
  o << "alpha,d,dist,n,replica,metric,value\n";
  o.precision(17);
  const std::string desc = dist.descriptor();
  const std::string prefix = [&] {
    std::ostringstream p;
    p.precision(17);
    p << a.alpha << ',' << a.d << ',' << (desc.find(',') == std::string::npos ? desc : '"' + desc + '"');
    return p.str();
  }();
  for (std::size_t r = 0; r < series.size(); ++r) {
    const auto& s = series[r];
    for (const auto& rec : s.records) {
      auto row = [&](const std::string& metric, double v) {
        o << prefix << ',' << rec.n << ',' << r << ',' << metric << ',' << v << '\n';
      };
      row("norm", rec.norm);
      row("max_norm", rec.max_norm);
      for (int k = 0; k < s.d; ++k) row("s" + std::to_string(k), rec.position[k]);
      for (std::size_t k = 0; k < rec.deltas.size(); ++k) row("delta:" + s.functional_names[k], rec.deltas[k]);
      if (cfg.return_radius) row("returns", static_cast<double>(rec.returns));
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string alpha = "0:0.875:0.125";
  int d = 3;
  std::string dist = "gaussian";
  std::string n = "1e6";
  std::string replicas = "200";
  bool no_whiten = false;
  std::string long_csv;
  std::string json;
  std::string plot_dir;
};

int do_sweep(const SweepArgs& a, const Globals& g, const Provenance& prov, std::ostream& out) {
  SweepPlan plan;
  plan.alphas = list_of(a.alpha, "alpha");
  for (double x : plan.alphas) {
    if (!(x >= 0.0 && x <= 1.0)) throw UsageError("--alpha values must lie in [0, 1]");
  }
  plan.dist = dist_of(a.dist, a.d);
  plan.n = count_of(a.n, "n");
  plan.replicas = count_of(a.replicas, "replicas");
  if (plan.replicas < 1) throw UsageError("--replicas must be at least 1");
  if (plan.n < 100) throw UsageError("--n must be at least 100 for an exponent fit");
  plan.seed = prov.seed;
  plan.threads = static_cast<unsigned>(g.threads);
  plan.whiten = !a.no_whiten;
  const auto table = sweep_phase_diagram(plan);

  Sink sink(g.out, out);
  table.write_csv(*sink, prov);
  if (!a.long_csv.empty()) write_file(a.long_csv, [&](std::ostream& f) { table.write_long_csv(f, prov); });
  if (!a.json.empty()) write_file(a.json, [&](std::ostream& f) { table.write_json(f, prov); });
  if (!a.plot_dir.empty()) write_plot_data(table, a.plot_dir, prov);
  return 0;
}

// ---------------------------------------------------------------------------

struct EquivalenceArgs {
  int n = 6;
  std::string alpha = "0,0.25,0.5,0.75,1";
  std::string dist = "rademacher";
  std::string large_n = "1000";
  std::string samples = "1e5";
  std::string sample_alpha = "0.5";
  double significance = 0.001;
  std::string format = "text";
};

int do_equivalence(const EquivalenceArgs& a, const Globals& g, const Provenance& prov,
                   std::ostream& out) {
  EquivalencePlan plan;
  plan.max_n = a.n;
  plan.alphas = list_of(a.alpha, "alpha");
  plan.dist = dist_of(a.dist, parse_distribution(a.dist).dim());
  if (!plan.dist.is_discrete()) throw UsageError("--dist must be a discrete law");
  plan.large_n = count_of(a.large_n, "large-n");
  plan.samples = count_of(a.samples, "samples");
  plan.sample_alphas = list_of(a.sample_alpha, "sample-alpha");
  plan.significance = a.significance;
  plan.seed = prov.seed;
  plan.threads = static_cast<unsigned>(g.threads);
  if (a.format != "text" && a.format != "json") throw UsageError("--format must be text or json");
  EquivalenceReport rep;
  try {
    rep = equivalence_suite(plan);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  Sink sink(g.out, out);
  auto& o = *sink;
  if (a.format == "json") {
    o << rep.to_json(prov) << '\n';
  } else {
    o << prov.csv_header();
    o.precision(6);
    for (const auto& c : rep.pmf) {
      o << (c.pass ? "ok  " : "FAIL") << " pmf n=" << c.n << " alpha=" << c.alpha
        << " max_diff=" << c.max_diff;
      if (!c.pass) {
        o << " atom=(";
        for (std::size_t i = 0; i < c.worst_atom.size(); ++i) o << (i ? "," : "") << c.worst_atom[i];
        o << ")";
      }
      o << '\n';
    }
    for (const auto& c : rep.samples) {
      o << (c.pass ? "ok  " : "FAIL") << ' ' << c.label << " alpha=" << c.alpha << " n=" << c.n
        << " samples=" << c.samples << " chi2=" << c.test.statistic << " dof=" << c.test.dof
        << " p=" << c.test.p_value << '\n';
    }
    o << (rep.pass ? "equivalence: pass\n" : "equivalence: FAIL\n");
  }
  if (!rep.pass) throw CheckFailed{};
  return 0;
}

// ---------------------------------------------------------------------------

struct LemmaArgs {
  std::string inequality = "all";
  std::string samples = "1e6";
  double epsilon = 0.0;
  double delta = 0.0;
  double r = 0.0;
  double C = -1.0;
};

int do_lemma(const LemmaArgs& a, const Globals& g, const Provenance& prov, std::ostream& out) {
  (void)g;
  std::vector<Inequality> ids;
  if (a.inequality == "all") {
    ids = {Inequality::sqrt_abs, Inequality::sqrt_log_global, Inequality::sqrt_log_local,
           Inequality::inverse_power_local};
  } else {
    try {
      ids = {parse_inequality(a.inequality)};
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const std::uint64_t n = count_of(a.samples, "samples");
  if (n < 1) throw UsageError("--samples must be at least 1");

  nlohmann::ordered_json j;
  j["provenance"] = provenance_json(prov);
  j["results"] = nlohmann::ordered_json::array();
  bool pass = true;
  for (auto id : ids) {
    InequalityParams p = default_params(id);
    if (a.epsilon > 0.0) p.epsilon = a.epsilon;
    if (a.delta > 0.0) p.delta = a.delta;
    nlohmann::ordered_json entry;
    entry["inequality"] = inequality_name(id);
    if (id == Inequality::sqrt_abs && a.C < 0.0) {
      // The constants from the Taylor argument must certify as they are.
      const auto direct = certify(id, p, n, prov.seed);
      entry["direct"] = nlohmann::ordered_json::parse(direct.to_json());
      pass = pass && direct.pass;
    }
    if (a.C >= 0.0) {
      p.C = a.C;
      if (a.r > 0.0) p.r = a.r;
      const auto res = certify(id, p, n, prov.seed);
      entry["certification"] = nlohmann::ordered_json::parse(res.to_json());
      pass = pass && res.pass;
    } else {
      auto grid = default_grid(id);
      if (a.r > 0.0) grid.r = {a.r};
      const auto search = find_constants(id, p, grid, n, prov.seed);
      entry["search"] = nlohmann::ordered_json::parse(search.to_json());
      pass = pass && search.found;
    }
    j["results"].push_back(entry);
  }
  j["pass"] = pass;
  Sink sink(g.out, out);
  *sink << j.dump(2) << '\n';
  if (!pass) throw CheckFailed{};
  return 0;
}

// ---------------------------------------------------------------------------

struct MomentsArgs {
  double alpha = 0.5;
  int d = 1;
  std::string dist = "rademacher";
  std::string n = "1000";
  std::string replicas = "1e5";
  double z_max = 4.0;
  std::string format = "csv";
};

int do_moments(const MomentsArgs& a, const Globals& g, const Provenance& prov, std::ostream& out) {
  const StepDistribution dist = dist_of(a.dist, a.d);
  if (a.format != "csv" && a.format != "json") throw UsageError("--format must be csv or json");
  MomentReport rep;
  try {
    rep = moments_experiment(a.alpha, dist, count_of(a.n, "n"), count_of(a.replicas, "replicas"),
                             prov.seed, static_cast<unsigned>(g.threads));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const bool pass = rep.max_abs_z <= a.z_max;
  Sink sink(g.out, out);
  auto& o = *sink;
  o.precision(17);
  if (a.format == "json") {
    nlohmann::ordered_json j;
    j["provenance"] = provenance_json(prov);
    j["alpha"] = rep.alpha;
    j["dist"] = rep.dist;
    j["replicas"] = rep.replicas;
    j["max_abs_z"] = rep.max_abs_z;
    j["max_rel_error"] = rep.max_rel_error;
    j["pass"] = pass;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
      j["rows"].push_back({{"n", r.n}, {"oracle", r.oracle}, {"mean", r.mean},
                           {"std_error", r.std_error}, {"z", r.z}, {"rel_error", r.rel_error}});
    }
    o << j.dump(2) << '\n';
  } else {
    o << prov.csv_header();
    o << "# max_abs_z: " << rep.max_abs_z << '\n';
    o << "# max_rel_error: " << rep.max_rel_error << '\n';
    o << "n,oracle,mean,std_error,z,rel_error\n";
    for (const auto& r : rep.rows) {
      o << r.n << ',' << r.oracle << ',' << r.mean << ',' << r.std_error << ',' << r.z << ','
        << r.rel_error << '\n';
    }
  }
  if (!pass) throw CheckFailed{};
  return 0;
}

// ---------------------------------------------------------------------------

struct ExitArgs {
  double alpha = 0.5;
  int d = 2;
  std::string dist = "triangular";
  std::string radii = "10,20,40,80";
  std::string replicas = "1000";
  double max_ratio = 3.0;
  bool no_whiten = false;
  std::string safety = "1e9";
};

int do_exit_times(const ExitArgs& a, const Globals& g, const Provenance& prov, std::ostream& out) {
  StepDistribution dist = dist_of(a.dist, a.d);
  if (!a.no_whiten) dist = whiten(dist);
  const auto radii = list_of(a.radii, "radii");
  for (double r : radii) {
    if (!(r >= 0.0)) throw UsageError("--radii must be nonnegative");
  }
  ExitReport rep;
  try {
    rep = exit_time_experiment(a.alpha, dist, radii, count_of(a.replicas, "replicas"), prov.seed,
                               static_cast<unsigned>(g.threads), count_of(a.safety, "safety"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  std::uint64_t non_exits = 0;
  for (const auto& r : rep.rows) non_exits += r.non_exits;
  const bool pass = rep.ratio > 0.0 && rep.ratio < a.max_ratio && non_exits == 0;
  Sink sink(g.out, out);
  auto& o = *sink;
  o.precision(17);
  o << prov.csv_header();
  o << "# dist: " << rep.dist << '\n';
  o << "# ratio: " << rep.ratio << '\n';
  o << "radius,mean,std_error,scaled,non_exits\n";
  for (const auto& r : rep.rows) {
    o << r.radius << ',' << r.mean << ',' << r.std_error << ',' << r.scaled << ',' << r.non_exits << '\n';
  }
  if (!pass) throw CheckFailed{};
  return 0;
}

std::string command_line(int argc, const char* const* argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Step-reinforced random walk experiments"};
  app.require_subcommand(1);
  Globals g;
  Bindings top;
  // Global flags are accepted before or after the subcommand.
  auto add_globals = [&](CLI::App* a) {
    auto* s = a->add_option("--seed", g.seed, "master seed")->capture_default_str();
    auto* t = a->add_option("--threads", g.threads, "worker threads (0 = all cores)")->capture_default_str();
    auto* o = a->add_option("--out", g.out, "output file (default stdout)");
    a->add_option("--config", g.config, "config file");
    return std::array<CLI::Option*, 3>{s, t, o};
  };
  std::vector<std::array<CLI::Option*, 3>> global_opts{add_globals(&app)};
  app.fallthrough();

  SimulateArgs sim;
  SweepArgs sw;
  EquivalenceArgs eq;
  LemmaArgs lem;
  MomentsArgs mom;
  ExitArgs ex;
  std::map<std::string, Bindings> binds;

  {
    auto* s = app.add_subcommand("simulate", "one cell: checkpoint series as long CSV or JSON");
    auto& b = binds["simulate"];
    opt(s, b, "alpha", sim.alpha, "reinforcement parameter in [0, 1]");
    opt(s, b, "d", sim.d, "dimension");
    opt(s, b, "dist", sim.dist, "step law, e.g. rademacher, gaussian(d=2), pareto(a=1.5)");
    count_opt(s, b, "n", sim.n, "horizon");
    opt(s, b, "mode", sim.mode, "auto, full or counts");
    count_opt(s, b, "checkpoint-start", sim.checkpoint_start, "first checkpoint");
    opt(s, b, "checkpoint-ratio", sim.checkpoint_ratio, "geometric checkpoint ratio");
    auto* f = s->add_option("--functional", sim.functionals, "coord(i), norm2, cross(i,j), normpow(q), tail(K), const(c)");
    b.add("functional", f, [&](const ConfigValue& c) { sim.functionals = {c.as_string()}; });
    opt(s, b, "return-radius", sim.return_radius, "count returns to B(0, r); 'auto' picks r");
    count_opt(s, b, "replicas", sim.replicas, "replica count");
    opt(s, b, "format", sim.format, "csv or json");
    opt(s, b, "dump-trajectory", sim.dump_trajectory, "binary dump of replica 0");
  }
  {
    auto* s = app.add_subcommand("sweep", "escape-exponent phase diagram");
    auto& b = binds["sweep"];
    list_opt(s, b, "alpha", sw.alpha, "alpha grid, lo:hi:step or a,b,c");
    opt(s, b, "d", sw.d, "dimension");
    opt(s, b, "dist", sw.dist, "step law (whitened unless --no-whiten)");
    count_opt(s, b, "n", sw.n, "horizon");
    count_opt(s, b, "replicas", sw.replicas, "replicas per alpha");
    flag(s, b, "no-whiten", sw.no_whiten, "use the step law as given");
    opt(s, b, "long-csv", sw.long_csv, "also write per-replica long CSV");
    opt(s, b, "json", sw.json, "also write the table as JSON");
    opt(s, b, "emit-plot-data", sw.plot_dir, "directory for fig1a.csv / fig1b.csv");
  }
  {
    auto* s = app.add_subcommand("equivalence", "recursive definition against forest construction");
    auto& b = binds["equivalence"];
    opt(s, b, "n", eq.n, "largest n for the exact pmf comparison (<= 7)");
    list_opt(s, b, "alpha", eq.alpha, "alpha grid for the exact comparison");
    opt(s, b, "dist", eq.dist, "discrete step law");
    count_opt(s, b, "large-n", eq.large_n, "horizon of the two-sample tests");
    count_opt(s, b, "samples", eq.samples, "samples per side (0 skips)");
    list_opt(s, b, "sample-alpha", eq.sample_alpha, "alphas for the two-sample tests");
    opt(s, b, "significance", eq.significance, "rejection level");
    opt(s, b, "format", eq.format, "text or json");
  }
  {
    auto* s = app.add_subcommand("lemma-check", "certify the Lyapunov inequalities by sampling");
    auto& b = binds["lemma-check"];
    opt(s, b, "inequality", lem.inequality, "sqrt-abs, sqrt-log-global, sqrt-log-local, inverse-power-local or all");
    count_opt(s, b, "samples", lem.samples, "samples per parameter point");
    opt(s, b, "epsilon", lem.epsilon, "override eps (0 keeps the default)");
    opt(s, b, "delta", lem.delta, "override delta for h (0 keeps the default)");
    opt(s, b, "r", lem.r, "fix r instead of searching (0 searches)");
    opt(s, b, "C", lem.C, "certify this C instead of searching (negative searches)");
  }
  {
    auto* s = app.add_subcommand("moments", "E|S_n|^2 against the exact recursion");
    auto& b = binds["moments"];
    opt(s, b, "alpha", mom.alpha, "reinforcement parameter");
    opt(s, b, "d", mom.d, "dimension");
    opt(s, b, "dist", mom.dist, "mean-zero step law");
    count_opt(s, b, "n", mom.n, "horizon");
    count_opt(s, b, "replicas", mom.replicas, "replica count");
    opt(s, b, "z-max", mom.z_max, "fail when any |z| exceeds this");
    opt(s, b, "format", mom.format, "csv or json");
  }
  {
    auto* s = app.add_subcommand("exit-times", "exit times of B(0, R) scaled by R^2");
    auto& b = binds["exit-times"];
    opt(s, b, "alpha", ex.alpha, "reinforcement parameter");
    opt(s, b, "d", ex.d, "dimension");
    opt(s, b, "dist", ex.dist, "step law, or 'triangular'");
    list_opt(s, b, "radii", ex.radii, "radii");
    count_opt(s, b, "replicas", ex.replicas, "replica count");
    opt(s, b, "max-ratio", ex.max_ratio, "fail when max/min of the scaled means reaches this");
    flag(s, b, "no-whiten", ex.no_whiten, "use the step law as given");
    count_opt(s, b, "safety", ex.safety, "give up on a walk after this many steps");
  }
  for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) global_opts.push_back(add_globals(sub));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    Config cfg;
    if (!g.config.empty()) try {
      cfg = Config::load(g.config);
      auto given = [&](int k) {
        for (const auto& o : global_opts) {
          if (o[k]->count() > 0) return true;
        }
        return false;
      };
      for (const auto& [key, v] : cfg.table("")) {
        if (key == "seed") {
          if (!given(0)) g.seed = std::to_string(v.as_count());
        } else if (key == "threads") {
          if (!given(1)) g.threads = static_cast<int>(v.as_count());
        } else if (key == "out") {
          if (!given(2)) g.out = v.as_string();
        } else {
          throw ParseError("unknown key '" + key + "' at top level", v.line, v.column);
        }
      }
      for (const auto& [table, unused] : cfg.tables()) {
        if (!table.empty() && !binds.count(table)) {
          throw UsageError(g.config + ": unknown table [" + table + "]");
        }
      }
      binds[name].apply(cfg, name);
    } catch (const ParseError& e) {
      throw UsageError(g.config + ":" + e.what());
    }
    if (g.threads < 0) throw UsageError("--threads must be nonnegative");

    Provenance prov;
    prov.command = command_line(argc, argv);
    prov.seed = count_of(g.seed, "seed");
    prov.config_hash = hash_hex(cfg.canonical());

    if (name == "simulate") return do_simulate(sim, g, prov, out);
    if (name == "sweep") return do_sweep(sw, g, prov, out);
    if (name == "equivalence") return do_equivalence(eq, g, prov, out);
    if (name == "lemma-check") return do_lemma(lem, g, prov, out);
    if (name == "moments") return do_moments(mom, g, prov, out);
    if (name == "exit-times") return do_exit_times(ex, g, prov, out);
    return 2;
  } catch (const CheckFailed&) {
    return 1;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ReplicaError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace srrw
