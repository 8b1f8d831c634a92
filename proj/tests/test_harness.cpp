#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "srrw/config.hpp"
#include "srrw/error.hpp"
#include "srrw/harness.hpp"

using namespace srrw;

namespace {

int cli(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "srrw");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("srrw_test_" + name)).string();
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST(Config, ParsesTablesAndTypes) {
  const auto c = Config::parse(
      "# top\nseed = 42\n[sweep]\nalpha = \"0:1:0.25\"\nn = 1e6\nradii = [10, 20]\n"
      "whiten = true\n");
  EXPECT_EQ(c.find("", "seed")->as_count(), 42u);
  EXPECT_EQ(c.find("sweep", "alpha")->as_list().size(), 5u);
  EXPECT_EQ(c.find("sweep", "n")->as_count(), 1000000u);
  EXPECT_EQ(c.find("sweep", "radii")->as_list(), (std::vector<double>{10, 20}));
  EXPECT_TRUE(c.find("sweep", "whiten")->as_bool());
  EXPECT_EQ(c.find("sweep", "missing"), nullptr);
}

TEST(Config, ErrorsCarryLineAndColumn) {
  auto expect_at = [](const std::string& text, std::size_t line, std::size_t col) {
    try {
      Config::parse(text);
      ADD_FAILURE() << "no error for: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
      EXPECT_EQ(e.column(), col) << text;
    }
  };
  expect_at("a = 1\nb = \"open\n", 2, 10);
  expect_at("a = 1\n\n  c = bare\n", 3, 7);
  expect_at("a = 1\na = 2\n", 2, 1);
  expect_at("[t]\n[t]\nx=1\n[t]\n", 4, 2);
  expect_at("a = [1, x]\n", 1, 9);
  expect_at("a 1\n", 1, 3);
  const auto c = Config::parse("n = true\n");
  try {
    c.find("", "n")->as_double();
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.column(), 5u);
  }
}

TEST(Config, CanonicalTextIgnoresLayout) {
  const auto a = Config::parse("b = 2\na = 1\n[x]\nk = \"v\"\n");
  const auto b = Config::parse("# comment\na=1\n  b =   2\n\n[x]\nk=\"v\" # trailing\n");
  EXPECT_EQ(a.canonical(), b.canonical());
}

TEST(Config, GridAndCount) {
  EXPECT_EQ(parse_grid("0:1:0.125").size(), 9u);
  EXPECT_DOUBLE_EQ(parse_grid("0:1:0.125").back(), 1.0);
  EXPECT_EQ(parse_grid("0.1, 0.5,0.9"), (std::vector<double>{0.1, 0.5, 0.9}));
  EXPECT_THROW(parse_grid("1:0:0.1"), std::invalid_argument);
  EXPECT_EQ(parse_count("2^20"), 1048576u);
  EXPECT_EQ(parse_count("1e5"), 100000u);
  EXPECT_THROW(parse_count("1.5"), std::invalid_argument);
  EXPECT_THROW(parse_count("-3"), std::invalid_argument);
}

TEST(Replicas, SameSeedSameSummary) {
  Cell cell{0.4, StepDistribution::gaussian(2), 2000, 1};
  const auto a = run_cell(cell, 99, 1), b = run_cell(cell, 99, 1);
  EXPECT_EQ(a[0].metrics, b[0].metrics);
  EXPECT_NE(run_cell(cell, 100, 1)[0].metrics, a[0].metrics);
}

TEST(Replicas, ThreadCountDoesNotChangeBytes) {
  SweepPlan plan;
  plan.alphas = {0.0, 0.5, 0.75};
  plan.dist = StepDistribution::gaussian(2);
  plan.n = 5000;
  plan.replicas = 24;
  plan.seed = 7;
  Provenance prov{"test", 7, "0"};
  std::string bytes[2];
  int k = 0;
  for (unsigned threads : {1u, 8u}) {
    plan.threads = threads;
    std::ostringstream o;
    const auto t = sweep_phase_diagram(plan);
    t.write_csv(o, prov);
    t.write_long_csv(o, prov);
    bytes[k++] = o.str();
  }
  EXPECT_EQ(bytes[0], bytes[1]);
}

TEST(Replicas, MeanOfMeanZeroWalkIsCentered) {
  Cell cell{0.5, StepDistribution::rademacher(), 1000, 1000};
  CheckpointSchedule sched;
  sched.explicit_times = {1000};
  WalkConfig base;
  base.params = {0.5, 1};
  base.horizon = 1000;
  base.checkpoints = sched;
  const auto pos = run_replicas<double>(1000, 0, [&](std::uint64_t i) {
    WalkConfig c = base;
    c.seed = cell.replica_seed(3, i);
    return run_walk(c).records.back().position[0];
  });
  SampleSummary s;
  for (double p : pos) s.add(p);
  const auto r = s.finalize();
  // about four standard errors
  EXPECT_LT(std::abs(r.mean), 2.0 * r.ci_half);
}

TEST(Replicas, FailureNamesLowestReplica) {
  std::atomic<int> calls{0};
  try {
    run_indexed(50, 4, [&](std::uint64_t i) {
      ++calls;
      if (i == 7 || i == 30) throw std::runtime_error("boom");
    });
    FAIL();
  } catch (const ReplicaError& e) {
    EXPECT_EQ(e.replica, 7u);
  }
}

TEST(Replicas, CellIdDependsOnEveryField) {
  Cell a{0.5, StepDistribution::rademacher(), 100, 1};
  Cell b = a;
  b.n = 101;
  Cell c = a;
  c.alpha = 0.25;
  EXPECT_NE(a.id(), b.id());
  EXPECT_NE(a.id(), c.id());
  EXPECT_EQ(a.replica_seed(1, 2), split_seed(1, a.id(), 2));
}

TEST(Moments, OracleRecursion) {
  const auto m = second_moment_oracle(0.5, 1.0, 3);
  EXPECT_DOUBLE_EQ(m[0], 1.0);
  EXPECT_DOUBLE_EQ(m[1], 3.0);
  EXPECT_DOUBLE_EQ(m[2], 5.5);
  // alpha = 0: i.i.d., m_n = n E|X|^2
  const auto z = second_moment_oracle(0.0, 2.0, 50);
  EXPECT_DOUBLE_EQ(z[49], 100.0);
  EXPECT_EQ(dense_checkpoints(1000).back(), 1000u);
  EXPECT_EQ(dense_checkpoints(1000).front(), 1u);
}

TEST(Moments, ExperimentAgreesWithOracle) {
  const auto rep = moments_experiment(0.5, StepDistribution::rademacher(), 1000, 4000, 1, 0);
  EXPECT_LT(rep.max_abs_z, 4.5);
  EXPECT_THROW(moments_experiment(0.5, parse_distribution("discrete[(1):0.7,(-1):0.3]"), 10, 10, 1, 0),
               std::invalid_argument);
}

TEST(Equivalence, SmallSuitePasses) {
  EquivalencePlan plan;
  plan.max_n = 5;
  plan.samples = 5000;
  plan.large_n = 200;
  const auto rep = equivalence_suite(plan);
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.pmf.size(), 25u);
  const auto j = nlohmann::json::parse(rep.to_json(Provenance{"x", 0, "0"}));
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_EQ(j["provenance"]["rng"], "mt19937_64+splitmix64-split/v1");
}

TEST(ExitTimes, ScaledMeansAreReported) {
  const auto rep = exit_time_experiment(0.5, triangular_lattice(), {0, 5, 10}, 50, 1, 0);
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_EQ(rep.rows[0].mean, 0.0);
  EXPECT_GT(rep.ratio, 0.0);
  EXPECT_EQ(triangular_lattice().support().size(), 6u);
}

TEST(Provenance, EmbeddedInOutputs) {
  Provenance p{"srrw sweep", 42, hash_hex("")};
  EXPECT_EQ(p.config_hash, "cbf29ce484222325");
  const auto h = p.csv_header();
  EXPECT_NE(h.find("# seed: 42"), std::string::npos);
  EXPECT_NE(h.find("# rng: mt19937_64+splitmix64-split/v1"), std::string::npos);
  EXPECT_NE(h.find("# tool: srrw "), std::string::npos);
  const auto j = nlohmann::json::parse(p.json_fields());
  EXPECT_EQ(j["seed"], 42);
}

// ---------------------------------------------------------------------------

TEST(Cli, SweepGridGivesOneRowPerAlpha) {
  std::string out;
  ASSERT_EQ(cli({"sweep", "--alpha", "0:1:0.125", "--d", "3", "--dist", "gaussian", "--n", "2000",
                 "--replicas", "3", "--seed", "42"},
                &out),
            0);
  EXPECT_EQ(data_rows(out), 9u);
  EXPECT_NE(out.find("# seed: 42"), std::string::npos);
}

TEST(Cli, SweepWritesPlotData) {
  const auto dir = temp_path("plots");
  std::filesystem::remove_all(dir);
  ASSERT_EQ(cli({"sweep", "--alpha", "0.25,0.75", "--d", "3", "--n", "1000", "--replicas", "2",
                 "--emit-plot-data", dir}),
            0);
  std::ifstream f(dir + "/fig1b.csv");
  ASSERT_TRUE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(data_rows(ss.str()), 2u);
  EXPECT_NE(ss.str().find("alpha,d,median_exponent,q05,q95,theory,regime"), std::string::npos);
}

TEST(Cli, EquivalenceExitsZero) {
  std::string out;
  EXPECT_EQ(cli({"equivalence", "--n", "6", "--samples", "2000", "--large-n", "100"}, &out), 0);
  EXPECT_NE(out.find("equivalence: pass"), std::string::npos);
}

TEST(Cli, MomentsReportsRelativeError) {
  std::string out;
  EXPECT_EQ(cli({"moments", "--alpha", "0.5", "--dist", "rademacher", "--n", "1000", "--replicas",
                 "2000"},
                &out),
            0);
  EXPECT_NE(out.find("# max_rel_error: "), std::string::npos);
  EXPECT_EQ(data_rows(out), 11u);
}

TEST(Cli, SimulateLongCsvAndJson) {
  std::string out;
  ASSERT_EQ(cli({"simulate", "--alpha", "0.3", "--n", "1000", "--functional", "coord(0)",
                 "--return-radius", "auto"},
                &out),
            0);
  EXPECT_NE(out.find("alpha,d,dist,n,replica,metric,value"), std::string::npos);
  EXPECT_NE(out.find(",delta:coord0,"), std::string::npos);
  ASSERT_EQ(cli({"simulate", "--alpha", "0.3", "--n", "1000", "--format", "json", "--replicas", "2"},
                &out),
            0);
  const auto j = nlohmann::json::parse(out);
  EXPECT_EQ(j["replicas"].size(), 2u);
}

TEST(Cli, UsageErrorsExitTwo) {
  std::string err;
  EXPECT_EQ(cli({}), 2);
  EXPECT_EQ(cli({"bogus"}), 2);
  EXPECT_EQ(cli({"simulate", "--alpha", "1.5"}, nullptr, &err), 2);
  EXPECT_EQ(cli({"simulate", "--dist", "gaussian(d=2"}, nullptr, &err), 2);
  EXPECT_EQ(cli({"sweep", "--n", "lots"}, nullptr, &err), 2);
  EXPECT_NE(err.find("--n"), std::string::npos);
}

TEST(Cli, MalformedConfigReportsPosition) {
  const auto path = temp_path("bad.toml");
  {
    std::ofstream f(path);
    f << "seed = 1\n[moments]\nalpha = 0.5\nreplicas = [1, \n";
  }
  std::string err;
  EXPECT_EQ(cli({"moments", "--config", path}, nullptr, &err), 2);
  EXPECT_NE(err.find(path + ":4:"), std::string::npos) << err;
  {
    std::ofstream f(path);
    f << "[moments]\nalpah = 0.5\n";
  }
  EXPECT_EQ(cli({"moments", "--config", path}, nullptr, &err), 2);
  EXPECT_NE(err.find(":2:"), std::string::npos) << err;
}

TEST(Cli, ConfigSuppliesDefaultsAndFlagsWin) {
  const auto path = temp_path("good.toml");
  {
    std::ofstream f(path);
    f << "seed = 5\n[moments]\nalpha = 0.25\nn = 64\nreplicas = 500\nformat = \"json\"\n";
  }
  std::string out;
  ASSERT_EQ(cli({"moments", "--config", path, "--alpha", "0.5"}, &out), 0);
  const auto j = nlohmann::json::parse(out);
  EXPECT_EQ(j["alpha"], 0.5);
  EXPECT_EQ(j["replicas"], 500);
  EXPECT_EQ(j["provenance"]["seed"], 5);
  EXPECT_NE(j["provenance"]["config_hash"], "cbf29ce484222325");
}

TEST(Cli, FailedCheckExitsOne) {
  EXPECT_EQ(cli({"exit-times", "--radii", "5,10", "--replicas", "50", "--max-ratio", "1.0"}), 1);
  EXPECT_EQ(cli({"lemma-check", "--inequality", "sqrt-abs", "--C", "0", "--samples", "20000"}), 1);
}

TEST(Cli, LemmaCheckReportsWitness) {
  std::string out;
  ASSERT_EQ(cli({"lemma-check", "--inequality", "sqrt-log-global", "--samples", "20000"}, &out), 0);
  const auto j = nlohmann::json::parse(out);
  EXPECT_TRUE(j["pass"].get<bool>());
}
