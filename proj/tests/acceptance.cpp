// Runs the acceptance criteria at full size and prints one line per
// criterion. Exit status 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srrw/aggregate.hpp"
#include "srrw/functional.hpp"
#include "srrw/harness.hpp"
#include "srrw/lyapunov.hpp"
#include "srrw/model.hpp"
#include "srrw/statistics.hpp"
#include "srrw/thresholds.hpp"
#include "srrw/walk.hpp"

namespace {

using namespace srrw;
namespace th = srrw::thresholds;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  std::uint64_t seed = th::kAcceptanceSeed;
  unsigned threads = 0;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<CheckpointSeries> run_series(const WalkConfig& base, std::uint64_t replicas,
                                         std::uint64_t seed, unsigned threads) {
  Cell cell{base.params.alpha, base.dist, base.horizon, replicas};
  return run_replicas<CheckpointSeries>(replicas, threads, [&](std::uint64_t i) {
    WalkConfig c = base;
    c.seed = cell.replica_seed(seed, i);
    return run_walk(c);
  });
}

std::vector<std::uint64_t> decades(std::uint64_t from, std::uint64_t to) {
  std::vector<std::uint64_t> t;
  for (std::uint64_t n = from; n <= to; n *= 10) t.push_back(n);
  return t;
}

// ---------------------------------------------------------------------------

Outcome second_moment(const Context& ctx) {
  Outcome o{true, ""};
  for (double a : {0.0, 0.25, 0.5, 0.75}) {
    const auto rep = moments_experiment(a, StepDistribution::rademacher(), th::kMomentHorizon,
                                        th::kMomentReplicas, ctx.seed, ctx.threads);
    o.pass = o.pass && rep.max_abs_z <= th::kMomentMaxZ;
    o.detail += fmt("a=%.2f max|z|=%.2f; ", a, rep.max_abs_z);
  }
  return o;
}

Outcome construction_equivalence(const Context& ctx) {
  EquivalencePlan plan;
  plan.max_n = th::kEquivalenceMaxN;
  plan.atom_tolerance = th::kEquivalenceAtomTol;
  plan.large_n = th::kEquivalenceLargeN;
  plan.samples = th::kEquivalenceSamples;
  plan.sample_alphas = {0.25, 0.5, 0.75};
  plan.significance = th::kEquivalenceSignificance;
  plan.seed = ctx.seed;
  plan.threads = ctx.threads;
  const auto rep = equivalence_suite(plan);
  double max_diff = 0.0, min_p = 1.0;
  for (const auto& c : rep.pmf) max_diff = std::max(max_diff, c.max_diff);
  for (const auto& c : rep.samples) min_p = std::min(min_p, c.test.p_value);
  return {rep.pass, fmt("max atom diff %.2e over %zu pmfs; min p %.4f over %zu tests", max_diff,
                        rep.pmf.size(), min_p, rep.samples.size())};
}

Outcome phase_diagram(const Context& ctx) {
  SweepPlan plan;
  plan.alphas = {0.0, 0.25, 0.5, 0.625, 0.75, 0.875};
  plan.dist = StepDistribution::gaussian(3);
  plan.n = th::kPhaseHorizon;
  plan.replicas = th::kPhaseReplicas;
  plan.seed = ctx.seed;
  plan.threads = ctx.threads;
  const auto table = sweep_phase_diagram(plan);
  Outcome o{true, ""};
  for (double a : plan.alphas) {
    const auto* row = table.find(a, "exponent");
    const double target = std::max(a, 0.5);
    const bool ok = row && std::abs(row->summary.median - target) <= th::kPhaseTolerance;
    o.pass = o.pass && ok;
    o.detail += fmt("a=%.3f med=%.3f; ", a, row ? row->summary.median : NAN);
  }
  return o;
}

Outcome recurrence_split(const Context& ctx) {
  WalkConfig base;
  base.dist = StepDistribution::rademacher();
  base.horizon = th::kReturnLate;
  base.checkpoints.explicit_times = {th::kReturnEarly, th::kReturnLate};
  base.return_radius = 1.0;
  Outcome o{true, ""};
  for (double a : {0.5, 0.6}) {
    base.params = {a, 1};
    const auto series = run_series(base, th::kReturnReplicas, ctx.seed, ctx.threads);
    std::vector<double> early, late;
    std::uint64_t grew = 0, same = 0;
    for (const auto& s : series) {
      const auto e = s.records.front().returns, l = s.records.back().returns;
      early.push_back(static_cast<double>(e));
      late.push_back(static_cast<double>(l));
      grew += l > e;
      same += l == e;
    }
    const double me = median(early), ml = median(late);
    const double n = static_cast<double>(series.size());
    if (a == 0.5) {
      const double frac = grew / n;
      o.pass = o.pass && ml > me && frac >= th::kReturnFraction;
      o.detail += fmt("a=0.5 median %.0f->%.0f, grew in %.1f%%; ", me, ml, 100 * frac);
    } else {
      const double frac = same / n;
      o.pass = o.pass && ml == me && frac >= th::kReturnFraction;
      o.detail += fmt("a=0.6 median %.0f->%.0f, unchanged in %.1f%%; ", me, ml, 100 * frac);
    }
  }
  return o;
}

Outcome superdiffusive_limit(const Context& ctx) {
  const double a = 0.75;
  WalkConfig base;
  base.params = {a, 2};
  base.dist = StepDistribution::gaussian(2);
  base.horizon = th::kLimitHorizon;
  base.checkpoints.explicit_times = decades(th::kLimitFirstCheckpoint, th::kLimitHorizon);
  const auto series = run_series(base, th::kLimitReplicas, ctx.seed, ctx.threads);
  const std::size_t k = base.checkpoints.explicit_times.size();
  std::vector<std::vector<double>> diffs(k - 1);
  std::vector<double> final_norm;
  for (const auto& s : series) {
    auto scaled = [&](std::size_t j, int i) {
      return s.records[j].position[i] / std::pow(static_cast<double>(s.records[j].n), a);
    };
    for (std::size_t j = 0; j + 1 < k; ++j) {
      diffs[j].push_back(std::hypot(scaled(j + 1, 0) - scaled(j, 0), scaled(j + 1, 1) - scaled(j, 1)));
    }
    final_norm.push_back(std::hypot(scaled(k - 1, 0), scaled(k - 1, 1)));
  }
  const double p01 = quantile(final_norm, 0.01);
  bool shrinking = true;
  std::string meds;
  double prev = INFINITY;
  for (const auto& d : diffs) {
    const double m = median(d);
    shrinking = shrinking && m < prev;
    prev = m;
    meds += fmt("%.4f ", m);
  }
  return {p01 > th::kLimitFloor && shrinking,
          fmt("q01 |S_n/n^a| = %.4f (floor %.3f); median Cauchy diffs %s", p01, th::kLimitFloor,
              meds.c_str())};
}

Outcome angular_transition(const Context& ctx) {
  WalkConfig base;
  base.dist = StepDistribution::gaussian(2);
  base.horizon = th::kAngularHorizon;
  double med[2];
  int idx = 0;
  for (double a : {0.75, 0.4}) {
    base.params = {a, 2};
    const auto series = run_series(base, th::kAngularReplicas, ctx.seed, ctx.threads);
    std::vector<double> osc;
    for (const auto& s : series) osc.push_back(angular_series(s).tail_oscillation);
    med[idx++] = median(osc);
  }
  return {med[0] < th::kAngularConvergedMax && med[1] > th::kAngularOscillatingMin,
          fmt("median oscillation a=0.75: %.4f, a=0.4: %.4f", med[0], med[1])};
}

Outcome mz_rate(const Context& ctx) {
  const auto dist = StepDistribution::pareto(1.5);
  WalkConfig base;
  base.params = {0.5, 1};
  base.dist = dist;
  base.horizon = 1000000;
  base.checkpoints.explicit_times = decades(1000, 1000000);
  base.functionals = {make_coordinate(0, dist)};
  const auto series = run_series(base, th::kRateReplicas, ctx.seed, ctx.threads);
  const std::size_t k = base.checkpoints.explicit_times.size();
  std::vector<std::vector<double>> vals(k);
  for (const auto& s : series) {
    const auto tr = mz_rate_trace(s, 0, th::kRateNu, 1.49);
    for (std::size_t j = 0; j < k; ++j) vals[j].push_back(tr.values[j]);
  }
  std::vector<double> meds;
  std::string text;
  bool decreasing = true;
  for (const auto& v : vals) {
    meds.push_back(median(v));
    if (meds.size() > 1) decreasing = decreasing && meds.back() < meds[meds.size() - 2];
    text += fmt("%.4f ", meds.back());
  }
  const double drop = meds.front() / meds.back();
  return {decreasing && drop >= th::kRateMinDrop,
          fmt("medians %sdrop %.2fx", text.c_str(), drop)};
}

Outcome beta_asymptotics(const Context&) {
  Outcome o{true, ""};
  for (double a : {0.1, 0.5, 0.9}) {
    const auto bg = beta_gamma(th::kBetaHorizon, a);
    const double err = std::abs(bg.scaled.back() - beta_scaling_limit(a));
    o.pass = o.pass && err < th::kBetaTolerance;
    o.detail += fmt("a=%.1f err=%.2e; ", a, err);
  }
  return o;
}

Outcome pathwise_identity(const Context& ctx) {
  struct Case {
    std::string dist;
    int d;
  };
  const std::vector<Case> cases{{"rademacher", 1},
                                {"gaussian(d=2)", 2},
                                {"discrete[(1,0):0.2,(-1,2):0.3,(0,-1):0.5]", 2},
                                {"pareto(a=2.5)", 1},
                                {"linear(gaussian(d=3), [[1,0.5,0],[0,1,0],[0,0,3]])", 3}};
  double worst = 0.0;
  std::size_t checked = 0;
  std::uint64_t cell = 0;
  for (const auto& c : cases) {
    const auto dist = parse_distribution(c.dist, c.d);
    std::vector<FunctionalSpec> hs{make_coordinate(0, dist), make_norm_squared(dist),
                                   make_tail_indicator(1.5, dist)};
    if (c.d > 1) hs.push_back(make_cross_moment(0, 1, dist));
    for (double a : {0.0, 0.3, 0.5, 0.75, 0.95}) {
      WalkConfig cfg;
      cfg.params = {a, c.d};
      cfg.dist = dist;
      cfg.horizon = th::kIdentityHorizon;
      cfg.retain_trajectory = true;
      cfg.seed = split_seed(ctx.seed, hash_name("identity"), cell++);
      const auto s = run_walk(cfg);
      for (const auto& h : hs) {
        if (h.moment_warning) continue;
        const auto r = delta_identity_residual(h, *s.trajectory, a);
        worst = std::max({worst, r.recursion, r.closed_form});
        ++checked;
      }
    }
  }
  return {worst < th::kIdentityTolerance,
          fmt("max relative residual %.2e over %zu (trajectory, h) pairs", worst, checked)};
}

Outcome lyapunov(const Context& ctx) {
  Outcome o{true, ""};
  const auto p = default_params(Inequality::sqrt_abs);
  const auto direct = certify(Inequality::sqrt_abs, p, th::kLyapunovSamples, ctx.seed);
  o.pass = direct.pass;
  o.detail += fmt("sqrt-abs at eps=%.4f C=%.4f: %llu violations; ", p.epsilon, p.C,
                  static_cast<unsigned long long>(direct.violations));
  for (auto id : {Inequality::sqrt_abs, Inequality::sqrt_log_global, Inequality::sqrt_log_local,
                  Inequality::inverse_power_local}) {
    const auto s = find_constants(id, default_params(id), default_grid(id), th::kLyapunovSamples,
                                  ctx.seed);
    o.pass = o.pass && s.found;
    if (s.found) {
      o.detail += fmt("%s r=%.3g C=%.3g; ", inequality_name(id).c_str(), s.params.r, s.params.C);
    } else {
      o.detail += inequality_name(id) + " no witness; ";
    }
  }
  return o;
}

Outcome exit_scaling(const Context& ctx) {
  const auto rep = exit_time_experiment(0.5, whiten(triangular_lattice()), {10, 20, 40, 80},
                                        th::kExitReplicas, ctx.seed, ctx.threads);
  std::uint64_t stuck = 0;
  std::string text;
  for (const auto& r : rep.rows) {
    stuck += r.non_exits;
    text += fmt("%.3f ", r.scaled);
  }
  return {stuck == 0 && rep.ratio < th::kExitMaxRatio,
          fmt("E zeta_R / R^2 = %sratio %.3f", text.c_str(), rep.ratio)};
}

Outcome critical_rate(const Context& ctx) {
  Cell cell{0.5, whiten(StepDistribution::gaussian(2)), th::kCriticalHorizon, th::kCriticalReplicas};
  WalkConfig base;
  base.params = {cell.alpha, 2};
  base.dist = cell.dist;
  base.horizon = cell.n;
  base.checkpoints.explicit_times = {cell.n};
  const auto series = run_series(base, cell.replicas, ctx.seed, ctx.threads);
  std::vector<double> dev;
  for (const auto& s : series) {
    const auto& r = s.records.back();
    dev.push_back(std::abs(xn_value(r.n, r.norm * r.norm, th::kCriticalKappa) - 1.0));
  }
  const double m = median(dev);
  return {m < th::kCriticalTolerance, fmt("median |x_n - 1| = %.4f (tolerance %.2f)", m,
                                          th::kCriticalTolerance)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  Context ctx;
  std::vector<int> only;
  app.add_option("--seed", ctx.seed, "master seed")->capture_default_str();
  app.add_option("--threads", ctx.threads, "worker threads (0 = all cores)");
  app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "second-moment oracle", second_moment},
      {2, "construction equivalence", construction_equivalence},
      {3, "escape-exponent phase diagram", phase_diagram},
      {4, "recurrence and transience split", recurrence_split},
      {5, "superdiffusive limit non-degenerate", superdiffusive_limit},
      {6, "angular transition", angular_transition},
      {7, "Marcinkiewicz-Zygmund rate", mz_rate},
      {8, "beta_n asymptotics", beta_asymptotics},
      {9, "pathwise Delta_n identity", pathwise_identity},
      {10, "Lyapunov certification", lyapunov},
      {11, "exit-time scaling", exit_scaling},
      {12, "critical planar rate", critical_rate},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (const auto& c : all) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << c.id << ": " << c.name << ": "
              << o.detail << " [" << fmt("%.1f", secs) << " s]" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
