#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"
#include "srrw/aggregate.hpp"
#include "srrw/functional.hpp"
#include "srrw/statistics.hpp"
#include "srrw/walk.hpp"

using namespace srrw;

namespace {

Trajectory make_traj(const StepDistribution& d, double a, std::uint64_t n, std::uint64_t seed) {
  WalkConfig c;
  c.params = {a, d.dim()};
  c.dist = d;
  c.horizon = n;
  c.seed = seed;
  c.retain_trajectory = true;
  return *run_walk(c).trajectory;
}

}  // namespace

TEST(BetaGamma, FirstTermsByHand) {
  const auto bg = beta_gamma(4, 0.5);
  EXPECT_DOUBLE_EQ(bg.beta[0], 1.0);
  EXPECT_NEAR(bg.gamma[0], 0.25, 1e-16);
  EXPECT_NEAR(bg.beta[1], 0.75, 1e-15);
  EXPECT_NEAR(bg.beta[2], 0.75 * (1 - 0.5 / 3), 1e-15);
  EXPECT_NEAR(bg.beta[3], 0.75 * (1 - 0.5 / 3) * (1 - 0.5 / 4), 1e-15);
}

TEST(BetaGamma, ProductAgreesWithGammaRatio) {
  for (double a : {0.0, 0.1, 0.5, 0.9}) {
    const auto bg = beta_gamma(100000, a);
    for (std::uint64_t n : {1ULL, 2ULL, 10ULL, 1000ULL, 100000ULL}) {
      EXPECT_NEAR(bg.beta[n - 1] / beta_closed_form(n, a), 1.0, 1e-11) << a << " " << n;
    }
  }
}

TEST(BetaGamma, ScalingLimit) {
  EXPECT_NEAR(beta_scaling_limit(0.5), 2.0 / std::sqrt(M_PI), 1e-15);
  EXPECT_NEAR(beta_scaling_limit(0.0), 1.0, 1e-15);
  for (double a : {0.1, 0.5, 0.9}) {
    EXPECT_LT(std::abs(beta_gamma(1000000, a).scaled.back() - beta_scaling_limit(a)), 1e-3);
  }
  EXPECT_THROW(beta_gamma(10, 1.0), std::invalid_argument);
}

TEST(Delta, DirectAverage) {
  Trajectory t{1, {1, -1, -1, 1, 1}};
  const auto d = delta_n(make_coordinate(0, StepDistribution::rademacher()), t);
  ASSERT_EQ(d.values.size(), 5u);
  EXPECT_DOUBLE_EQ(d.values[0], 1.0);
  EXPECT_DOUBLE_EQ(d.values[1], 0.0);
  EXPECT_NEAR(d.values[2], -1.0 / 3, 1e-15);
  EXPECT_NEAR(d.values[4], 0.2, 1e-15);
}

TEST(Delta, IdentityHoldsOnGeneratedPaths) {
  const auto g = StepDistribution::gaussian(2);
  for (double a : {0.0, 0.2, 0.5, 0.8, 0.99}) {
    const auto t = make_traj(g, a, 20000, 17);
    for (const auto& h : {make_coordinate(1, g), make_norm_squared(g), make_cross_moment(0, 1, g),
                          make_tail_indicator(2.0, g)}) {
      const auto r = delta_identity_residual(h, t, a);
      EXPECT_LT(r.recursion, 1e-8) << h.name << " " << a;
      EXPECT_LT(r.closed_form, 1e-8) << h.name << " " << a;
    }
  }
}

TEST(Delta, IdentityRejectsInfiniteMoment) {
  const auto p = StepDistribution::pareto(1.5);
  const auto t = make_traj(p, 0.5, 100, 1);
  EXPECT_THROW(delta_identity_residual(make_norm_squared(p), t, 0.5), std::exception);
  EXPECT_THROW(delta_identity_residual(make_coordinate(0, p), t, 1.0), std::exception);
}

TEST(Delta, SecondMomentMatrixOfIidIsSmall) {
  const auto t = make_traj(StepDistribution::gaussian(2), 0.0, 100000, 4);
  const auto f = delta_second_moment_frobenius(t, Eigen::MatrixXd::Identity(2, 2),
                                               std::vector<std::uint64_t>{100000});
  ASSERT_EQ(f.size(), 1u);
  EXPECT_LT(f[0], 0.03);
}

TEST(Exponent, PowerLawIsExact) {
  std::vector<std::uint64_t> t;
  std::vector<double> norms;
  for (std::uint64_t n = 100; n <= 1000000; n *= 2) {
    t.push_back(n);
    norms.push_back(std::pow(static_cast<double>(n), 0.637));
  }
  const auto e = escape_exponent(t, norms);
  ASSERT_TRUE(e.valid);
  EXPECT_NEAR(e.slope, 0.637, 1e-9);
  EXPECT_NEAR(e.final_ratio, 0.637, 1e-9);
}

TEST(Exponent, DropsZerosAndNeedsSpan) {
  std::vector<std::uint64_t> t{1000, 2000, 4000, 8000, 10000};
  std::vector<double> norms{1, 2, 3, 4, 5};
  EXPECT_THROW(escape_exponent(t, norms), std::invalid_argument);
  std::vector<std::uint64_t> t2{10, 100, 1000, 2000, 5000, 10000};
  std::vector<double> n2{3, 10, 0, 44, 70, 100};
  const auto e = escape_exponent(t2, n2);
  EXPECT_TRUE(e.valid);
  EXPECT_LT(e.points, t2.size());
}

TEST(Exponent, FullReinforcementSlopeIsOne) {
  WalkConfig c;
  c.params = {1.0, 3};
  c.dist = StepDistribution::gaussian(3);
  c.horizon = 100000;
  EXPECT_NEAR(escape_exponent(run_walk(c)).slope, 1.0, 1e-9);
}

TEST(Xn, Substitutions) {
  EXPECT_NEAR(xn_value(1000, 0.0, 0.9), 0.9, 1e-12);
  const double n = 5000.0;
  EXPECT_NEAR(xn_value(5000, n - std::pow(n, 0.9), 0.9), 1.0, 1e-12);
  EXPECT_THROW(xn_value(1, 1.0, 0.9), std::invalid_argument);
  EXPECT_THROW(xn_value(10, 1.0, 1.0), std::invalid_argument);
}

TEST(Angular, OscillationBounds) {
  std::vector<double> same{1, 0, 2, 0, 5, 0, 9, 0};
  EXPECT_DOUBLE_EQ(tail_oscillation(same, 2), 0.0);
  std::vector<double> flip{1, 0, 2, 0, -5, 0, 9, 0};
  EXPECT_DOUBLE_EQ(tail_oscillation(flip, 2), 2.0);
  std::vector<double> quarter{1, 0, 0, 1};
  EXPECT_NEAR(tail_oscillation(quarter, 2), std::sqrt(2.0), 1e-15);
  std::vector<double> origin{0, 0, 1, 0};
  EXPECT_NEAR(tail_oscillation(origin, 2), 1.0, 1e-15);
}

TEST(Recurrence, CountsReturnsAndSites) {
  Trajectory t{1, {1, 1, 1, -1, -1, -1, -1, 1, 1, 1, 1}};
  const auto r = recurrence_stats(t, 1.0, std::vector<std::uint64_t>{11});
  EXPECT_TRUE(r.lattice);
  EXPECT_EQ(r.returns.back(), 1u);
  EXPECT_EQ(r.site_visits.at({0}), 2u);
  EXPECT_EQ(default_return_radius(StepDistribution::rademacher()), 1.0);
  EXPECT_NEAR(default_return_radius(StepDistribution::gaussian(2)), 2 * std::sqrt(2.0), 1e-12);
}

TEST(ExitTimes, MonotoneInRadius) {
  const auto ex = exit_times(StepDistribution::rademacher(), 0.3, std::vector<double>{0, 1, 5, 20}, 8);
  ASSERT_EQ(ex.size(), 4u);
  EXPECT_EQ(ex[0].time, 0u);
  for (std::size_t k = 1; k < ex.size(); ++k) {
    EXPECT_TRUE(ex[k].exited);
    EXPECT_GE(ex[k].time, ex[k - 1].time);
  }
  EXPECT_EQ(ex[1].time, 1u);
}

TEST(Rate, WarningFollowsMomentOrder) {
  const auto p = StepDistribution::pareto(1.5);
  WalkConfig c;
  c.params = {0.3, 1};
  c.dist = p;
  c.horizon = 10000;
  c.functionals = {make_coordinate(0, p)};
  const auto s = run_walk(c);
  EXPECT_FALSE(mz_rate_trace(s, 0, 0.2, 1.49).warning);
  EXPECT_TRUE(mz_rate_trace(s, 0, 0.4, 1.49).warning);
  const auto tr = mz_rate_trace(s, 0, 0.2, 1.49);
  ASSERT_EQ(tr.values.size(), s.records.size());
  EXPECT_NEAR(tr.values.back(), std::pow(10000.0, 0.2) * std::abs(s.records.back().deltas[0]), 1e-12);
}

TEST(Lil, RatioStaysModerateForIidSteps) {
  const auto t = make_traj(StepDistribution::rademacher(), 0.0, 200000, 21);
  const auto l = lil_ratio(t, 0.0, 1.0, 0.0, std::vector<std::uint64_t>{1000, 200000});
  ASSERT_FALSE(l.running_max.empty());
  EXPECT_GT(l.running_max.back(), 0.3);
  EXPECT_LT(l.running_max.back(), 1.6);
  EXPECT_THROW(lil_normalizer(100, 0.6, 1.0), std::invalid_argument);
}

TEST(Report, JsonAndCsvShapes) {
  WalkConfig c;
  c.params = {0.5, 2};
  c.dist = StepDistribution::gaussian(2);
  c.horizon = 20000;
  c.functionals = {make_coordinate(0, c.dist)};
  c.return_radius = 2.0;
  const auto rep = make_report(run_walk(c), 3);
  rep.validate();
  const auto j = nlohmann::json::parse(rep.to_json());
  EXPECT_EQ(j["replica"], 3);
  EXPECT_TRUE(j["series"].contains("norm"));
  EXPECT_TRUE(j["series"].contains("delta:coord0"));
  const auto csv = rep.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "replica,n,metric,value");
  DiagnosticsReport bad = rep;
  bad.series["norm"].push_back(NAN);
  EXPECT_THROW(bad.validate(), std::domain_error);
}

// ---------------------------------------------------------------------------

TEST(Aggregate, SummaryMatchesDirectFormulas) {
  SampleSummary s;
  for (double v : {4.0, 1.0, 3.0, 2.0, 5.0}) s.add(v);
  const auto r = s.finalize();
  EXPECT_EQ(r.count, 5u);
  EXPECT_DOUBLE_EQ(r.mean, 3.0);
  EXPECT_NEAR(r.std, std::sqrt(2.5), 1e-15);
  EXPECT_DOUBLE_EQ(r.median, 3.0);
  EXPECT_NEAR(r.q05, 1.2, 1e-15);
  EXPECT_NEAR(r.q95, 4.8, 1e-15);
  EXPECT_NEAR(r.ci_half, 1.959963984540054 * std::sqrt(2.5) / std::sqrt(5.0), 1e-15);
}

TEST(Aggregate, MergeOrderDoesNotMatter) {
  std::mt19937_64 g(1);
  std::normal_distribution<double> nd(0.0, 1e6);
  std::vector<double> v(999);
  for (auto& x : v) x = nd(g);
  std::vector<SampleSummary> parts(7);
  for (std::size_t i = 0; i < v.size(); ++i) parts[i % 7].add(v[i]);
  SampleSummary ref;
  for (const auto& p : parts) ref.merge(p);
  const auto a = ref.finalize();
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(parts.begin(), parts.end(), g);
    SampleSummary m;
    for (const auto& p : parts) m.merge(p);
    const auto b = m.finalize();
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std, b.std);
    EXPECT_EQ(a.median, b.median);
    EXPECT_EQ(a.q05, b.q05);
  }
}

TEST(Aggregate, ChiSquareDetectsShiftAndAcceptsSame) {
  std::mt19937_64 g(5);
  std::binomial_distribution<int> b1(20, 0.5), b2(20, 0.55);
  std::vector<double> x, y, z;
  for (int i = 0; i < 20000; ++i) {
    x.push_back(b1(g));
    y.push_back(b1(g));
    z.push_back(b2(g));
  }
  EXPECT_GT(chi_square_two_sample(x, y).p_value, 1e-3);
  EXPECT_LT(chi_square_two_sample(x, z).p_value, 1e-6);
  EXPECT_NEAR(chi_square_two_sample(x, x).statistic, 0.0, 1e-12);
  EXPECT_NEAR(chi_square_sf(3.84145882069412, 1), 0.05, 1e-9);
}

TEST(Aggregate, ContinuousTest) {
  std::mt19937_64 g(6);
  std::normal_distribution<double> n0(0, 1), n1(0.1, 1);
  std::vector<double> x, y, z;
  for (int i = 0; i < 20000; ++i) {
    x.push_back(n0(g));
    y.push_back(n0(g));
    z.push_back(n1(g));
  }
  EXPECT_GT(chi_square_two_sample_continuous(x, y).p_value, 1e-3);
  EXPECT_LT(chi_square_two_sample_continuous(x, z).p_value, 1e-6);
}
