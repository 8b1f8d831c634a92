#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "srrw/lyapunov.hpp"

using namespace srrw;

TEST(Lyapunov, FunctionValues) {
  const double x1[] = {9.0};
  EXPECT_DOUBLE_EQ((LyapunovFn{LyapunovKind::sqrt_abs})(x1), 3.0);
  const double x2[] = {std::exp(4.0), 0.0};
  EXPECT_NEAR((LyapunovFn{LyapunovKind::sqrt_log})(x2), 2.0, 1e-12);
  const double x3[] = {0.5, 0.0};
  EXPECT_EQ((LyapunovFn{LyapunovKind::sqrt_log})(x3), 0.0);
  const double x4[] = {16.0, 0.0, 0.0};
  EXPECT_NEAR((LyapunovFn{LyapunovKind::inverse_power, 4.0})(x4), 1.0 / 16.0, 1e-15);
  EXPECT_EQ((LyapunovFn{LyapunovKind::inverse_power, 4.0})(x3), 1.0);
}

TEST(Lyapunov, TruncationSet) {
  const double x[] = {100.0, 0.0};
  const double inside[] = {0.0, 60.0};
  const double outside[] = {0.0, 70.0};
  EXPECT_TRUE(in_truncation_set(x, inside, 0.1));  // 100^0.9 = 63.1
  EXPECT_FALSE(in_truncation_set(x, outside, 0.1));
}

TEST(Lyapunov, TaylorRadiusClosedForm) {
  // sqrt(1 + t) = 1 + t/2 - t^2/10 first fails at t = (sqrt5 - 1)^2 - 1.
  EXPECT_NEAR(taylor_radius(), 5.0 - 2.0 * std::sqrt(5.0), 1e-10);
}

TEST(Lyapunov, SqrtAbsWorkedExample) {
  InequalityParams p;
  p.epsilon = 0.1;
  p.C = 5.0;
  const double x[] = {4.0}, y[] = {5.0};
  const auto s = evaluate(Inequality::sqrt_abs, p, x, y);
  EXPECT_NEAR(s.lhs, 1.0, 1e-15);
  // 2 (5/8 - 25/160 + 5 * 25/16)
  EXPECT_NEAR(s.rhs, 16.5625, 1e-12);
  EXPECT_TRUE(s.holds());
}

TEST(Lyapunov, SqrtLogGlobalWorkedExample) {
  const double e = std::numbers::e;
  const double x[] = {e, 0.0}, y[] = {e * e - e, 0.0};
  const auto s = evaluate(Inequality::sqrt_log_global, InequalityParams{}, x, y);
  EXPECT_NEAR(s.lhs, std::sqrt(2.0) - 1.0, 1e-12);
  EXPECT_NEAR(s.rhs, e, 1e-12);
}

TEST(Lyapunov, InversePowerRegressionPoint) {
  InequalityParams p;
  p.epsilon = 0.125;
  p.C = 10.0;
  p.delta = 1.0;
  const double x[] = {100.0, 0.0, 0.0}, y[] = {0.0, 1.0, 0.0};
  const auto s = evaluate(Inequality::inverse_power_local, p, x, y);
  EXPECT_NEAR(s.lhs, -3.9526247433108888e-06, 1e-18);
  EXPECT_NEAR(s.rhs, 4.0504138175762604e-05, 1e-17);
}

TEST(Lyapunov, TaylorConstantsCertify) {
  const auto p = default_params(Inequality::sqrt_abs);
  EXPECT_NEAR(p.C, std::pow(p.epsilon, -1.5), 1e-12);
  const auto r = certify(Inequality::sqrt_abs, p, 200000, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.violations, 0u);
}

TEST(Lyapunov, SqrtAbsFailsWithoutCorrection) {
  auto p = default_params(Inequality::sqrt_abs);
  p.C = 0.0;
  EXPECT_FALSE(certify(Inequality::sqrt_abs, p, 100000, 1).pass);
}

TEST(Lyapunov, SearchFindsLocalConstants) {
  const auto s = find_constants(Inequality::sqrt_log_local, default_params(Inequality::sqrt_log_local),
                                default_grid(Inequality::sqrt_log_local), 100000, 2);
  ASSERT_TRUE(s.found);
  EXPECT_GT(s.params.C, 0.0);
  EXPECT_FALSE(s.attempts.front().pass);
}

TEST(Lyapunov, HalfDeltaPrefactorFails) {
  auto p = default_params(Inequality::inverse_power_local);
  p.r = std::exp(2.0);
  p.C = 2.0;
  EXPECT_TRUE(certify(Inequality::inverse_power_local, p, 100000, 3).pass);
  p.half_delta_prefactor = true;
  const auto bad = certify(Inequality::inverse_power_local, p, 100000, 3);
  EXPECT_FALSE(bad.pass);
  EXPECT_GT(bad.violations, 0u);
}

TEST(Lyapunov, CertificationIsDeterministic) {
  const auto p = default_params(Inequality::sqrt_log_global);
  const auto a = certify(Inequality::sqrt_log_global, p, 50000, 9);
  const auto b = certify(Inequality::sqrt_log_global, p, 50000, 9);
  EXPECT_EQ(a.max_violation, b.max_violation);
  EXPECT_EQ(a.worst_x, b.worst_x);
}

TEST(Lyapunov, NamesRoundTrip) {
  for (auto id : {Inequality::sqrt_abs, Inequality::sqrt_log_global, Inequality::sqrt_log_local,
                  Inequality::inverse_power_local}) {
    EXPECT_EQ(parse_inequality(inequality_name(id)), id);
  }
  EXPECT_THROW(parse_inequality("nope"), std::invalid_argument);
}
