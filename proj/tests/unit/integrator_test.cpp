#include "hpa/integrator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "hpa/error.hpp"

namespace hpa {
namespace {

ParameterSet decay_only() {
  ParameterSet p;
  p.k1 = p.k2 = p.k3 = p.k4 = p.k5 = 0;
  return p;
}

IntegrationConfig one_day(StepMode mode) {
  IntegrationConfig c;
  c.mode = mode;
  return c;
}

double max_abs_diff(const HormoneState& a, const HormoneState& b) {
  return std::max({std::abs(a.R - b.R), std::abs(a.A - b.A), std::abs(a.C - b.C)});
}

TEST(StepRk4, DecayMatchesFourthOrderTaylorPolynomial) {
  // RK4 on y' = -h y advances by exactly 1 - x + x^2/2 - x^3/6 + x^4/24, x = h dt.
  const HormoneState s = step_rk4(0.0, {1, 0, 0}, 10.0, decay_only());
  const double x = 1.732;
  const double taylor = 1 - x + x * x / 2 - x * x * x / 6 + x * x * x * x / 24;
  EXPECT_NEAR(taylor, 0.2769188066240001, 1e-15);
  EXPECT_NEAR(s.R, taylor, 1e-14);
  EXPECT_EQ(s.A, 0.0);
  EXPECT_EQ(s.C, 0.0);
  // Far from the exact solution at this step size.
  EXPECT_GT(std::abs(s.R - std::exp(-x)), 0.05);
}

TEST(StepRk4, FixedPointIsInvariant) {
  ParameterSet p = decay_only();
  p.phi = p.rho = p.psi = p.xi = 0;
  p.k1 = 0.5703;
  p.k4 = 0.0821;
  p.k5 = 0.0043;
  const HormoneState star = steady_state_open_loop(p, 0.0);
  const HormoneState next = step_rk4(0.0, star, 0.5, p);
  EXPECT_NEAR(next.R, star.R, 1e-12);
  EXPECT_NEAR(next.A, star.A, 1e-12);
  EXPECT_NEAR(next.C, star.C, 1e-12);
}

TEST(StepRk4, ReportsTimeOfFailure) {
  ParameterSet p;
  p.k5 = 1e306;
  try {
    step_rk4(42.0, {1e300, 1e300, 1e300}, 100.0, p);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    ASSERT_TRUE(e.time().has_value());
    EXPECT_GE(*e.time(), 42.0);
  }
}

TEST(StepRk4, StepHalvingDifferenceShrinks) {
  // One step of dt against two steps of dt/2 from the same state: the gap is
  // the local error of RK4 and falls like dt^5.
  const ParameterSet p;
  const HormoneState s{6.0, 12.0, 5.0};
  auto gap = [&](double dt) {
    const HormoneState one = step_rk4(300.0, s, dt, p);
    const HormoneState two = step_rk4(300.0 + dt / 2, step_rk4(300.0, s, dt / 2, p), dt / 2, p);
    return max_abs_diff(one, two);
  };
  const double ratio = gap(2.0) / gap(1.0);
  EXPECT_GT(ratio, 28.0) << ratio;
  EXPECT_LT(ratio, 36.0) << ratio;
}

TEST(Integrate, ConvergenceOrderIsFour) {
  const ParameterSet p;
  IntegrationConfig ref = one_day(StepMode::kAdaptive);
  ref.burn_in = 0;
  ref.t_end = 720;
  ref.initial_state = HormoneState{6.0, 12.0, 5.0};
  ref.abs_tol = ref.rel_tol = 1e-12;
  const HormoneState exact = integrate(ref, p).states.back();

  auto error_at = [&](double dt) {
    IntegrationConfig c = ref;
    c.mode = StepMode::kFixed;
    c.dt = dt;
    return max_abs_diff(integrate(c, p).states.back(), exact);
  };
  const double e1 = error_at(8.0);
  const double e2 = error_at(4.0);
  const double order = std::log2(e1 / e2);
  EXPECT_GE(order, 3.5) << "e(8)=" << e1 << " e(4)=" << e2;
  EXPECT_LE(order, 4.5) << "e(8)=" << e1 << " e(4)=" << e2;
}

TEST(Integrate, AdaptiveAgreesWithFineFixedStep) {
  const ParameterSet p;
  IntegrationConfig fixed = one_day(StepMode::kFixed);
  fixed.dt = 0.1;
  IntegrationConfig adaptive = one_day(StepMode::kAdaptive);
  adaptive.output_step = 1.0;
  const Trajectory a = integrate(adaptive, p);
  const std::vector<HormoneState> f = integrate_at(fixed, p, a.times);
  ASSERT_EQ(a.size(), 1441u);
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a.states[i].C - f[i].C));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(Integrate, BurnInRemovesInitialTransient) {
  const ParameterSet p;
  IntegrationConfig ten = one_day(StepMode::kAdaptive);
  IntegrationConfig twenty = ten;
  twenty.burn_in = 2 * ten.burn_in;
  const Trajectory a = integrate(ten, p);
  const Trajectory b = integrate(twenty, p);
  ASSERT_EQ(a.size(), b.size());
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, max_abs_diff(a.states[i], b.states[i]));
  EXPECT_LE(worst, 1e-6);
}

TEST(Integrate, SolutionIsPeriodic) {
  const ParameterSet p;
  IntegrationConfig c = one_day(StepMode::kAdaptive);
  c.t_end = 2880;
  const Trajectory t = integrate(c, p);
  for (std::size_t i = 0; i < 1440; i += 10) {
    const HormoneState& a = t.states[i];
    const HormoneState& b = t.states[i + 1440];
    ASSERT_NEAR(a.C, b.C, 1e-2 * std::max(a.C, 1.0));
    ASSERT_NEAR(a.A, b.A, 1e-2 * std::max(a.A, 1.0));
  }
}

TEST(Integrate, StatesStayNonnegative) {
  for (auto mode : {StepMode::kFixed, StepMode::kAdaptive}) {
    const Trajectory t = integrate(one_day(mode), ParameterSet{});
    for (const auto& s : t.states) {
      ASSERT_GE(s.R, 0.0);
      ASSERT_GE(s.A, 0.0);
      ASSERT_GE(s.C, 0.0);
    }
  }
}

TEST(Integrate, AdaptiveDecayHitsTolerance) {
  IntegrationConfig c = one_day(StepMode::kAdaptive);
  c.burn_in = 0;
  c.t_end = 240;
  c.initial_state = HormoneState{1, 1, 1};
  c.abs_tol = c.rel_tol = 1e-10;
  const Trajectory t = integrate(c, decay_only());
  for (std::size_t i = 0; i < t.size(); ++i) {
    ASSERT_NEAR(t.states[i].R, std::exp(-0.1732 * t.times[i]), 1e-8);
    ASSERT_NEAR(t.states[i].A, std::exp(-0.0315 * t.times[i]), 1e-8);
    ASSERT_NEAR(t.states[i].C, std::exp(-0.0105 * t.times[i]), 1e-8);
  }
}

TEST(Integrate, FixedModeRecordsEveryStep) {
  IntegrationConfig c = one_day(StepMode::kFixed);
  c.dt = 0.5;
  const Trajectory t = integrate(c, ParameterSet{});
  ASSERT_EQ(t.size(), 2881u);
  EXPECT_EQ(t.times.front(), 0.0);
  EXPECT_EQ(t.times.back(), 1440.0);
}

TEST(Integrate, EmptyHorizonReturnsInitialSample) {
  IntegrationConfig c = one_day(StepMode::kFixed);
  c.t_end = c.t0;
  c.burn_in = 0;
  c.initial_state = HormoneState{1, 2, 3};
  const Trajectory t = integrate(c, ParameterSet{});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.states[0].C, 3.0);
}

TEST(Integrate, RejectsInvalidConfig) {
  IntegrationConfig c;
  c.t_end = -1;
  EXPECT_THROW(integrate(c, ParameterSet{}), InputError);
  c = IntegrationConfig{};
  c.dt = 0;
  EXPECT_THROW(integrate(c, ParameterSet{}), InputError);
  c = IntegrationConfig{};
  c.mode = StepMode::kAdaptive;
  const std::vector<double> bad_grid{10, 5};
  EXPECT_THROW(integrate(c, ParameterSet{}, bad_grid), InputError);
}

TEST(Integrate, OverflowRaisesNumericalError) {
  ParameterSet p;
  p.k5 = 1e300;
  p.h3 = 1e-300;
  for (auto mode : {StepMode::kFixed, StepMode::kAdaptive}) {
    IntegrationConfig c = one_day(mode);
    c.burn_in = 0;
    c.initial_state = HormoneState{1e300, 1e300, 1e300};
    EXPECT_THROW(integrate(c, p), NumericalError);
  }
}

TEST(Integrate, UnclampedNegativeProductionFails) {
  ParameterSet p;
  p.xi_sign = XiSign::kInhibitory;
  p.xi = 50;
  p.clamp_production = false;
  for (auto mode : {StepMode::kFixed, StepMode::kAdaptive}) {
    EXPECT_THROW(integrate(one_day(mode), p), NumericalError);
  }
}

TEST(Sample, IdentityMidpointAndRange) {
  Trajectory t;
  t.times = {0, 10, 20};
  t.states = {{0, 0, 0}, {2, 4, 6}, {4, 8, 12}};
  const std::vector<double> q{0, 5, 10, 20};
  const auto s = sample(t, q);
  EXPECT_EQ(s[0].C, 0.0);
  EXPECT_EQ(s[1].R, 1.0);
  EXPECT_EQ(s[1].C, 3.0);
  EXPECT_EQ(s[2].A, 4.0);
  EXPECT_EQ(s[3].C, 12.0);
  const std::vector<double> out_of_range{20.5};
  EXPECT_THROW(sample(t, out_of_range), InputError);
  const std::vector<double> before{-1};
  EXPECT_THROW(sample(t, before), InputError);
}

TEST(IntegrateAt, RepeatedTimesAreAllowed) {
  IntegrationConfig c = one_day(StepMode::kAdaptive);
  const std::vector<double> times{0, 30, 30, 60};
  const auto s = integrate_at(c, ParameterSet{}, times);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[1].C, s[2].C);
}

}  // namespace
}  // namespace hpa
