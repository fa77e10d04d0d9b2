#include <gtest/gtest.h>

#include <cmath>

#include "rqn/linesearch.hpp"
#include "rqn/problems.hpp"

namespace {

using rqn::Vector;

rqn::UncertainProblem quartic(double lo = -100.0, double hi = 100.0) {
  rqn::Kernel k = [](std::size_t, const Vector&, const Vector& x) { return std::pow(x[0], 4); };
  return rqn::UncertainProblem("quartic", 1, 1, {Vector::Zero(1)}, k, nullptr, Vector::Constant(1, lo),
                               Vector::Constant(1, hi));
}

TEST(LineSearch, OvershootingStepIsHalvedToTheLargestAcceptableTrial) {
  const auto P = quartic();
  const Vector x = Vector::Ones(1);
  const auto eval = rqn::evaluate_robust(P, x);
  const Vector s = Vector::Constant(1, -10.0);
  const double theta = -1.0;
  const rqn::LineSearchParams params;
  const auto res = rqn::armijo_step(P, x, eval, s, theta, params);
  EXPECT_DOUBLE_EQ(res.alpha, 0.125);
  // Direct evaluation of the accepted trial and of the doubled one.
  const double f0 = 1.0;
  EXPECT_LE(std::pow(1.0 - 10.0 * res.alpha, 4), f0 + res.alpha * params.beta * theta);
  EXPECT_GT(std::pow(1.0 - 20.0 * res.alpha, 4), f0 + 2.0 * res.alpha * params.beta * theta);
  EXPECT_EQ(res.trials, 4u);
  EXPECT_EQ(res.point_evaluations, 4u);
  EXPECT_DOUBLE_EQ(res.next.F[0], std::pow(1.0 - 10.0 * 0.125, 4));
}

TEST(LineSearch, FullStepAcceptedWithoutBacktracking) {
  const auto P = quartic();
  const Vector x = Vector::Ones(1);
  const auto eval = rqn::evaluate_robust(P, x);
  const auto res = rqn::armijo_step(P, x, eval, Vector::Constant(1, -0.5), -0.1);
  EXPECT_DOUBLE_EQ(res.alpha, 1.0);
  EXPECT_EQ(res.trials, 1u);
}

TEST(LineSearch, LiteralTrialSetStartsAtOneHalf) {
  const auto P = quartic();
  const Vector x = Vector::Ones(1);
  const auto eval = rqn::evaluate_robust(P, x);
  rqn::LineSearchParams params;
  params.allow_full_step = false;
  const auto res = rqn::armijo_step(P, x, eval, Vector::Constant(1, -0.5), -0.1, params);
  EXPECT_DOUBLE_EQ(res.alpha, 0.5);
}

TEST(LineSearch, BoxIsEnforcedWithoutEvaluatingOutsidePoints) {
  const auto P = quartic(-0.5, 2.0);
  const Vector x = Vector::Ones(1);
  const auto eval = rqn::evaluate_robust(P, x);
  const auto res = rqn::armijo_step(P, x, eval, Vector::Constant(1, -2.0), -1.0);
  EXPECT_DOUBLE_EQ(res.alpha, 0.5);
  EXPECT_EQ(res.trials, 2u);
  EXPECT_EQ(res.point_evaluations, 1u);
}

TEST(LineSearch, FailsWhenNoTrialDecreases) {
  const auto P = quartic();
  const Vector x = Vector::Ones(1);
  const auto eval = rqn::evaluate_robust(P, x);
  rqn::LineSearchParams params;
  params.r_max = 10;
  EXPECT_THROW(rqn::armijo_step(P, x, eval, Vector::Constant(1, 1.0), -1.0, params), rqn::LineSearchFailure);
}

TEST(LineSearch, RequiresNegativeTheta) {
  const auto P = quartic();
  const Vector x = Vector::Ones(1);
  const auto eval = rqn::evaluate_robust(P, x);
  EXPECT_THROW(rqn::armijo_step(P, x, eval, Vector::Constant(1, -1.0), 0.0), rqn::InvariantViolation);
}

TEST(LineSearch, RejectsInvalidBeta) {
  rqn::LineSearchParams params;
  params.beta = 1.0;
  EXPECT_THROW(params.validate(), rqn::ConfigError);
}

TEST(LineSearch, AcceptedStepDecreasesEveryObjective) {
  const auto& tp4 = rqn::get_problem("TP4");
  Vector x(2);
  x << 2.0, -1.0;
  auto eval = rqn::evaluate_robust(tp4, x);
  Vector s(2);
  s << -1.0, 0.5;
  const auto res = rqn::armijo_step(tp4, x, eval, s, -0.5);
  EXPECT_TRUE((res.next.F.array() < eval.F.array()).all());
}

}  // namespace
