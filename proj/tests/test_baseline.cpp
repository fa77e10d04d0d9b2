#include <gtest/gtest.h>

#include <random>

#include "rqn/baseline.hpp"
#include "rqn/problems.hpp"

namespace {

using rqn::Vector;

Vector v2(double a, double b) {
  Vector out(2);
  out << a, b;
  return out;
}

TEST(WeightScheme, StandardSchemeStartsWithUnitVectors) {
  for (std::size_t m : {2u, 3u}) {
    const auto w = rqn::generate_weights(rqn::WeightScheme::standard(m, 1));
    ASSERT_EQ(w.size(), 100u);
    for (std::size_t j = 0; j < m; ++j)
      EXPECT_EQ(w[j], Vector::Unit(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)));
    for (const auto& v : w) {
      EXPECT_EQ(static_cast<std::size_t>(v.size()), m);
      EXPECT_TRUE((v.array() >= 0.0).all() && (v.array() <= 1.0).all());
      EXPECT_FALSE(v.isZero(0.0));
    }
  }
}

TEST(WeightScheme, FixedOnly) {
  rqn::WeightScheme scheme;
  scheme.m = 2;
  scheme.fixed = {v2(1, 0)};
  const auto w = rqn::generate_weights(scheme);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0], v2(1, 0));
}

TEST(WeightScheme, SameSeedSameWeights) {
  EXPECT_EQ(rqn::generate_weights(rqn::WeightScheme::standard(3, 9)),
            rqn::generate_weights(rqn::WeightScheme::standard(3, 9)));
}

TEST(WeightScheme, RejectsNegativeWeights) {
  rqn::WeightScheme scheme;
  scheme.fixed = {v2(-1, 2)};
  EXPECT_THROW(rqn::generate_weights(scheme), rqn::ConfigError);
}

TEST(Expansion, MaxOverTuplesEqualsWeightedWorstCases) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    double a[2][2], b[2][2];
    for (auto& row : a)
      for (double& v : row) v = normal(gen);
    for (auto& row : b)
      for (double& v : row) v = normal(gen);
    rqn::Kernel k = [a, b](std::size_t j, const Vector& xi, const Vector& x) {
      const auto i = static_cast<std::size_t>(xi[0]);
      return a[j][i] + b[j][i] * x[0];
    };
    rqn::UncertainProblem P("table", 1, 2, {Vector::Zero(1), Vector::Ones(1)}, k, nullptr, Vector::Constant(1, -1),
                            Vector::Constant(1, 1));
    const Vector w = v2(std::abs(normal(gen)) + 0.01, std::abs(normal(gen)));
    const auto E = rqn::expand_weighted_sum(P, w);
    EXPECT_EQ(E.p(), 4u);
    EXPECT_EQ(E.m(), 1u);
    const Vector x = Vector::Constant(1, std::uniform_real_distribution<double>(-1, 1)(gen));
    const Vector F = rqn::evaluate_robust(P, x).F;
    EXPECT_NEAR(rqn::evaluate_robust(E, x).F[0], w.dot(F), 1e-12);
  }
}

TEST(Expansion, GridSearchOracleOnTP4) {
  const auto& tp4 = rqn::get_problem("TP4");
  const Vector w = v2(0.5, 0.5);
  const auto trace = rqn::weighted_sum_solve(tp4, w, tp4.midpoint());
  ASSERT_EQ(trace.status, rqn::Status::Critical);
  const double found = w.dot(rqn::evaluate_robust(tp4, trace.x_final).F);
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r <= 200; ++r) {
    for (int c = 0; c <= 200; ++c) {
      const Vector x = v2(-5.0 + 10.0 * r / 200.0, -5.0 + 10.0 * c / 200.0);
      best = std::min(best, w.dot(rqn::evaluate_robust(tp4, x).F));
    }
  }
  EXPECT_LE(found, best + 1e-6);
  EXPECT_GE(found, best - 0.05);
}

TEST(Expansion, UnitWeightMinimisesOneObjective) {
  const auto& tp4 = rqn::get_problem("TP4");
  const auto E = rqn::expand_weighted_sum(tp4, v2(1, 0));
  const Vector x = v2(1.3, -0.4);
  EXPECT_NEAR(rqn::evaluate_robust(E, x).F[0], rqn::evaluate_robust(tp4, x).F[0], 1e-12);
  const auto trace = rqn::weighted_sum_solve(tp4, v2(1, 0), tp4.midpoint());
  EXPECT_EQ(trace.status, rqn::Status::Critical);
}

TEST(Expansion, CapRaisesUnsupportedExpansion) {
  EXPECT_THROW(rqn::expand_weighted_sum(rqn::get_problem("TP1"), v2(1, 1), 3), rqn::UnsupportedExpansion);
}

TEST(Expansion, RejectsWrongWeightDimension) {
  EXPECT_THROW(rqn::expand_weighted_sum(rqn::get_problem("TP1"), Vector::Ones(3)), rqn::ConfigError);
}

TEST(WeightedSumFront, StartsFromTheMidpoint) {
  const auto& tp4 = rqn::get_problem("TP4");
  const auto front = rqn::weighted_sum_front(tp4, {v2(1, 0), v2(0, 1), v2(1, 1)}, {});
  ASSERT_EQ(front.runs.size(), 3u);
  for (const auto& r : front.runs) EXPECT_EQ(r.x0, tp4.midpoint());
  EXPECT_EQ(front.solver, "weighted-sum");
  EXPECT_FALSE(front.points.empty());
}

}  // namespace
