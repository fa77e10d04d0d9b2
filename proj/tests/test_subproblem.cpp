#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rqn/problems.hpp"
#include "rqn/subproblem.hpp"

namespace {

using rqn::Matrix;
using rqn::Vector;

rqn::QuadraticModels models_of(const oracle::Quadratics& q) {
  rqn::QuadraticModels m;
  m.n = static_cast<std::size_t>(q.g.front().size());
  m.c = Eigen::Map<const Vector>(q.c.data(), static_cast<Eigen::Index>(q.c.size()));
  m.g = q.g;
  m.H = q.H;
  return m;
}

TEST(Subproblem, SinglePairIsANewtonStep) {
  Matrix H(2, 2);
  H << 2.0, 0.5, 0.5, 1.0;
  Vector g(2);
  g << 1.0, -2.0;
  rqn::QuadraticModels m;
  m.n = 2;
  m.c = Vector::Zero(1);
  m.g = {g};
  m.H = {H};
  const auto sol = rqn::solve_subproblem(m, 1, 1);
  const Vector expected = -H.ldlt().solve(g);
  EXPECT_NEAR((sol.s - expected).norm(), 0.0, 1e-12);
  EXPECT_NEAR(sol.theta, -0.5 * g.dot(H.ldlt().solve(g)), 1e-12);
  EXPECT_DOUBLE_EQ(sol.lambda(0, 0), 1.0);
}

TEST(Subproblem, ZeroGradientsGiveCriticalPoint) {
  rqn::QuadraticModels m;
  m.n = 2;
  m.c = Vector::Zero(4);
  for (int a = 0; a < 4; ++a) {
    m.g.push_back(Vector::Zero(2));
    m.H.push_back(Matrix::Identity(2, 2) * (a + 1));
  }
  const auto sol = rqn::solve_subproblem(m, 2, 2);
  EXPECT_EQ(sol.s.norm(), 0.0);
  EXPECT_EQ(sol.theta, 0.0);
}

TEST(Subproblem, OpposingGradientsCancel) {
  // max(s, -s) + s^2/2 is minimised at s = 0 with value 0.
  rqn::QuadraticModels m;
  m.n = 1;
  m.c = Vector::Zero(2);
  m.g = {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)};
  m.H = {Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  const auto sol = rqn::solve_subproblem(m, 2, 1);
  EXPECT_NEAR(sol.s[0], 0.0, 1e-10);
  EXPECT_NEAR(sol.theta, 0.0, 1e-10);
  EXPECT_NEAR(sol.lambda(0, 0), 0.5, 1e-8);
}

TEST(Subproblem, MatchesSimplexGridOracle) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 40; ++trial) {
    const auto q = oracle::random_instance(gen, 2, 2, 2);
    const auto sol = rqn::solve_subproblem(models_of(q), 2, 2);
    const double grid = oracle::grid_dual_max(q, 1e-3);
    EXPECT_NEAR(sol.theta, grid, 1e-3) << "trial " << trial;
    EXPECT_GE(sol.theta, grid - 1e-9);
    EXPECT_NEAR(oracle::primal_value(q, sol.s), sol.theta, 1e-8);
  }
}

TEST(Subproblem, ThetaIsNonPositiveAndDirectionDescends) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto q = oracle::random_instance(gen, 3, 2, 2);
    const auto sol = rqn::solve_subproblem(models_of(q), 2, 2);
    EXPECT_LE(sol.theta, 0.0);
    for (std::size_t a = 0; a < q.c.size(); ++a)
      if (q.c[a] == 0.0 && sol.theta < -1e-10) EXPECT_LT(q.g[a].dot(sol.s), 0.0);
  }
}

TEST(Subproblem, InvariantUnderPositiveScaling) {
  std::mt19937_64 gen(8);
  const auto q = oracle::random_instance(gen, 2, 2, 2);
  auto scaled = q;
  for (auto& c : scaled.c) c *= 3.0;
  for (auto& g : scaled.g) g *= 3.0;
  for (auto& H : scaled.H) H *= 3.0;
  const auto a = rqn::solve_subproblem(models_of(q), 2, 2);
  const auto b = rqn::solve_subproblem(models_of(scaled), 2, 2);
  EXPECT_NEAR((a.s - b.s).norm(), 0.0, 1e-8);
  EXPECT_NEAR(b.theta, 3.0 * a.theta, 1e-9);
}

TEST(Subproblem, KktResidualOfSolutionIsSmall) {
  std::mt19937_64 gen(21);
  const auto q = oracle::random_instance(gen, 3, 2, 2);
  const auto sol = rqn::solve_subproblem(models_of(q), 2, 2);
  const Vector lambda = sol.lambda.transpose().reshaped();
  EXPECT_LE(rqn::kkt_residual(models_of(q), lambda, sol.s, sol.theta), 1e-8);
  EXPECT_LE(sol.kkt_residual, 1e-8);
}

TEST(Subproblem, KktResidualDetectsSimplexViolation) {
  std::mt19937_64 gen(21);
  const auto q = oracle::random_instance(gen, 3, 2, 2);
  const auto sol = rqn::solve_subproblem(models_of(q), 2, 2);
  Vector lambda = sol.lambda.transpose().reshaped();
  lambda[0] += 1e-3;
  EXPECT_GE(rqn::kkt_residual(models_of(q), lambda, sol.s, sol.theta), 1e-3 - 1e-12);
}

TEST(Subproblem, SimplexProjection) {
  Vector v(3);
  v << 0.5, 0.5, 0.5;
  EXPECT_NEAR((rqn::detail::project_to_simplex(v) - Vector::Constant(3, 1.0 / 3.0)).norm(), 0.0, 1e-15);
  v << 2.0, 0.0, -1.0;
  const Vector p = rqn::detail::project_to_simplex(v);
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  EXPECT_DOUBLE_EQ(p[2], 0.0);
}

TEST(Subproblem, RejectsIndefiniteHessians) {
  rqn::HessianBundle bundle = rqn::HessianBundle::identity(1, 1, 2);
  bundle.at(0, 0)(1, 1) = -1.0;
  EXPECT_THROW(bundle.validate(), rqn::InvariantViolation);
}

TEST(Subproblem, ExampleOneStartPoint) {
  // Independent convex solve of this instance gives (-0.0138342, 0.0075247)
  // with optimal value -7.781e-3.
  const auto& tp1 = rqn::get_problem("TP1");
  Vector x0(2);
  x0 << 1.10203444, 1.93225526;
  auto eval = rqn::evaluate_robust(tp1, x0);
  rqn::fill_gradients(tp1, eval);
  auto bundle = rqn::HessianBundle::identity(2, 2, 2);
  bundle.at(0, 0) << 0.15716692, 0.08803005, 0.08803005, 0.0844797;
  bundle.at(0, 1) << 5.02235556, 1.7801104, 1.7801104, 8.00564985;
  bundle.at(1, 0) << 44.14712932, -9.00388107, -9.00388107, 1.85298502;
  bundle.at(1, 1) << 91.45875562, -26.67973288, -26.67973288, 7.78744484;
  const auto sol = rqn::solve_subproblem(eval, bundle);
  EXPECT_NEAR(sol.s[0], -0.0138342, 1e-6);
  EXPECT_NEAR(sol.s[1], 0.0075247, 1e-6);
  EXPECT_NEAR(sol.theta, -7.781e-3, 1e-6);
  EXPECT_LE(rqn::kkt_residual(eval, bundle, sol), 1e-9);
}

}  // namespace
