#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rqn/hessian.hpp"
#include "rqn/problems.hpp"

namespace {

using rqn::Matrix;
using rqn::Vector;

Vector e(std::size_t n, std::size_t k, double scale = 1.0) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(n));
  v[static_cast<Eigen::Index>(k)] = scale;
  return v;
}

TEST(Hessian, SigmaIsOneWhenCurvatureIsAmple) {
  const Matrix H = Matrix::Identity(2, 2);
  const Vector u = e(2, 0);
  EXPECT_DOUBLE_EQ(rqn::damping_sigma(u, u, H), 1.0);
}

TEST(Hessian, SigmaBoundaryBelongsToUndampedCase) {
  const Matrix H = Matrix::Identity(2, 2);
  EXPECT_DOUBLE_EQ(rqn::damping_sigma(e(2, 0), e(2, 0, 0.2), H), 1.0);
}

TEST(Hessian, SigmaWithZeroCurvature) {
  const Matrix H = Matrix::Identity(2, 2);
  const Vector u = e(2, 0);
  const Vector p = e(2, 1);
  const double sigma = rqn::damping_sigma(u, p, H);
  EXPECT_DOUBLE_EQ(sigma, 0.8);
  const auto rec = rqn::damped_bfgs_update(H, u, p);
  EXPECT_NEAR(rec.u_eta, 0.2, 1e-15);
}

TEST(Hessian, CoordinateUpdateDoublesOneEntry) {
  const auto rec = rqn::damped_bfgs_update(Matrix::Identity(3, 3), e(3, 0), e(3, 0, 2.0));
  Matrix expected = Matrix::Identity(3, 3);
  expected(0, 0) = 2.0;
  EXPECT_FALSE(rec.skipped);
  EXPECT_NEAR((rec.H - expected).norm(), 0.0, 1e-15);
}

TEST(Hessian, UndampedCaseIsClassicalBfgs) {
  std::mt19937_64 gen(3);
  const Matrix H = oracle::random_spd(3, gen);
  Vector u(3), p(3);
  u << 0.3, -0.2, 0.1;
  p = 2.0 * u + Vector::Constant(3, 0.01);
  ASSERT_GE(u.dot(p), 0.2 * u.dot(H * u));
  const Matrix classical = H - (H * u) * (H * u).transpose() / u.dot(H * u) + p * p.transpose() / u.dot(p);
  const auto rec = rqn::damped_bfgs_update(H, u, p);
  EXPECT_DOUBLE_EQ(rec.sigma, 1.0);
  EXPECT_NEAR((rec.H - classical).norm(), 0.0, 1e-12);
}

TEST(Hessian, RandomUpdatesKeepSecantCurvatureAndDefiniteness) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 500; ++trial) {
    const Matrix H = oracle::random_spd(3, gen);
    Vector u(3), p(3);
    for (int d = 0; d < 3; ++d) u[d] = normal(gen), p[d] = normal(gen);
    const auto rec = rqn::damped_bfgs_update(H, u, p);
    ASSERT_FALSE(rec.skipped);
    EXPECT_LE((rec.H * u - rec.eta).norm(), 1e-8 * (1.0 + rec.eta.norm()));
    EXPECT_GE(rec.u_eta, 0.2 * rec.uHu * (1.0 - 1e-10));
    EXPECT_EQ(Eigen::LLT<Matrix>(rec.H).info(), Eigen::Success);
    EXPECT_NEAR((rec.H - rec.H.transpose()).norm(), 0.0, 0.0);
  }
}

TEST(Hessian, ZeroDisplacementSkipsEveryPair) {
  const auto& tp1 = rqn::get_problem("TP1");
  Vector x(2);
  x << 0.3, 0.7;
  auto eval = rqn::evaluate_robust(tp1, x);
  rqn::fill_gradients(tp1, eval);
  const auto bundle = rqn::HessianBundle::identity(2, 2, 2);
  const auto out = rqn::update_bundle(bundle, x, x, eval, eval);
  for (const auto& r : out.records) EXPECT_TRUE(r.skipped);
  for (std::size_t a = 0; a < bundle.size(); ++a) EXPECT_EQ(out.bundle.H[a], bundle.H[a]);
}

TEST(Hessian, SinglePairBundleMatchesSingleUpdate) {
  rqn::Kernel k = [](std::size_t, const Vector&, const Vector& x) { return std::pow(x[0], 4) + x[0] * x[1] + x[1] * x[1]; };
  rqn::UncertainProblem P("one", 2, 1, {Vector::Zero(1)}, k, nullptr, Vector::Constant(2, -5), Vector::Constant(2, 5));
  Vector x0(2), x1(2);
  x0 << 1.0, 1.0;
  x1 << 0.5, 0.8;
  auto a = rqn::evaluate_robust(P, x0);
  auto b = rqn::evaluate_robust(P, x1);
  rqn::fill_gradients(P, a);
  rqn::fill_gradients(P, b);
  const auto bundle = rqn::HessianBundle::identity(1, 1, 2);
  const auto out = rqn::update_bundle(bundle, x0, x1, a, b);
  const auto single = rqn::damped_bfgs_update(bundle.H[0], x1 - x0, b.gradient(0, 0) - a.gradient(0, 0));
  EXPECT_EQ(out.bundle.H[0], single.H);
}

TEST(Hessian, ExampleOneUpdateReproducesPrintedMatrices) {
  const auto& tp1 = rqn::get_problem("TP1");
  Vector x0(2), x1(2);
  x0 << 1.10203444, 1.93225526;
  x1 << 1.09554636, 1.94168003;
  auto a = rqn::evaluate_robust(tp1, x0);
  auto b = rqn::evaluate_robust(tp1, x1);
  rqn::fill_gradients(tp1, a);
  rqn::fill_gradients(tp1, b);
  auto bundle = rqn::HessianBundle::identity(2, 2, 2);
  bundle.at(0, 0) << 0.15716692, 0.08803005, 0.08803005, 0.0844797;
  bundle.at(0, 1) << 5.02235556, 1.7801104, 1.7801104, 8.00564985;
  bundle.at(1, 0) << 44.14712932, -9.00388107, -9.00388107, 1.85298502;
  bundle.at(1, 1) << 91.45875562, -26.67973288, -26.67973288, 7.78744484;
  const auto out = rqn::update_bundle(bundle, x0, x1, a, b);
  Matrix printed(2, 2);
  printed << 0.0352717, 0.02121372, 0.02121372, 0.06300125;
  EXPECT_NEAR((out.bundle.at(0, 0) - printed).lpNorm<Eigen::Infinity>(), 0.0, 1e-3);
  printed << 3.18805989, 1.47432974, 1.47432974, 9.75153934;
  EXPECT_NEAR((out.bundle.at(0, 1) - printed).lpNorm<Eigen::Infinity>(), 0.0, 1e-3);
  printed << 43.57305567, -8.82511574, -8.82511574, 1.80401205;
  EXPECT_NEAR((out.bundle.at(1, 0) - printed).lpNorm<Eigen::Infinity>(), 0.0, 1e-3);
  printed << 89.91329472, -26.32939674, -26.32939674, 7.71467964;
  EXPECT_NEAR((out.bundle.at(1, 1) - printed).lpNorm<Eigen::Infinity>(), 0.0, 1e-3);
}

TEST(Hessian, IllConditionedResultIsSkipped) {
  Matrix H = Matrix::Identity(2, 2);
  const Vector u = e(2, 0, 1e-7);
  const Vector p = e(2, 0, 1e-7 * 1e13);
  const auto rec = rqn::damped_bfgs_update(H, u, p);
  EXPECT_TRUE(rec.skipped);
  EXPECT_TRUE(rec.ill_conditioned);
  EXPECT_EQ(rec.H, H);
}

}  // namespace
