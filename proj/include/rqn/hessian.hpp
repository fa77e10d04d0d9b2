#pragma once

// Damped BFGS update of the m*p Hessian approximations:
//
//   eta   = sigma p + (1 - sigma) H u
//   H_new = H - H u u^T H / (u^T H u) + eta eta^T / (u^T eta)

#include <cmath>
#include <vector>

#include "rqn/subproblem.hpp"

namespace rqn {

inline constexpr double kCurvatureFactor = 0.2;

/// Updates whose result exceeds this spectral condition number are skipped.
inline constexpr double kMaxCondition = 1e12;

/// sigma = 1 when u^T p >= 0.2 u^T H u, else 0.8 u^T H u / (u^T H u - u^T p).
inline double damping_sigma(const Vector& u, const Vector& p_vec, const Matrix& H) {
  const double uHu = u.dot(H * u);
  const double up = u.dot(p_vec);
  if (!(uHu > 0.0)) throw InvariantViolation("damping needs u^T H u > 0");
  if (up >= kCurvatureFactor * uHu) return 1.0;
  return (1.0 - kCurvatureFactor) * uHu / (uHu - up);
}

/// Outcome of one damped update, with the quantities its invariants are stated in.
struct UpdateRecord {
  Matrix H;
  bool skipped = false;
  bool cholesky_ok = true;
  bool ill_conditioned = false;
  double sigma = 1.0;
  Vector eta;
  double u_eta = 0.0;
  double uHu = 0.0;
  double secant_residual = 0.0;  // ||H_new u - eta||_2
};

inline double skip_tolerance(const Vector& x) { return 1e-14 * (1.0 + x.norm()); }

/// Returns H unchanged with skipped=true when ||u|| <= skip_tol, when the
/// updated matrix fails Cholesky, or when its condition number exceeds kMaxCondition.
inline UpdateRecord damped_bfgs_update(const Matrix& H, const Vector& u, const Vector& p_vec, double skip_tol = 0.0) {
  UpdateRecord rec;
  rec.H = H;
  if (!(u.norm() > skip_tol) || u.isZero(0.0)) {
    rec.skipped = true;
    return rec;
  }
  const Vector Hu = H * u;
  rec.uHu = u.dot(Hu);
  if (!(rec.uHu > 0.0) || !p_vec.allFinite()) {
    rec.skipped = true;
    return rec;
  }
  rec.sigma = damping_sigma(u, p_vec, H);
  rec.eta = rec.sigma * p_vec + (1.0 - rec.sigma) * Hu;
  rec.u_eta = u.dot(rec.eta);
  if (!(rec.u_eta > 0.0)) {
    rec.skipped = true;
    return rec;
  }
  Matrix next = H - (Hu * Hu.transpose()) / rec.uHu + (rec.eta * rec.eta.transpose()) / rec.u_eta;
  next = 0.5 * (next + next.transpose()).eval();
  Eigen::LLT<Matrix> llt(next);
  if (llt.info() != Eigen::Success || !next.allFinite()) {
    rec.skipped = true;
    rec.cholesky_ok = false;
    return rec;
  }
  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(next, Eigen::EigenvaluesOnly).eigenvalues();
  if (!(eig[0] > 0.0) || eig[eig.size() - 1] > kMaxCondition * eig[0]) {
    rec.skipped = true;
    rec.ill_conditioned = true;
    return rec;
  }
  rec.H = std::move(next);
  rec.secant_residual = (rec.H * u - rec.eta).norm();
  return rec;
}

struct BundleUpdate {
  HessianBundle bundle;
  std::vector<UpdateRecord> records;  // per pair, index j * p + i

  std::vector<double> sigmas() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.sigma);
    return out;
  }
};

/// Applies damped_bfgs_update to every pair with the shared displacement
/// u = x_new - x_old and per-pair gradient differences.
inline BundleUpdate update_bundle(const HessianBundle& bundle, const Vector& x_old, const Vector& x_new,
                                  const RobustEvaluation& eval_old, const RobustEvaluation& eval_new) {
  if (!eval_old.has_gradients() || !eval_new.has_gradients())
    throw InvariantViolation("bundle update needs gradients at both points");
  const Vector u = x_new - x_old;
  const double tol = skip_tolerance(x_new);
  BundleUpdate out;
  out.bundle = bundle;
  out.records.reserve(bundle.size());
  for (std::size_t j = 0; j < bundle.m; ++j) {
    for (std::size_t i = 0; i < bundle.p; ++i) {
      const Vector p_vec = eval_new.gradient(j, i) - eval_old.gradient(j, i);
      UpdateRecord rec = damped_bfgs_update(bundle.at(j, i), u, p_vec, tol);
      out.bundle.at(j, i) = rec.H;
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace rqn
