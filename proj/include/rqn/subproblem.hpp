#pragma once

// Direction-finding subproblem
//
//   min_{t, s} t   s.t.  zeta_j(x,xi_i) + g_ji^T s + 1/2 s^T H_ji s - F_j(x) <= t   for all (j, i)
//
// solved through its concave dual over the unit simplex
//
//   phi(lambda) = sum lambda_a c_a - 1/2 gbar^T Hbar^{-1} gbar,
//   gbar = sum lambda_a g_a,  Hbar = sum lambda_a H_a,  s(lambda) = -Hbar^{-1} gbar.
//
// d phi / d lambda_a is the a-th constraint value at s(lambda), so theta is the
// largest gradient entry and phi = lambda^T grad.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "rqn/robust_model.hpp"

namespace rqn {

/// One symmetric positive-definite approximation H_j(x, xi_i) per (objective, scenario) pair.
struct HessianBundle {
  std::size_t m = 0;
  std::size_t p = 0;
  std::size_t n = 0;
  std::vector<Matrix> H;  // index j * p + i

  static HessianBundle identity(std::size_t m, std::size_t p, std::size_t n) {
    HessianBundle b{m, p, n, {}};
    b.H.assign(m * p, Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
    return b;
  }

  Matrix& at(std::size_t j, std::size_t i) { return H.at(j * p + i); }
  const Matrix& at(std::size_t j, std::size_t i) const { return H.at(j * p + i); }
  std::size_t size() const { return H.size(); }

  /// Throws InvariantViolation unless every matrix is symmetric and Cholesky-factorisable.
  void validate() const {
    if (H.size() != m * p) throw InvariantViolation("Hessian bundle holds " + std::to_string(H.size()) +
                                                    " matrices, expected m*p=" + std::to_string(m * p));
    for (std::size_t a = 0; a < H.size(); ++a) {
      const Matrix& h = H[a];
      const std::string where = "H(" + std::to_string(a / p + 1) + "," + std::to_string(a % p + 1) + ")";
      if (h.rows() != static_cast<Eigen::Index>(n) || h.cols() != static_cast<Eigen::Index>(n))
        throw InvariantViolation(where + " has wrong shape");
      if (!h.allFinite()) throw InvariantViolation(where + " is not finite");
      const double scale = std::max(h.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
      if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InvariantViolation(where + " is not symmetric");
      Eigen::LLT<Matrix> llt(h);
      if (llt.info() != Eigen::Success) throw InvariantViolation(where + " is not positive definite");
    }
  }
};

struct SubproblemOptions {
  double tol_dual = 1e-10;
  std::size_t max_dual_iter = 10000;
};

struct SubproblemSolution {
  Vector s;
  double theta = 0.0;
  Matrix lambda;  // m x p, on the unit simplex
  double kkt_residual = 0.0;
  std::size_t dual_iterations = 0;
  double dual_value = 0.0;  // phi(lambda)
};

class SubproblemNonconvergence : public Error {
 public:
  SubproblemNonconvergence(const std::string& what, SubproblemSolution best)
      : Error("subproblem", what), best_(std::move(best)) {}
  const SubproblemSolution& best() const noexcept { return best_; }

 private:
  SubproblemSolution best_;
};

/// The quadratic models c_a + g_a^T s + 1/2 s^T H_a s, flattened over a = j*p + i.
struct QuadraticModels {
  std::size_t n = 0;
  Vector c;
  std::vector<Vector> g;
  std::vector<Matrix> H;

  std::size_t size() const { return g.size(); }

  double constraint(std::size_t a, const Vector& s) const {
    return c[static_cast<Eigen::Index>(a)] + g[a].dot(s) + 0.5 * s.dot(H[a] * s);
  }

  /// Magnitude of the data; tolerances scale with 1 + this value.
  double scale() const {
    double out = max_abs(c);
    for (const auto& v : g) out = std::max(out, max_abs(v));
    return out;
  }
};

inline QuadraticModels make_models(const RobustEvaluation& eval, const HessianBundle& bundle) {
  const auto m = eval.m();
  const auto p = eval.p();
  if (!eval.has_gradients()) throw InvariantViolation("subproblem needs gradients for every (j, i) pair");
  if (bundle.m != m || bundle.p != p || bundle.H.size() != m * p ||
      bundle.n != static_cast<std::size_t>(eval.x.size()))
    throw InvariantViolation("Hessian bundle dimensions do not match the evaluation");
  QuadraticModels models;
  models.n = static_cast<std::size_t>(eval.x.size());
  models.c.resize(static_cast<Eigen::Index>(m * p));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < p; ++i) {
      const auto a = j * p + i;
      models.c[static_cast<Eigen::Index>(a)] =
          eval.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) - eval.F[static_cast<Eigen::Index>(j)];
      models.g.push_back(eval.gradient(j, i));
      models.H.push_back(bundle.H[a]);
    }
  }
  return models;
}

/// Largest violation of the KKT system (simplex, sign, stationarity, feasibility,
/// complementary slackness) at (lambda, s, t).
inline double kkt_residual(const QuadraticModels& models, const Vector& lambda, const Vector& s, double t) {
  double r = std::abs(lambda.sum() - 1.0);
  Vector stationarity = Vector::Zero(static_cast<Eigen::Index>(models.n));
  for (std::size_t a = 0; a < models.size(); ++a) {
    const double l = lambda[static_cast<Eigen::Index>(a)];
    r = std::max(r, -l);
    stationarity += l * (models.g[a] + models.H[a] * s);
    const double slack = models.constraint(a, s) - t;
    r = std::max(r, std::max(0.0, slack));
    r = std::max(r, std::abs(l * slack));
  }
  return std::max(r, max_abs(stationarity));
}

inline double kkt_residual(const RobustEvaluation& eval, const HessianBundle& bundle, const SubproblemSolution& sol) {
  const QuadraticModels models = make_models(eval, bundle);
  return kkt_residual(models, sol.lambda.transpose().reshaped(), sol.s, sol.theta);
}

namespace detail {

/// Euclidean projection onto the unit simplex (sort-based).
inline Vector project_to_simplex(const Vector& v) {
  const auto k = v.size();
  std::vector<double> sorted(v.data(), v.data() + k);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (Eigen::Index r = 0; r < k; ++r) {
    cumulative += sorted[static_cast<std::size_t>(r)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(r + 1);
    if (sorted[static_cast<std::size_t>(r)] - candidate > 0.0) shift = candidate;
  }
  return (v.array() - shift).max(0.0).matrix();
}

struct DualPoint {
  Vector lambda;
  Matrix hbar;
  Eigen::LLT<Matrix> llt;
  Vector s;
  Vector grad;  // constraint values at s(lambda)
  double phi = 0.0;
  double theta = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  double magnitude = 0.0;  // max(|theta|, max_a |H_a s|_inf)
};

class DualSolver {
 public:
  explicit DualSolver(const QuadraticModels& models) : models_(models) {}

  DualPoint evaluate(const Vector& lambda) const {
    DualPoint pt;
    pt.lambda = lambda;
    const auto n = static_cast<Eigen::Index>(models_.n);
    pt.hbar = Matrix::Zero(n, n);
    Vector gbar = Vector::Zero(n);
    for (std::size_t a = 0; a < models_.size(); ++a) {
      const double l = lambda[static_cast<Eigen::Index>(a)];
      if (l == 0.0) continue;
      pt.hbar += l * models_.H[a];
      gbar += l * models_.g[a];
    }
    pt.llt.compute(pt.hbar);
    if (pt.llt.info() != Eigen::Success)
      throw InvariantViolation("Cholesky of the aggregated Hessian failed; bundle is not positive definite");
    pt.s = -pt.llt.solve(gbar);
    pt.grad.resize(static_cast<Eigen::Index>(models_.size()));
    for (std::size_t a = 0; a < models_.size(); ++a) pt.grad[static_cast<Eigen::Index>(a)] = models_.constraint(a, pt.s);
    pt.phi = lambda.dot(pt.grad);
    pt.theta = pt.grad.maxCoeff();
    pt.residual = kkt_residual(models_, lambda, pt.s, pt.theta);
    pt.magnitude = std::abs(pt.theta);
    for (std::size_t a = 0; a < models_.size(); ++a)
      pt.magnitude = std::max(pt.magnitude, (models_.H[a] * pt.s).lpNorm<Eigen::Infinity>());
    return pt;
  }

  /// Primal-dual Newton iteration on the KKT system restricted to a working set
  /// A of constraints: unknowns (s, t, lambda_A) with
  ///   sum_A lambda_a (g_a + H_a s) = 0,  q_a(s) = t (a in A),  sum_A lambda_a = 1.
  /// A blocking ratio test drops indices whose weight reaches zero and violated
  /// constraints outside A are added. The result is re-evaluated through the dual
  /// map, so s, theta and the residual are those of the returned lambda.
  std::optional<DualPoint> polish(const DualPoint& start) const {
    const auto K = static_cast<Eigen::Index>(models_.size());
    const auto n = static_cast<Eigen::Index>(models_.n);
    std::vector<bool> in(static_cast<std::size_t>(K), false);
    for (Eigen::Index a = 0; a < K; ++a) in[static_cast<std::size_t>(a)] = start.lambda[a] > 0.0;

    Vector lambda = start.lambda;
    Vector s = start.s;
    double t = start.phi;
    const double floor = tolerance_floor();

    for (int iter = 0; iter < 60; ++iter) {
      std::vector<Eigen::Index> A;
      for (Eigen::Index a = 0; a < K; ++a)
        if (in[static_cast<std::size_t>(a)]) A.push_back(a);
      const auto k = static_cast<Eigen::Index>(A.size());
      if (k == 0) return std::nullopt;

      Matrix hbar = Matrix::Zero(n, n);
      Matrix B(n, k);
      Vector q(k);
      for (Eigen::Index r = 0; r < k; ++r) {
        const auto a = static_cast<std::size_t>(A[static_cast<std::size_t>(r)]);
        hbar += lambda[A[static_cast<std::size_t>(r)]] * models_.H[a];
        B.col(r) = models_.g[a] + models_.H[a] * s;
        q[r] = models_.constraint(a, s);
      }
      Vector lam_A(k);
      for (Eigen::Index r = 0; r < k; ++r) lam_A[r] = lambda[A[static_cast<std::size_t>(r)]];

      const Eigen::Index N = n + k + 1;
      Vector G(N);
      G.head(n) = B * lam_A;
      G.segment(n, k) = (q.array() - t).matrix();
      G[N - 1] = lam_A.sum() - 1.0;

      if (G.cwiseAbs().maxCoeff() <= floor) {
        // Face solved: add the most violated outside constraint, if any.
        Eigen::Index worst = -1;
        double violation = floor;
        for (Eigen::Index a = 0; a < K; ++a) {
          if (in[static_cast<std::size_t>(a)]) continue;
          const double v = models_.constraint(static_cast<std::size_t>(a), s) - t;
          if (v > violation) violation = v, worst = a;
        }
        if (worst < 0) break;
        in[static_cast<std::size_t>(worst)] = true;
        lambda[worst] = 0.0;
        continue;
      }

      Matrix J = Matrix::Zero(N, N);
      J.topLeftCorner(n, n) = hbar;
      J.block(0, n, n, k) = B;
      J.block(n, 0, k, n) = B.transpose();
      J.block(n, n + k, k, 1).setConstant(-1.0);
      J.block(N - 1, n, 1, k).setConstant(1.0);
      const Vector delta = J.completeOrthogonalDecomposition().solve(-G);
      if (!delta.allFinite()) return std::nullopt;

      double tau = 1.0;
      Eigen::Index blocking = -1;
      for (Eigen::Index r = 0; r < k; ++r) {
        const double d = delta[n + r];
        if (d < 0.0 && lam_A[r] + tau * d < 0.0) {
          tau = -lam_A[r] / d;
          blocking = r;
        }
      }
      s += tau * delta.head(n);
      t += tau * delta[N - 1];
      for (Eigen::Index r = 0; r < k; ++r) lambda[A[static_cast<std::size_t>(r)]] = std::max(0.0, lam_A[r] + tau * delta[n + r]);
      if (blocking >= 0) {
        lambda[A[static_cast<std::size_t>(blocking)]] = 0.0;
        in[static_cast<std::size_t>(A[static_cast<std::size_t>(blocking)])] = false;
      }
    }
    const double total = lambda.sum();
    if (!(total > 0.0) || !lambda.allFinite()) return std::nullopt;
    return evaluate(lambda / total);
  }

  double tolerance_floor() const { return 1e-14 * (1.0 + models_.scale()); }

 private:
  const QuadraticModels& models_;
};

/// Primal-dual interior-point solve of min t s.t. q_a(s) - t <= 0, started from
/// the strictly feasible point s = 0, t = max c_a + 1. Returns the multipliers
/// normalised to the simplex, or nullopt when the iteration breaks down.
inline std::optional<Vector> interior_point(const QuadraticModels& models, double tol, std::size_t max_iter,
                                            std::size_t& iterations) {
  const auto K = static_cast<Eigen::Index>(models.size());
  const auto n = static_cast<Eigen::Index>(models.n);
  const Eigen::Index nz = n + 1;
  const Eigen::Index N = nz + K;

  Vector s = Vector::Zero(n);
  double t = models.c.maxCoeff() + 1.0;
  Vector lambda = Vector::Constant(K, 1.0 / static_cast<double>(K));

  auto constraints = [&](const Vector& sv, double tv) {
    Vector f(K);
    for (Eigen::Index a = 0; a < K; ++a) f[a] = models.constraint(static_cast<std::size_t>(a), sv) - tv;
    return f;
  };
  auto residual = [&](const Vector& sv, const Vector& lam, const Vector& f, double mu_inv) {
    Vector r(N);
    Vector grad_s = Vector::Zero(n);
    for (Eigen::Index a = 0; a < K; ++a)
      grad_s += lam[a] * (models.g[static_cast<std::size_t>(a)] + models.H[static_cast<std::size_t>(a)] * sv);
    r.head(n) = grad_s;
    r[n] = 1.0 - lam.sum();
    r.tail(K) = (-lam.array() * f.array() - mu_inv).matrix();
    return r;
  };

  constexpr double kCentering = 10.0;
  Vector f = constraints(s, t);
  for (std::size_t it = 0; it < max_iter; ++it) {
    ++iterations;
    const double gap = -f.dot(lambda);
    const double mu_inv = gap / (kCentering * static_cast<double>(K));
    const Vector r = residual(s, lambda, f, mu_inv);
    const double dual_norm = r.head(nz).cwiseAbs().maxCoeff();
    if (gap <= tol && dual_norm <= tol) return Vector(lambda / lambda.sum());

    Matrix J = Matrix::Zero(N, N);
    for (Eigen::Index a = 0; a < K; ++a) {
      const auto aa = static_cast<std::size_t>(a);
      const Vector b = models.g[aa] + models.H[aa] * s;
      J.topLeftCorner(n, n) += lambda[a] * models.H[aa];
      J.block(0, nz + a, n, 1) = b;
      J(n, nz + a) = -1.0;
      J.block(nz + a, 0, 1, n) = -lambda[a] * b.transpose();
      J(nz + a, n) = lambda[a];
      J(nz + a, nz + a) = -f[a];
    }
    const Vector delta = J.fullPivLu().solve(-r);
    if (!delta.allFinite()) return std::nullopt;
    const Vector ds = delta.head(n);
    const double dt = delta[n];
    const Vector dl = delta.tail(K);

    double step = 1.0;
    for (Eigen::Index a = 0; a < K; ++a)
      if (dl[a] < 0.0) step = std::min(step, -lambda[a] / dl[a]);
    step *= 0.99;
    const double rnorm = r.norm();
    bool accepted = false;
    for (int back = 0; back < 60; ++back, step *= 0.5) {
      const Vector s_new = s + step * ds;
      const double t_new = t + step * dt;
      const Vector f_new = constraints(s_new, t_new);
      if ((f_new.array() >= 0.0).any()) continue;
      const Vector l_new = lambda + step * dl;
      if (residual(s_new, l_new, f_new, mu_inv).norm() <= (1.0 - 0.01 * step) * rnorm) {
        s = s_new;
        t = t_new;
        lambda = l_new;
        f = f_new;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (!lambda.allFinite() || !(lambda.sum() > 0.0)) return std::nullopt;
  return Vector(lambda / lambda.sum());
}

}  // namespace detail

/// Dual projected-gradient ascent with backtracking and a Newton step on the
/// identified support; an interior-point solve of the same KKT system takes over
/// when the ascent has not converged after a short budget. Converges when the KKT residual is at most
/// tol_dual * (1 + max(data scale, |theta|, max_a |H_a s|_inf)).
inline SubproblemSolution solve_subproblem(const QuadraticModels& models, std::size_t m, std::size_t p,
                                           const SubproblemOptions& options = {}) {
  const auto k = models.size();
  if (k == 0 || k != m * p) throw InvariantViolation("subproblem needs m*p quadratic models");
  if (!(options.tol_dual > 0.0)) throw ConfigError("tol_dual must be positive");

  // Identical constraints make the dual degenerate; solve with one copy of each
  // and share its multiplier equally among the copies.
  std::vector<std::size_t> representative(k);
  std::vector<std::size_t> distinct;
  for (std::size_t a = 0; a < k; ++a) {
    representative[a] = distinct.size();
    for (std::size_t r = 0; r < distinct.size(); ++r) {
      const auto b = distinct[r];
      if (models.c[static_cast<Eigen::Index>(a)] == models.c[static_cast<Eigen::Index>(b)] && models.g[a] == models.g[b] &&
          models.H[a] == models.H[b]) {
        representative[a] = r;
        break;
      }
    }
    if (representative[a] == distinct.size()) distinct.push_back(a);
  }
  if (distinct.size() < k) {
    QuadraticModels reduced;
    reduced.n = models.n;
    reduced.c.resize(static_cast<Eigen::Index>(distinct.size()));
    for (std::size_t r = 0; r < distinct.size(); ++r) {
      reduced.c[static_cast<Eigen::Index>(r)] = models.c[static_cast<Eigen::Index>(distinct[r])];
      reduced.g.push_back(models.g[distinct[r]]);
      reduced.H.push_back(models.H[distinct[r]]);
    }
    auto expand = [&](SubproblemSolution sol) {
      std::vector<double> copies(distinct.size(), 0.0);
      for (auto r : representative) copies[r] += 1.0;
      Vector lambda(static_cast<Eigen::Index>(k));
      for (std::size_t a = 0; a < k; ++a)
        lambda[static_cast<Eigen::Index>(a)] = sol.lambda(0, static_cast<Eigen::Index>(representative[a])) / copies[representative[a]];
      sol.kkt_residual = kkt_residual(models, lambda, sol.s, sol.theta);
      sol.lambda = lambda.reshaped(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m)).transpose();
      return sol;
    };
    try {
      return expand(solve_subproblem(reduced, 1, distinct.size(), options));
    } catch (const SubproblemNonconvergence& e) {
      throw SubproblemNonconvergence(e.what(), expand(e.best()));
    }
  }

  const detail::DualSolver dual(models);
  const double data_scale = models.scale();
  auto tol_at = [&](const detail::DualPoint& pt) { return options.tol_dual * (1.0 + std::max(data_scale, pt.magnitude)); };
  auto unconverged = [&](const detail::DualPoint& pt) { return pt.residual > tol_at(pt); };

  detail::DualPoint current = dual.evaluate(Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k)));
  detail::DualPoint best = current;
  double step = 1.0;
  std::size_t iterations = 0;
  std::size_t stalled = 0;
  std::vector<bool> last_support;

  auto support_of = [](const Vector& lambda) {
    std::vector<bool> out(static_cast<std::size_t>(lambda.size()));
    for (Eigen::Index a = 0; a < lambda.size(); ++a) out[static_cast<std::size_t>(a)] = lambda[a] > 0.0;
    return out;
  };

  // Projected-gradient ascent until `limit` total iterations; false when it stalls.
  auto ascend = [&](std::size_t limit) {
    while (unconverged(best) && iterations < limit) {
      ++iterations;

      // Polish whenever the support has settled for a couple of iterations.
      const auto support = support_of(current.lambda);
      if (support == last_support) ++stalled; else stalled = 0;
      last_support = support;
      if (stalled == 2 || (stalled > 2 && stalled % 25 == 0)) {
        if (auto polished = dual.polish(current); polished && polished->residual < current.residual) {
          current = *polished;
          if (current.residual < best.residual) best = current;
          if (!unconverged(best)) break;
        }
      }

      bool moved = false;
      for (int backtrack = 0; backtrack < 60; ++backtrack) {
        const Vector candidate = detail::project_to_simplex(current.lambda + step * current.grad);
        const Vector d = candidate - current.lambda;
        const double dd = d.squaredNorm();
        if (dd == 0.0) break;
        detail::DualPoint next = dual.evaluate(candidate);
        const double model = current.phi + current.grad.dot(d) - dd / (2.0 * step);
        if (next.phi >= model - 1e-15 * (1.0 + std::abs(current.phi))) {
          current = std::move(next);
          step *= 2.0;
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (current.residual < best.residual) best = current;
      if (!moved) {
        if (auto polished = dual.polish(current); polished && polished->residual < best.residual) best = *polished;
        return false;
      }
    }
    return true;
  };

  constexpr std::size_t kAscentBudget = 100;
  ascend(std::min(options.max_dual_iter, kAscentBudget));
  if (unconverged(best) && iterations < options.max_dual_iter) {
    // Ill-conditioned or degenerate duals: finish with the interior-point method.
    const double ipm_tol = 1e-3 * tol_at(best);
    if (auto lambda = detail::interior_point(models, ipm_tol, options.max_dual_iter - iterations, iterations)) {
      detail::DualPoint candidate = dual.evaluate(*lambda);
      if (candidate.residual < best.residual) best = candidate;
      if (unconverged(best)) {
        if (auto polished = dual.polish(best); polished && polished->residual < best.residual) best = *polished;
      }
    }
  }
  if (unconverged(best) && iterations < options.max_dual_iter) {
    current = best;
    ascend(options.max_dual_iter);
  }

  SubproblemSolution sol;
  sol.s = best.s;
  sol.theta = best.theta;
  sol.lambda = best.lambda.reshaped(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m)).transpose();
  sol.kkt_residual = best.residual;
  sol.dual_iterations = iterations;
  sol.dual_value = best.phi;
  if (unconverged(best)) {
    throw SubproblemNonconvergence("dual ascent stopped after " + std::to_string(iterations) +
                                       " iterations with KKT residual " + std::to_string(best.residual),
                                   sol);
  }
  // s = 0 is feasible with value max_a c_a; keep it when rounding left the iterate above it.
  const double theta_zero = models.c.maxCoeff();
  if (sol.theta > theta_zero) {
    sol.s.setZero();
    sol.theta = theta_zero;
    sol.kkt_residual = kkt_residual(models, best.lambda, sol.s, sol.theta);
  }
  return sol;
}

inline SubproblemSolution solve_subproblem(const RobustEvaluation& eval, const HessianBundle& bundle,
                                           const SubproblemOptions& options = {}) {
  return solve_subproblem(make_models(eval, bundle), eval.m(), eval.p(), options);
}

}  // namespace rqn
