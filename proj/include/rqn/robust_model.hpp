#pragma once

// Uncertain multiobjective problems over a finite scenario set and their
// objective-wise worst-case counterpart F_j(x) = max_i zeta_j(x, xi_i).

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rqn/types.hpp"

namespace rqn {

/// Kernel value zeta_j(x, xi): objective index, scenario vector, decision vector.
using Kernel = std::function<double(std::size_t, const Vector&, const Vector&)>;
/// Analytic gradient of zeta_j(., xi) with respect to x.
using KernelGradient = std::function<Vector(std::size_t, const Vector&, const Vector&)>;

enum class GradientMode { analytic, forward_difference };

inline const char* to_string(GradientMode mode) {
  return mode == GradientMode::analytic ? "analytic" : "forward-difference";
}

/// Relative forward-difference step, sqrt of machine epsilon.
inline const double kFiniteDifferenceStep = std::sqrt(std::numeric_limits<double>::epsilon());

/// Thrown when a kernel (or its difference quotient) is NaN or infinite.
class EvaluationError : public Error {
 public:
  EvaluationError(std::size_t objective, std::size_t scenario, const Vector& x, const std::string& detail)
      : Error("evaluation", "non-finite " + detail + " for objective " + std::to_string(objective + 1) +
                                ", scenario " + std::to_string(scenario + 1) + " at x=" + format_vector(x)),
        objective_(objective),
        scenario_(scenario),
        x_(x) {}

  std::size_t objective() const noexcept { return objective_; }
  std::size_t scenario() const noexcept { return scenario_; }
  const Vector& x() const noexcept { return x_; }

 private:
  std::size_t objective_;
  std::size_t scenario_;
  Vector x_;
};

/// The family P(U): m objective kernels, p scenarios and box bounds. Immutable
/// after construction and safe to share between threads.
class UncertainProblem {
 public:
  UncertainProblem(std::string name, std::size_t n, std::size_t m, std::vector<Vector> scenarios, Kernel kernel,
                   KernelGradient analytic_gradient, Vector lb, Vector ub)
      : name_(std::move(name)),
        n_(n),
        m_(m),
        scenarios_(std::move(scenarios)),
        kernel_(std::move(kernel)),
        gradient_(std::move(analytic_gradient)),
        lb_(std::move(lb)),
        ub_(std::move(ub)) {
    if (n_ == 0 || m_ == 0 || scenarios_.empty())
      throw ConfigError("problem '" + name_ + "': n, m and the scenario count must all be positive");
    if (!kernel_) throw ConfigError("problem '" + name_ + "': kernel is required");
    if (static_cast<std::size_t>(lb_.size()) != n_ || static_cast<std::size_t>(ub_.size()) != n_)
      throw ConfigError("problem '" + name_ + "': bounds must have dimension n=" + std::to_string(n_));
    for (std::size_t d = 0; d < n_; ++d) {
      if (!(lb_[d] < ub_[d]))
        throw ConfigError("problem '" + name_ + "': lb < ub violated in coordinate " + std::to_string(d + 1));
    }
  }

  const std::string& name() const noexcept { return name_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t p() const noexcept { return scenarios_.size(); }
  const std::vector<Vector>& scenarios() const noexcept { return scenarios_; }
  const Vector& scenario(std::size_t i) const { return scenarios_.at(i); }
  const Vector& lb() const noexcept { return lb_; }
  const Vector& ub() const noexcept { return ub_; }
  bool has_analytic_gradient() const noexcept { return static_cast<bool>(gradient_); }

  double value(std::size_t j, std::size_t i, const Vector& x) const { return kernel_(j, scenarios_[i], x); }

  Vector analytic_gradient(std::size_t j, std::size_t i, const Vector& x) const {
    if (!gradient_) throw ConfigError("problem '" + name_ + "' has no analytic gradient");
    return gradient_(j, scenarios_[i], x);
  }

  bool in_box(const Vector& x) const {
    return (x.array() >= lb_.array()).all() && (x.array() <= ub_.array()).all();
  }

  Vector midpoint() const { return 0.5 * (lb_ + ub_); }

 private:
  std::string name_;
  std::size_t n_;
  std::size_t m_;
  std::vector<Vector> scenarios_;
  Kernel kernel_;
  KernelGradient gradient_;
  Vector lb_;
  Vector ub_;
};

/// Relative tolerance used for active-set membership at value F_j.
inline double active_tolerance(double F) { return 1e-8 * (1.0 + std::abs(F)); }

/// Worst-case values, active index sets and (lazily) all m*p gradients at one point.
struct RobustEvaluation {
  Vector x;
  Matrix values;                                // m x p, zeta_j(x, xi_i)
  Vector F;                                     // F_j = max_i values(j, i)
  std::vector<std::vector<std::size_t>> active;  // I_j(x), zero-based scenario indices
  std::vector<Vector> gradients;                // j * p + i, empty until fill_gradients
  std::size_t kernel_calls = 0;                 // value calls including difference quotients
  std::size_t analytic_gradient_calls = 0;

  std::size_t m() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(values.cols()); }
  bool has_gradients() const { return !gradients.empty(); }

  const Vector& gradient(std::size_t j, std::size_t i) const {
    if (gradients.empty()) throw InvariantViolation("gradients requested before fill_gradients");
    return gradients[j * p() + i];
  }

  bool is_active(std::size_t j, std::size_t i) const {
    return values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) >= F[static_cast<Eigen::Index>(j)] - active_tolerance(F[static_cast<Eigen::Index>(j)]);
  }
};

/// Evaluates every kernel at x. Gradients are left empty.
inline RobustEvaluation evaluate_robust(const UncertainProblem& problem, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != problem.n())
    throw ConfigError("point has dimension " + std::to_string(x.size()) + ", problem '" + problem.name() +
                      "' expects " + std::to_string(problem.n()));
  if (!x.allFinite()) throw ConfigError("point is not finite: " + format_vector(x));

  const auto m = problem.m();
  const auto p = problem.p();
  RobustEvaluation eval;
  eval.x = x;
  eval.values.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p));
  eval.F.resize(static_cast<Eigen::Index>(m));
  eval.active.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < p; ++i) {
      const double v = problem.value(j, i, x);
      ++eval.kernel_calls;
      if (!std::isfinite(v)) throw EvaluationError(j, i, x, "kernel value");
      eval.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
    eval.F[static_cast<Eigen::Index>(j)] = eval.values.row(static_cast<Eigen::Index>(j)).maxCoeff();
    for (std::size_t i = 0; i < p; ++i) {
      if (eval.is_active(j, i)) eval.active[j].push_back(i);
    }
  }
  return eval;
}

/// Forward difference of zeta_j(., xi_i) at x, reusing the known value at x.
/// Costs exactly n kernel calls, added to *calls when given.
inline Vector forward_difference_gradient(const UncertainProblem& problem, std::size_t j, std::size_t i,
                                          const Vector& x, double value_at_x, std::size_t* calls = nullptr) {
  const auto n = static_cast<Eigen::Index>(problem.n());
  Vector g(n);
  Vector probe = x;
  for (Eigen::Index d = 0; d < n; ++d) {
    const double h = kFiniteDifferenceStep * std::max(1.0, std::abs(x[d]));
    probe[d] = x[d] + h;
    const double step = probe[d] - x[d];  // representable step
    const double shifted = problem.value(j, i, probe);
    probe[d] = x[d];
    g[d] = (shifted - value_at_x) / step;
    if (!std::isfinite(g[d])) throw EvaluationError(j, i, x, "difference quotient");
  }
  if (calls != nullptr) *calls += static_cast<std::size_t>(n);
  return g;
}

/// Gradient of zeta_j(., xi_i): analytic when requested and available, otherwise
/// forward difference.
inline Vector gradient(const UncertainProblem& problem, std::size_t j, std::size_t i, const Vector& x,
                       GradientMode mode = GradientMode::analytic, std::size_t* calls = nullptr) {
  if (mode == GradientMode::analytic && problem.has_analytic_gradient()) {
    Vector g = problem.analytic_gradient(j, i, x);
    if (!g.allFinite()) throw EvaluationError(j, i, x, "analytic gradient");
    return g;
  }
  const double base = problem.value(j, i, x);
  if (!std::isfinite(base)) throw EvaluationError(j, i, x, "kernel value");
  return forward_difference_gradient(problem, j, i, x, base, calls);
}

/// Computes all m*p gradients at eval.x once; later calls are no-ops.
inline void fill_gradients(const UncertainProblem& problem, RobustEvaluation& eval,
                           GradientMode mode = GradientMode::analytic) {
  if (eval.has_gradients()) return;
  const auto m = problem.m();
  const auto p = problem.p();
  std::vector<Vector> grads;
  grads.reserve(m * p);
  const bool analytic = mode == GradientMode::analytic && problem.has_analytic_gradient();
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < p; ++i) {
      if (analytic) {
        Vector g = problem.analytic_gradient(j, i, eval.x);
        ++eval.analytic_gradient_calls;
        if (!g.allFinite()) throw EvaluationError(j, i, eval.x, "analytic gradient");
        grads.push_back(std::move(g));
      } else {
        grads.push_back(forward_difference_gradient(
            problem, j, i, eval.x,
            eval.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)), &eval.kernel_calls));
      }
    }
  }
  eval.gradients = std::move(grads);
}

}  // namespace rqn
