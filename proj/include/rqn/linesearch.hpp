#pragma once

// Armijo-type backtracking along a descent direction of the worst-case vector F:
// accept the largest alpha = 2^-r with F_j(x + alpha s) <= F_j(x) + alpha beta theta
// for every objective and x + alpha s inside the box.

#include <cmath>
#include <string>

#include "rqn/robust_model.hpp"

namespace rqn {

struct LineSearchParams {
  double beta = 1e-4;
  std::size_t r_max = 50;
  bool allow_full_step = true;

  void validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
    if (r_max < 1) throw ConfigError("r_max must be at least 1");
  }
};

struct LineSearchResult {
  double alpha = 0.0;
  RobustEvaluation next;            // evaluation at x + alpha s
  std::size_t trials = 0;           // step sizes tried, including rejected ones outside the box
  std::size_t point_evaluations = 0;  // calls to evaluate_robust
};

class LineSearchFailure : public Error {
 public:
  LineSearchFailure(const std::string& what, double last_alpha, std::size_t point_evaluations)
      : Error("line-search", what), last_alpha_(last_alpha), point_evaluations_(point_evaluations) {}
  double last_alpha() const noexcept { return last_alpha_; }
  std::size_t point_evaluations() const noexcept { return point_evaluations_; }

 private:
  double last_alpha_;
  std::size_t point_evaluations_;
};

/// True when every F_j(trial) <= F_j(x) + alpha * beta * theta.
inline bool armijo_holds(const Vector& F_x, const Vector& F_trial, double alpha, double beta, double theta) {
  for (Eigen::Index j = 0; j < F_x.size(); ++j) {
    if (!(F_trial[j] <= F_x[j] + alpha * beta * theta)) return false;
  }
  return true;
}

inline LineSearchResult armijo_step(const UncertainProblem& problem, const Vector& x, const RobustEvaluation& eval_x,
                                    const Vector& s, double theta, const LineSearchParams& params = {}) {
  params.validate();
  if (!(theta < 0.0)) throw InvariantViolation("line search needs theta < 0, got " + std::to_string(theta));
  if (s.size() != x.size() || s.isZero(0.0)) throw InvariantViolation("line search needs a nonzero direction");

  LineSearchResult result;
  double alpha = params.allow_full_step ? 1.0 : 0.5;
  const std::size_t first_r = params.allow_full_step ? 0 : 1;
  for (std::size_t r = first_r; r <= params.r_max; ++r, alpha *= 0.5) {
    ++result.trials;
    const Vector trial = x + alpha * s;
    if (!problem.in_box(trial)) continue;
    RobustEvaluation next;
    try {
      next = evaluate_robust(problem, trial);
    } catch (const EvaluationError&) {
      // A trial the kernels cannot evaluate counts as an ordinary rejection.
      ++result.point_evaluations;
      continue;
    }
    ++result.point_evaluations;
    if (armijo_holds(eval_x.F, next.F, alpha, params.beta, theta)) {
      result.alpha = alpha;
      result.next = std::move(next);
      return result;
    }
  }
  throw LineSearchFailure("no step 2^-r with r <= " + std::to_string(params.r_max) +
                              " passed the sufficient-decrease and box tests",
                          2.0 * alpha, result.point_evaluations);
}

}  // namespace rqn
