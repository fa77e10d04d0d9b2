#pragma once

// Quasi-Newton descent for the worst-case counterpart: subproblem, Armijo step,
// damped BFGS bundle update, repeated until |theta| < epsilon or ||s|| < epsilon.
// Also the multi-start front harness and Pareto filtering.

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rqn/hessian.hpp"
#include "rqn/linesearch.hpp"
#include "rqn/random.hpp"
#include "rqn/subproblem.hpp"

namespace rqn {

enum class Status { Critical, IterationLimit, LineSearchFailure, SubproblemFailure, EvaluationFailure };

inline const char* to_string(Status status) {
  switch (status) {
    case Status::Critical: return "Critical";
    case Status::IterationLimit: return "IterationLimit";
    case Status::LineSearchFailure: return "LineSearchFailure";
    case Status::SubproblemFailure: return "SubproblemFailure";
    case Status::EvaluationFailure: return "EvaluationFailure";
  }
  return "Unknown";
}

enum class H0Mode { identity, supplied };

struct SolverConfig {
  double epsilon = 1e-4;
  std::size_t max_iter = 5000;
  LineSearchParams line_search;
  SubproblemOptions subproblem;
  GradientMode gradients = GradientMode::analytic;
  H0Mode h0_mode = H0Mode::identity;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    line_search.validate();
    if (!(subproblem.tol_dual > 0.0)) throw ConfigError("tol_dual must be positive");
    if (subproblem.max_dual_iter < 1) throw ConfigError("max_dual_iter must be at least 1");
    if (threads < 1) throw ConfigError("threads must be at least 1");
  }
};

/// Diagnostics of one pair's BFGS update, without the matrix itself.
struct UpdateStats {
  double sigma = 1.0;
  bool skipped = false;
  bool cholesky_ok = true;
  double secant_residual = 0.0;
  double eta_norm = 0.0;
  double u_eta = 0.0;
  double uHu = 0.0;
};

struct IterationRecord {
  std::size_t k = 0;
  Vector x;
  Vector F;
  Vector s;
  double theta = 0.0;
  double s_norm = 0.0;
  double alpha = std::numeric_limits<double>::quiet_NaN();  // NaN on the terminal record
  Matrix lambda;
  double kkt_residual = 0.0;
  std::size_t dual_iterations = 0;
  std::vector<UpdateStats> updates;  // empty on the terminal record
};

struct SolveTrace {
  std::vector<IterationRecord> records;
  Status status = Status::IterationLimit;
  std::string message;
  Vector x_final;
  Vector F_final;
  double theta_final = std::numeric_limits<double>::quiet_NaN();
  double s_norm_final = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;           // accepted steps
  std::size_t point_evaluations = 0;    // evaluate_robust calls
  std::size_t gradient_evaluations = 0;  // full m*p gradient sets
  std::size_t kernel_calls = 0;         // literal kernel invocations

  /// Work in units of single kernel values: every point evaluation costs m*p,
  /// every gradient set n*m*p (the forward-difference price).
  std::size_t function_evaluations(std::size_t n, std::size_t m, std::size_t p) const {
    return point_evaluations * m * p + gradient_evaluations * n * m * p;
  }
};

inline SolveTrace solve(const UncertainProblem& problem, const Vector& x0, const SolverConfig& config = {},
                        const std::optional<HessianBundle>& h0 = std::nullopt) {
  config.validate();
  if (static_cast<std::size_t>(x0.size()) != problem.n())
    throw ConfigError("x0 has dimension " + std::to_string(x0.size()) + ", expected " + std::to_string(problem.n()));
  if (!problem.in_box(x0)) throw ConfigError("x0 lies outside [lb, ub]: " + format_vector(x0));

  HessianBundle bundle;
  if (config.h0_mode == H0Mode::supplied) {
    if (!h0) throw ConfigError("h0_mode is 'supplied' but no initial Hessians were given");
    bundle = *h0;
    if (bundle.m != problem.m() || bundle.p != problem.p() || bundle.n != problem.n())
      throw ConfigError("initial Hessians do not match the problem dimensions");
    try {
      bundle.validate();
    } catch (const InvariantViolation& e) {
      throw ConfigError(std::string("initial Hessians: ") + e.what());
    }
  } else {
    bundle = HessianBundle::identity(problem.m(), problem.p(), problem.n());
  }

  SolveTrace trace;
  auto finish = [&](Status status, const RobustEvaluation& eval, std::string message) {
    trace.status = status;
    trace.message = std::move(message);
    trace.x_final = eval.x;
    trace.F_final = eval.F;
    if (!trace.records.empty()) {
      trace.theta_final = trace.records.back().theta;
      trace.s_norm_final = trace.records.back().s_norm;
    }
    return trace;
  };

  RobustEvaluation eval;
  try {
    eval = evaluate_robust(problem, x0);
    ++trace.point_evaluations;
    trace.kernel_calls += eval.kernel_calls;
    const std::size_t before = eval.kernel_calls;
    fill_gradients(problem, eval, config.gradients);
    ++trace.gradient_evaluations;
    trace.kernel_calls += eval.kernel_calls - before;
  } catch (const EvaluationError& e) {
    eval.x = x0;
    eval.F = Vector::Constant(static_cast<Eigen::Index>(problem.m()), std::numeric_limits<double>::quiet_NaN());
    return finish(Status::EvaluationFailure, eval, e.what());
  }

  for (std::size_t k = 0;; ++k) {
    IterationRecord rec;
    rec.k = k;
    rec.x = eval.x;
    rec.F = eval.F;

    SubproblemSolution sol;
    try {
      sol = solve_subproblem(eval, bundle, config.subproblem);
    } catch (const SubproblemNonconvergence& e) {
      const auto& best = e.best();
      rec.s = best.s;
      rec.theta = best.theta;
      rec.s_norm = best.s.norm();
      rec.lambda = best.lambda;
      rec.kkt_residual = best.kkt_residual;
      rec.dual_iterations = best.dual_iterations;
      trace.records.push_back(std::move(rec));
      return finish(Status::SubproblemFailure, eval, e.what());
    } catch (const InvariantViolation& e) {
      trace.records.push_back(std::move(rec));
      return finish(Status::SubproblemFailure, eval, e.what());
    }
    rec.s = sol.s;
    rec.theta = sol.theta;
    rec.s_norm = sol.s.norm();
    rec.lambda = sol.lambda;
    rec.kkt_residual = sol.kkt_residual;
    rec.dual_iterations = sol.dual_iterations;

    if (std::abs(rec.theta) < config.epsilon || rec.s_norm < config.epsilon) {
      trace.records.push_back(std::move(rec));
      return finish(Status::Critical, eval, "");
    }
    if (k >= config.max_iter) {
      trace.records.push_back(std::move(rec));
      return finish(Status::IterationLimit, eval, "reached max_iter=" + std::to_string(config.max_iter));
    }
    if (!(rec.theta < 0.0)) {
      trace.records.push_back(std::move(rec));
      return finish(Status::SubproblemFailure, eval, "subproblem returned theta >= 0 with ||s|| >= epsilon");
    }

    LineSearchResult step;
    try {
      step = armijo_step(problem, eval.x, eval, sol.s, sol.theta, config.line_search);
    } catch (const LineSearchFailure& e) {
      trace.point_evaluations += e.point_evaluations();
      trace.kernel_calls += e.point_evaluations() * problem.m() * problem.p();
      trace.records.push_back(std::move(rec));
      return finish(Status::LineSearchFailure, eval, e.what());
    }
    trace.point_evaluations += step.point_evaluations;
    trace.kernel_calls += step.point_evaluations * problem.m() * problem.p();

    RobustEvaluation next = std::move(step.next);
    try {
      const std::size_t before = next.kernel_calls;
      fill_gradients(problem, next, config.gradients);
      ++trace.gradient_evaluations;
      trace.kernel_calls += next.kernel_calls - before;
    } catch (const EvaluationError& e) {
      trace.records.push_back(std::move(rec));
      return finish(Status::EvaluationFailure, eval, e.what());
    }

    BundleUpdate update = update_bundle(bundle, eval.x, next.x, eval, next);
    rec.alpha = step.alpha;
    rec.updates.reserve(update.records.size());
    for (const auto& r : update.records) {
      rec.updates.push_back({r.sigma, r.skipped, r.cholesky_ok, r.secant_residual, r.eta.size() ? r.eta.norm() : 0.0,
                             r.u_eta, r.uHu});
    }
    trace.records.push_back(std::move(rec));
    ++trace.iterations;
    bundle = std::move(update.bundle);
    eval = std::move(next);
  }
}

// ---------------------------------------------------------------------------
// Pareto filtering

/// a <= b componentwise and a != b.
inline bool dominates(const Vector& a, const Vector& b) {
  bool strictly = false;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a[j] > b[j]) return false;
    if (a[j] < b[j]) strictly = true;
  }
  return strictly;
}

/// Keeps the items whose key is not dominated by any other key; of exact
/// duplicates only the first in input order survives.
template <class T, class KeyFn>
std::vector<T> nondominated_filter(const std::vector<T>& items, KeyFn key) {
  std::vector<T> out;
  for (std::size_t a = 0; a < items.size(); ++a) {
    const Vector& ya = key(items[a]);
    bool keep = true;
    for (std::size_t b = 0; b < items.size() && keep; ++b) {
      if (b == a) continue;
      const Vector& yb = key(items[b]);
      if (dominates(yb, ya)) keep = false;
      else if (b < a && yb == ya) keep = false;
    }
    if (keep) out.push_back(items[a]);
  }
  return out;
}

inline std::vector<Vector> nondominated_filter(const std::vector<Vector>& points) {
  return nondominated_filter(points, [](const Vector& v) -> const Vector& { return v; });
}

/// Drops every item whose key lies within tol * (1 + |key|_inf) of an earlier kept item.
template <class T, class KeyFn>
std::vector<T> deduplicate(const std::vector<T>& items, KeyFn key, double tol = 1e-8) {
  std::vector<T> out;
  for (const auto& item : items) {
    const Vector& y = key(item);
    bool duplicate = false;
    for (const auto& kept : out) {
      const Vector& z = key(kept);
      if ((y - z).cwiseAbs().maxCoeff() <= tol * (1.0 + std::max(max_abs(y), max_abs(z)))) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(item);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multi-start fronts

/// Summary of one run of a front computation (one start or one weight vector).
struct RunSummary {
  std::size_t index = 0;
  Vector x0;
  Vector x;
  Vector F;       // worst-case objectives of the original problem at x
  Vector weight;  // empty for quasi-Newton starts
  Status status = Status::IterationLimit;
  std::size_t iterations = 0;
  std::size_t function_evaluations = 0;
  double theta = std::numeric_limits<double>::quiet_NaN();
  double s_norm = std::numeric_limits<double>::quiet_NaN();
};

struct ParetoFront {
  std::string problem;
  std::string solver;
  std::uint64_t seed = 0;
  SolverConfig config;
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<RunSummary> points;  // nondominated, ordered by run index
  std::vector<RunSummary> runs;    // every run, ordered by run index

  std::size_t total_iterations() const {
    std::size_t total = 0;
    for (const auto& r : runs) total += r.iterations;
    return total;
  }
  std::size_t total_function_evaluations() const {
    std::size_t total = 0;
    for (const auto& r : runs) total += r.function_evaluations;
    return total;
  }
  std::vector<Vector> objective_vectors() const {
    std::vector<Vector> out;
    for (const auto& pt : points) out.push_back(pt.F);
    return out;
  }
  std::vector<std::string> statuses() const {
    std::vector<std::string> out;
    for (const auto& r : runs) out.emplace_back(to_string(r.status));
    return out;
  }
};

/// Called once per run, in run order, with the problem actually solved.
using TraceObserver = std::function<void(const UncertainProblem&, std::size_t, const SolveTrace&)>;

namespace detail {

/// Runs job(0..count-1) on up to `threads` workers; results are stored by index.
template <class Result, class Job>
std::vector<Result> run_indexed(std::size_t count, std::size_t threads, Job job) {
  std::vector<Result> results(count);
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) results[k] = job(k);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      try {
        for (std::size_t k = next++; k < count; k = next++) results[k] = job(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

inline ParetoFront assemble_front(ParetoFront front) {
  std::vector<RunSummary> critical;
  for (const auto& r : front.runs)
    if (r.status == Status::Critical) critical.push_back(r);
  if (critical.empty())
    throw EmptyFront("no run of '" + front.solver + "' on " + front.problem + " reached a critical point",
                     front.statuses());
  auto key = [](const RunSummary& r) -> const Vector& { return r.F; };
  front.points = nondominated_filter(deduplicate(critical, key), key);
  return front;
}

}  // namespace detail

inline Vector start_point(const UncertainProblem& problem, std::uint64_t seed, std::size_t index) {
  Rng rng(seed, index);
  return rng.uniform_in_box(problem.lb(), problem.ub());
}

/// Solves from n_starts uniform random points and returns the nondominated set
/// of the critical end points. Results do not depend on config.threads.
inline ParetoFront multistart_front(const UncertainProblem& problem, const SolverConfig& config, std::size_t n_starts,
                                    const TraceObserver& observer = nullptr) {
  config.validate();
  if (n_starts < 1) throw ConfigError("n_starts must be at least 1");
  struct Job {
    RunSummary summary;
    SolveTrace trace;
  };
  auto jobs = detail::run_indexed<Job>(n_starts, config.threads, [&](std::size_t k) {
    Job job;
    job.summary.index = k;
    job.summary.x0 = start_point(problem, config.seed, k);
    job.trace = solve(problem, job.summary.x0, config);
    job.summary.x = job.trace.x_final;
    job.summary.F = job.trace.F_final;
    job.summary.status = job.trace.status;
    job.summary.iterations = job.trace.iterations;
    job.summary.function_evaluations = job.trace.function_evaluations(problem.n(), problem.m(), problem.p());
    job.summary.theta = job.trace.theta_final;
    job.summary.s_norm = job.trace.s_norm_final;
    if (!observer) job.trace = SolveTrace{};
    return job;
  });

  ParetoFront front;
  front.problem = problem.name();
  front.solver = "quasi-newton";
  front.seed = config.seed;
  front.config = config;
  front.n = problem.n();
  front.m = problem.m();
  for (auto& job : jobs) {
    if (observer) observer(problem, job.summary.index, job.trace);
    front.runs.push_back(std::move(job.summary));
  }
  return detail::assemble_front(std::move(front));
}

}  // namespace rqn
