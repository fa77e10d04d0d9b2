#pragma once

// Problem x solver benchmark: fronts from both solvers, shared extremes and
// reference point per problem, metric rows and performance profiles.

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rqn/baseline.hpp"
#include "rqn/io.hpp"
#include "rqn/metrics.hpp"
#include "rqn/problems.hpp"

namespace rqn {

inline const std::vector<std::string>& benchmark_solvers() {
  static const std::vector<std::string> names{"quasi-newton", "weighted-sum"};
  return names;
}

struct BenchmarkOptions {
  std::vector<std::string> problems;  // empty means the whole corpus
  bool quasi_newton = true;
  bool weighted_sum = true;
  std::size_t n_starts = 100;
  std::size_t n_weights = 100;
  SolverConfig config;
  TraceObserver observer;  // sees every trace of every run
};

struct SolverOutcome {
  std::string solver;
  std::optional<ParetoFront> front;
  std::string error;  // set when no front was produced
  std::vector<std::string> statuses;
};

struct ProblemOutcome {
  std::string problem;
  std::vector<SolverOutcome> solvers;
  Vector reference;
  ObjectiveExtremes extremes;
};

struct BenchmarkResult {
  std::vector<ProblemOutcome> problems;
  std::vector<MetricRow> rows;  // ordered by (problem, solver)
};

inline SolverOutcome run_solver(const UncertainProblem& problem, const std::string& solver, const BenchmarkOptions& opt) {
  SolverOutcome out;
  out.solver = solver;
  try {
    if (solver == "quasi-newton") {
      out.front = multistart_front(problem, opt.config, opt.n_starts, opt.observer);
    } else {
      const auto weights = generate_weights(WeightScheme::standard(problem.m(), opt.config.seed, opt.n_weights));
      out.front = weighted_sum_front(problem, weights, opt.config, opt.observer);
    }
    out.statuses = out.front->statuses();
  } catch (const EmptyFront& e) {
    out.error = e.what();
    out.statuses = e.statuses();
  }
  return out;
}

/// Delta, hypervolume and work counts for one problem; a missing front scores
/// Delta = inf and hypervolume = 0 so that profiles count it as a failure.
inline std::vector<MetricRow> score_problem(ProblemOutcome& outcome) {
  std::vector<std::vector<Vector>> fronts;
  for (const auto& s : outcome.solvers)
    if (s.front) fronts.push_back(s.front->objective_vectors());
  std::vector<MetricRow> rows;
  if (!fronts.empty()) {
    outcome.extremes = objective_extremes(fronts);
    outcome.reference = reference_point(fronts);
  }
  for (const auto& s : outcome.solvers) {
    MetricRow row;
    row.problem = outcome.problem;
    row.solver = s.solver;
    if (s.front) {
      const auto pts = s.front->objective_vectors();
      row.delta_spread = delta_spread(pts, outcome.extremes);
      row.hypervolume = outcome.reference.size() <= 3 ? hypervolume(pts, outcome.reference)
                                                      : std::numeric_limits<double>::quiet_NaN();
      row.iterations = static_cast<double>(s.front->total_iterations());
      row.function_evaluations = static_cast<double>(s.front->total_function_evaluations());
      row.front_size = s.front->points.size();
    } else {
      row.delta_spread = std::numeric_limits<double>::infinity();
      row.hypervolume = 0.0;
      row.iterations = std::numeric_limits<double>::infinity();
      row.function_evaluations = std::numeric_limits<double>::infinity();
    }
    rows.push_back(row);
  }
  return rows;
}

inline BenchmarkResult run_benchmark(const BenchmarkOptions& opt) {
  opt.config.validate();
  std::vector<std::string> names = opt.problems;
  if (names.empty())
    for (const auto& d : list_problems()) names.push_back(d.name);

  BenchmarkResult result;
  for (const auto& name : names) {
    const auto& problem = get_problem(name);
    ProblemOutcome outcome;
    outcome.problem = problem.name();
    if (opt.quasi_newton) outcome.solvers.push_back(run_solver(problem, "quasi-newton", opt));
    if (opt.weighted_sum) outcome.solvers.push_back(run_solver(problem, "weighted-sum", opt));
    for (auto& row : score_problem(outcome)) result.rows.push_back(std::move(row));
    result.problems.push_back(std::move(outcome));
  }
  return result;
}

inline const std::vector<std::string>& profile_metrics() {
  static const std::vector<std::string> names{"delta", "hypervolume", "iterations", "fevals"};
  return names;
}

/// Builds the profile input for one metric from metric rows; a solver missing on
/// a problem, or a NaN score, counts as a failure.
inline ProfileInput profile_input(const std::vector<MetricRow>& rows, const std::string& metric) {
  std::vector<std::string> problems;
  std::vector<std::string> solvers;
  for (const auto& r : rows) {
    if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) problems.push_back(r.problem);
    if (std::find(solvers.begin(), solvers.end(), r.solver) == solvers.end()) solvers.push_back(r.solver);
  }
  ProfileInput input;
  input.solvers = solvers;
  input.orientation = metric == "hypervolume" ? Orientation::higher_is_better : Orientation::lower_is_better;
  const double fail = metric == "hypervolume" ? 0.0 : std::numeric_limits<double>::infinity();
  input.scores = Matrix::Constant(static_cast<Eigen::Index>(problems.size()), static_cast<Eigen::Index>(solvers.size()), fail);
  for (const auto& r : rows) {
    double v = 0.0;
    if (metric == "delta") v = r.delta_spread;
    else if (metric == "hypervolume") v = r.hypervolume;
    else if (metric == "iterations") v = r.iterations;
    else if (metric == "fevals") v = r.function_evaluations;
    else throw ConfigError("unknown metric '" + metric + "'; expected delta, hypervolume, iterations or fevals");
    if (std::isnan(v)) v = fail;
    const auto a = std::find(problems.begin(), problems.end(), r.problem) - problems.begin();
    const auto s = std::find(solvers.begin(), solvers.end(), r.solver) - solvers.begin();
    input.scores(a, s) = v;
  }
  return input;
}

}  // namespace rqn
