#pragma once

// Weighted-sum baseline. Because the scenario indices of different objectives
// are independent,
//
//   sum_j w_j max_i zeta_j(x, xi_i) = max_{(i_1..i_m)} sum_j w_j zeta_j(x, xi_{i_j}),
//
// so the scalarised problem is a single-objective instance with p^m scenarios
// and is solved by the same quasi-Newton driver.

#include <cmath>
#include <string>
#include <vector>

#include "rqn/random.hpp"
#include "rqn/solver.hpp"

namespace rqn {

inline constexpr std::size_t kDefaultExpansionCap = 4096;

class UnsupportedExpansion : public Error {
 public:
  explicit UnsupportedExpansion(const std::string& what) : Error("unsupported-expansion", what) {}
};

struct WeightScheme {
  std::size_t m = 2;
  std::vector<Vector> fixed;
  std::size_t n_random = 0;
  std::uint64_t seed = 0;

  /// Unit vectors followed by uniform draws from [0,1]^m, 100 weights in total.
  static WeightScheme standard(std::size_t m, std::uint64_t seed, std::size_t total = 100) {
    WeightScheme scheme;
    scheme.m = m;
    scheme.seed = seed;
    for (std::size_t j = 0; j < m; ++j) scheme.fixed.push_back(Vector::Unit(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)));
    scheme.n_random = total > m ? total - m : 0;
    return scheme;
  }
};

inline std::vector<Vector> generate_weights(const WeightScheme& scheme) {
  if (scheme.m < 1) throw ConfigError("weight scheme needs m >= 1");
  std::vector<Vector> out;
  for (const auto& w : scheme.fixed) {
    if (static_cast<std::size_t>(w.size()) != scheme.m) throw ConfigError("fixed weight has wrong dimension");
    if ((w.array() < 0.0).any() || w.isZero(0.0)) throw ConfigError("weights must be nonnegative and nonzero");
    out.push_back(w);
  }
  Rng rng(scheme.seed, 0x5745494748545355ULL);
  const Vector lo = Vector::Zero(static_cast<Eigen::Index>(scheme.m));
  const Vector hi = Vector::Ones(static_cast<Eigen::Index>(scheme.m));
  for (std::size_t r = 0; r < scheme.n_random; ++r) {
    Vector w = rng.uniform_in_box(lo, hi);
    while (w.isZero(0.0)) w = rng.uniform_in_box(lo, hi);
    out.push_back(std::move(w));
  }
  return out;
}

/// Flat index of a scenario tuple (i_1..i_m), with i_1 varying slowest.
inline std::vector<std::size_t> decode_tuple(std::size_t flat, std::size_t m, std::size_t p) {
  std::vector<std::size_t> idx(m);
  for (std::size_t j = m; j-- > 0;) {
    idx[j] = flat % p;
    flat /= p;
  }
  return idx;
}

/// The single-objective problem max over tuples of sum_j w_j zeta_j(x, xi_{i_j}).
inline UncertainProblem expand_weighted_sum(const UncertainProblem& problem, const Vector& w,
                                            std::size_t expansion_cap = kDefaultExpansionCap) {
  const auto m = problem.m();
  const auto p = problem.p();
  if (static_cast<std::size_t>(w.size()) != m) throw ConfigError("weight has dimension " + std::to_string(w.size()) + ", expected m=" + std::to_string(m));
  if ((w.array() < 0.0).any() || w.isZero(0.0) || !w.allFinite()) throw ConfigError("weights must be finite, nonnegative and nonzero");

  double count = std::pow(static_cast<double>(p), static_cast<double>(m));
  if (count > static_cast<double>(expansion_cap))
    throw UnsupportedExpansion("p^m = " + std::to_string(static_cast<long long>(count)) + " exceeds the expansion cap " +
                               std::to_string(expansion_cap));
  const auto tuples = static_cast<std::size_t>(count);

  std::vector<Vector> scenarios;
  scenarios.reserve(tuples);
  for (std::size_t t = 0; t < tuples; ++t) {
    const auto idx = decode_tuple(t, m, p);
    Vector code(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) code[static_cast<Eigen::Index>(j)] = static_cast<double>(idx[j]);
    scenarios.push_back(std::move(code));
  }

  Kernel kernel = [problem, w](std::size_t, const Vector& code, const Vector& x) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      if (w[j] == 0.0) continue;
      total += w[j] * problem.value(static_cast<std::size_t>(j), static_cast<std::size_t>(code[j]), x);
    }
    return total;
  };
  KernelGradient grad;
  if (problem.has_analytic_gradient()) {
    grad = [problem, w](std::size_t, const Vector& code, const Vector& x) {
      Vector g = Vector::Zero(static_cast<Eigen::Index>(problem.n()));
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w[j] == 0.0) continue;
        g += w[j] * problem.analytic_gradient(static_cast<std::size_t>(j), static_cast<std::size_t>(code[j]), x);
      }
      return g;
    };
  }
  return UncertainProblem(problem.name() + "/weighted-sum", problem.n(), 1, std::move(scenarios), std::move(kernel),
                          std::move(grad), problem.lb(), problem.ub());
}

inline SolveTrace weighted_sum_solve(const UncertainProblem& problem, const Vector& w, const Vector& x0,
                                     const SolverConfig& config = {}, std::size_t expansion_cap = kDefaultExpansionCap) {
  SolverConfig scalar = config;
  scalar.h0_mode = H0Mode::identity;
  return solve(expand_weighted_sum(problem, w, expansion_cap), x0, scalar);
}

/// One weighted-sum run per weight from the box midpoint; the front holds the
/// nondominated worst-case vectors F(x*) of the critical end points.
inline ParetoFront weighted_sum_front(const UncertainProblem& problem, const std::vector<Vector>& weights,
                                      const SolverConfig& config, const TraceObserver& observer = nullptr,
                                      std::size_t expansion_cap = kDefaultExpansionCap) {
  config.validate();
  if (weights.empty()) throw ConfigError("weighted-sum front needs at least one weight");
  SolverConfig scalar = config;
  scalar.h0_mode = H0Mode::identity;
  const Vector x0 = problem.midpoint();

  std::vector<UncertainProblem> expanded;
  expanded.reserve(weights.size());
  for (const auto& w : weights) expanded.push_back(expand_weighted_sum(problem, w, expansion_cap));

  struct Job {
    RunSummary summary;
    SolveTrace trace;
  };
  auto jobs = detail::run_indexed<Job>(weights.size(), config.threads, [&](std::size_t k) {
    Job job;
    job.summary.index = k;
    job.summary.x0 = x0;
    job.summary.weight = weights[k];
    job.trace = solve(expanded[k], x0, scalar);
    job.summary.x = job.trace.x_final;
    job.summary.status = job.trace.status;
    job.summary.iterations = job.trace.iterations;
    job.summary.function_evaluations = job.trace.function_evaluations(problem.n(), problem.m(), problem.p());
    job.summary.theta = job.trace.theta_final;
    job.summary.s_norm = job.trace.s_norm_final;
    try {
      job.summary.F = evaluate_robust(problem, job.summary.x).F;
    } catch (const EvaluationError&) {
      job.summary.F = Vector::Constant(static_cast<Eigen::Index>(problem.m()), std::numeric_limits<double>::quiet_NaN());
      if (job.summary.status == Status::Critical) job.summary.status = Status::EvaluationFailure;
    }
    if (!observer) job.trace = SolveTrace{};
    return job;
  });

  ParetoFront front;
  front.problem = problem.name();
  front.solver = "weighted-sum";
  front.seed = config.seed;
  front.config = config;
  front.n = problem.n();
  front.m = problem.m();
  for (auto& job : jobs) {
    if (observer) observer(expanded[job.summary.index], job.summary.index, job.trace);
    front.runs.push_back(std::move(job.summary));
  }
  return detail::assemble_front(std::move(front));
}

}  // namespace rqn
