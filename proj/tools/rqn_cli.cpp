// rqn: solve, front, benchmark, profile and list-problems subcommands.
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rqn/benchmark.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSolver = 2;

struct Flags {
  std::string problem;
  std::vector<std::string> problems{"all"};
  std::string solvers = "both";
  std::string front_solvers = "quasi-newton";
  std::optional<double> epsilon;
  std::optional<std::size_t> max_iter;
  std::optional<double> beta;
  std::optional<std::size_t> threads;
  std::optional<std::string> gradients;
  std::size_t starts = 100;
  std::size_t weights = 100;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::string config_file;
  std::string h0_file;
  std::string x0;
  bool literal_step = false;
  std::vector<std::string> inputs;
  std::vector<std::string> metrics;
};

void diagnostic(const std::string& kind, const std::string& message) {
  std::string flat = message;
  for (auto& c : flat)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "rqn: error kind=" << kind << " message=" << rqn::Json(flat).dump() << "\n";
}

rqn::SolverConfig build_config(const Flags& f) {
  rqn::SolverConfig c;
  c.seed = f.seed;
  if (f.epsilon) c.epsilon = *f.epsilon;
  if (f.max_iter) c.max_iter = *f.max_iter;
  if (f.beta) c.line_search.beta = *f.beta;
  if (f.threads) c.threads = *f.threads;
  if (f.gradients) rqn::apply_json(c, rqn::Json{{"gradients", *f.gradients}});
  if (f.literal_step) c.line_search.allow_full_step = false;
  if (!f.h0_file.empty()) c.h0_mode = rqn::H0Mode::supplied;
  if (!f.config_file.empty()) rqn::apply_json(c, rqn::read_json_file(f.config_file));
  c.validate();
  return c;
}

fs::path output_dir(const Flags& f) {
  if (!f.out.empty()) return f.out;
  if (const char* env = std::getenv("RQN_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return "rqn_output";
}

rqn::Vector parse_point(const std::string& text, std::size_t n) {
  std::vector<double> values;
  for (const auto& cell : rqn::split_csv_line(text)) values.push_back(rqn::parse_number(cell));
  if (values.size() != n)
    throw rqn::ConfigError("--x0 has " + std::to_string(values.size()) + " components, expected " + std::to_string(n));
  return Eigen::Map<const rqn::Vector>(values.data(), static_cast<Eigen::Index>(n));
}

std::vector<std::string> resolve_problems(const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& name : names) {
    if (name == "all" || name == "ALL") {
      for (const auto& d : rqn::list_problems()) out.push_back(d.name);
    } else {
      out.push_back(rqn::get_problem(name).name());
    }
  }
  return out;
}

std::vector<std::string> resolve_solvers(const std::string& s) {
  if (s == "both") return rqn::benchmark_solvers();
  if (s == "quasi-newton" || s == "qn") return {"quasi-newton"};
  if (s == "weighted-sum" || s == "ws") return {"weighted-sum"};
  throw rqn::ConfigError("--solvers must be quasi-newton, weighted-sum or both");
}

rqn::Json front_json(const rqn::ParetoFront& front) {
  rqn::Json points = rqn::Json::array();
  for (const auto& pt : front.points) {
    rqn::Json p{{"start_index", pt.index},
                {"x", rqn::to_json(pt.x)},
                {"F", rqn::to_json(pt.F)},
                {"status", rqn::to_string(pt.status)},
                {"iterations", pt.iterations}};
    if (pt.weight.size() > 0) p["weight"] = rqn::to_json(pt.weight);
    points.push_back(p);
  }
  rqn::Json doc = rqn::front_meta(front, front.runs.size());
  doc["points"] = points;
  doc["statuses"] = front.statuses();
  return doc;
}

void write_front(const fs::path& dir, const rqn::ParetoFront& front, const std::string& format) {
  const std::string stem = front.problem + "_" + front.solver;
  if (format == "json") {
    rqn::write_file_atomically(dir / (stem + "_front.json"), front_json(front).dump(2) + "\n");
  } else {
    rqn::write_file_atomically(dir / (stem + "_front.csv"), rqn::front_csv(front));
    rqn::write_file_atomically(dir / (stem + "_front.meta.json"),
                               rqn::front_meta(front, front.runs.size()).dump(2) + "\n");
  }
}

rqn::Json run_meta(const std::string& kind, const rqn::SolverConfig& config) {
  return rqn::Json{{"tool", "rqn"}, {"version", rqn::kToolVersion}, {"kind", kind}, {"seed", config.seed},
                   {"config", rqn::to_json(config)}};
}

void write_profiles(const fs::path& dir, const std::vector<rqn::MetricRow>& rows, const std::vector<std::string>& metrics,
                    const rqn::Json& base_meta) {
  for (const auto& metric : metrics) {
    const auto curves = rqn::performance_profile(rqn::profile_input(rows, metric));
    rqn::Json meta = base_meta;
    meta["kind"] = "profile";
    meta["metric"] = metric;
    rqn::write_file_atomically(dir / ("profile_" + metric + ".csv"), rqn::profile_csv(curves, meta));
    rqn::write_file_atomically(dir / ("profile_" + metric + ".svg"), rqn::profile_svg(curves, metric, meta));
  }
}

int cmd_list() {
  std::cout << "name,n,m,p,convexity\n";
  for (const auto& d : rqn::list_problems())
    std::cout << d.name << "," << d.n << "," << d.m << "," << d.p << "," << rqn::to_string(d.convexity) << "\n";
  return kExitOk;
}

int cmd_solve(const Flags& f) {
  if (f.problem.empty()) throw rqn::ConfigError("solve needs --problem");
  const auto config = build_config(f);
  const auto& problem = rqn::get_problem(f.problem);
  const rqn::Vector x0 = f.x0.empty() ? rqn::start_point(problem, config.seed, 0) : parse_point(f.x0, problem.n());
  std::optional<rqn::HessianBundle> h0;
  if (!f.h0_file.empty())
    h0 = rqn::hessians_from_json(rqn::read_json_file(f.h0_file), problem.m(), problem.p(), problem.n());

  const auto trace = rqn::solve(problem, x0, config, h0);

  rqn::Json meta = run_meta("trace", config);
  meta["problem"] = problem.name();
  meta["x0"] = rqn::to_json(x0);
  const fs::path dir = output_dir(f);
  const fs::path path = dir / (problem.name() + "_trace.jsonl");
  rqn::write_file_atomically(path, rqn::trace_jsonl(trace, meta));

  rqn::Json summary{{"problem", problem.name()},
                    {"status", rqn::to_string(trace.status)},
                    {"iterations", trace.iterations},
                    {"x", rqn::to_json(trace.x_final)},
                    {"F", rqn::to_json(trace.F_final)},
                    {"theta", rqn::to_json_number(trace.theta_final)},
                    {"function_evaluations", trace.function_evaluations(problem.n(), problem.m(), problem.p())},
                    {"trace", path.string()}};
  if (!trace.message.empty()) summary["message"] = trace.message;
  std::cout << summary.dump() << "\n";
  return trace.status == rqn::Status::Critical ? kExitOk : kExitSolver;
}

int cmd_front(const Flags& f) {
  if (f.problem.empty()) throw rqn::ConfigError("front needs --problem");
  const auto config = build_config(f);
  const auto& problem = rqn::get_problem(f.problem);
  const fs::path dir = output_dir(f);
  std::vector<rqn::ParetoFront> fronts;
  for (const auto& solver : resolve_solvers(f.front_solvers)) {
    rqn::BenchmarkOptions opt;
    opt.n_starts = f.starts;
    opt.n_weights = f.weights;
    opt.config = config;
    auto outcome = rqn::run_solver(problem, solver, opt);
    if (!outcome.front) {
      diagnostic("empty-front", problem.name() + " " + solver + ": " + outcome.error);
      return kExitSolver;
    }
    write_front(dir, *outcome.front, f.format);
    std::cout << rqn::Json{{"problem", problem.name()},
                           {"solver", solver},
                           {"front_size", outcome.front->points.size()},
                           {"runs", outcome.front->runs.size()}}
                     .dump()
              << "\n";
    fronts.push_back(std::move(*outcome.front));
  }
  if (fronts.front().m == 2) {
    rqn::Json meta = run_meta("front-chart", config);
    meta["problem"] = problem.name();
    rqn::write_file_atomically(dir / (problem.name() + "_front.svg"), rqn::front_svg(fronts, meta));
  }
  return kExitOk;
}

int cmd_benchmark(const Flags& f) {
  const auto config = build_config(f);
  rqn::BenchmarkOptions opt;
  opt.problems = resolve_problems(f.problems);
  const auto solvers = resolve_solvers(f.solvers);
  opt.quasi_newton = std::find(solvers.begin(), solvers.end(), "quasi-newton") != solvers.end();
  opt.weighted_sum = std::find(solvers.begin(), solvers.end(), "weighted-sum") != solvers.end();
  opt.n_starts = f.starts;
  opt.n_weights = f.weights;
  opt.config = config;

  const fs::path dir = output_dir(f);
  const auto result = rqn::run_benchmark(opt);
  for (const auto& p : result.problems) {
    for (const auto& s : p.solvers) {
      if (s.front) write_front(dir / "fronts", *s.front, f.format);
      else diagnostic("empty-front", p.problem + " " + s.solver + ": " + s.error);
    }
  }
  rqn::Json meta = run_meta("metrics", config);
  meta["starts"] = f.starts;
  meta["weights"] = f.weights;
  rqn::write_file_atomically(dir / "metrics.csv", rqn::metrics_csv(result.rows, meta));
  write_profiles(dir, result.rows, rqn::profile_metrics(), meta);
  for (const auto& r : result.rows) {
    std::cout << rqn::Json{{"problem", r.problem},
                           {"solver", r.solver},
                           {"front_size", r.front_size},
                           {"delta_spread", rqn::to_json_number(r.delta_spread)},
                           {"hypervolume", rqn::to_json_number(r.hypervolume)},
                           {"iterations", rqn::to_json_number(r.iterations)},
                           {"function_evaluations", rqn::to_json_number(r.function_evaluations)}}
                     .dump()
              << "\n";
  }
  return kExitOk;
}

int cmd_profile(const Flags& f) {
  if (f.inputs.empty()) throw rqn::ConfigError("profile needs --input");
  std::vector<rqn::MetricRow> rows;
  for (const auto& path : f.inputs) {
    std::ifstream in(path);
    if (!in) throw rqn::ConfigError("cannot open " + path);
    for (auto& r : rqn::parse_metrics_csv(in)) rows.push_back(std::move(r));
  }
  if (rows.empty()) throw rqn::ConfigError("no metric rows in the input");
  const auto metrics = f.metrics.empty() ? rqn::profile_metrics() : f.metrics;
  for (const auto& m : metrics)
    if (std::find(rqn::profile_metrics().begin(), rqn::profile_metrics().end(), m) == rqn::profile_metrics().end())
      throw rqn::ConfigError("unknown metric '" + m + "'; expected delta, hypervolume, iterations or fevals");
  rqn::Json meta{{"tool", "rqn"}, {"version", rqn::kToolVersion}, {"inputs", f.inputs}};
  const fs::path dir = output_dir(f);
  write_profiles(dir, rows, metrics, meta);
  for (const auto& m : metrics) std::cout << (dir / ("profile_" + m + ".csv")).string() << "\n";
  return kExitOk;
}

void add_solver_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--epsilon", f.epsilon, "Criticality tolerance on |theta|");
  cmd->add_option("--max-iter", f.max_iter, "Iteration limit per run");
  cmd->add_option("--beta", f.beta, "Armijo parameter in (0,1)");
  cmd->add_option("--seed", f.seed, "Random seed");
  cmd->add_option("--threads", f.threads, "Worker threads for multistart runs");
  cmd->add_option("--gradients", f.gradients, "analytic or forward-difference");
  cmd->add_flag("--literal-step", f.literal_step, "Start backtracking at alpha = 1/2");
  cmd->add_option("--config", f.config_file, "JSON file of solver settings; its keys take precedence over flags");
  cmd->add_option("--out", f.out, "Output directory (default $RQN_OUTPUT_DIR or ./rqn_output)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-Newton solver and benchmark for uncertain multiobjective problems"};
  app.set_version_flag("--version", rqn::kToolVersion);
  app.require_subcommand(1);
  Flags f;

  auto* solve = app.add_subcommand("solve", "Solve from one start point and write the trace");
  solve->add_option("--problem", f.problem, "Problem name, e.g. TP1")->required();
  solve->add_option("--x0", f.x0, "Comma-separated start point (default: first random start)");
  solve->add_option("--h0", f.h0_file, "JSON file of initial Hessians keyed by \"j,i\"");
  add_solver_flags(solve, f);

  auto* front = app.add_subcommand("front", "Multistart front of one problem");
  front->add_option("--problem", f.problem, "Problem name")->required();
  front->add_option("--solvers", f.front_solvers, "quasi-newton, weighted-sum or both");
  front->add_option("--starts", f.starts, "Number of random starts");
  front->add_option("--weights", f.weights, "Number of weight vectors for the weighted sum");
  front->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  add_solver_flags(front, f);

  auto* bench = app.add_subcommand("benchmark", "Fronts, metric CSV and profiles over a problem set");
  bench->add_option("--problems", f.problems, "Problem names or 'all'")->delimiter(',');
  bench->add_option("--solvers", f.solvers, "quasi-newton, weighted-sum or both");
  bench->add_option("--starts", f.starts, "Number of random starts");
  bench->add_option("--weights", f.weights, "Number of weight vectors for the weighted sum");
  bench->add_option("--format", f.format, "Front format: csv or json")->check(CLI::IsMember({"csv", "json"}));
  add_solver_flags(bench, f);

  auto* profile = app.add_subcommand("profile", "Performance profiles from metric CSV files");
  profile->add_option("--input", f.inputs, "Metric CSV file(s)")->required();
  profile->add_option("--metric", f.metrics, "delta, hypervolume, iterations or fevals (default: all)")->delimiter(',');
  profile->add_option("--out", f.out, "Output directory");

  auto* list = app.add_subcommand("list-problems", "List the problem corpus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    diagnostic("usage", e.what());
    std::cerr << app.help();
    return kExitConfig;
  }

  try {
    if (*list) return cmd_list();
    if (*solve) return cmd_solve(f);
    if (*front) return cmd_front(f);
    if (*bench) return cmd_benchmark(f);
    if (*profile) return cmd_profile(f);
  } catch (const rqn::ConfigError& e) {
    diagnostic(e.kind(), e.what());
    return kExitConfig;
  } catch (const rqn::UnknownProblem& e) {
    diagnostic(e.kind(), e.what());
    return kExitConfig;
  } catch (const rqn::Error& e) {
    diagnostic(e.kind(), e.what());
    return kExitSolver;
  } catch (const fs::filesystem_error& e) {
    diagnostic("io", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    diagnostic("internal", e.what());
    return kExitSolver;
  }
  return kExitOk;
}
