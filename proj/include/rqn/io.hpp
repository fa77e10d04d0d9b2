#pragma once

// Serialisation: front CSV, trace JSON lines, metric and profile CSV, SVG
// charts, and the initial-Hessian JSON format. Every file begins with '#'
// comment lines (CSV, SVG) or a meta record (JSONL) carrying the configuration.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rqn/baseline.hpp"
#include "rqn/metrics.hpp"

namespace rqn {

using Json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

inline Json to_json_number(double v) { return std::isfinite(v) ? Json(v) : Json(format_number(v)); }

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(to_json_number(v[k]));
  return out;
}

inline Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vector(m.row(r).transpose())));
  return out;
}

inline Json to_json(const SolverConfig& c) {
  return Json{{"epsilon", c.epsilon},
              {"max_iter", c.max_iter},
              {"beta", c.line_search.beta},
              {"r_max", c.line_search.r_max},
              {"allow_full_step", c.line_search.allow_full_step},
              {"tol_dual", c.subproblem.tol_dual},
              {"max_dual_iter", c.subproblem.max_dual_iter},
              {"gradients", to_string(c.gradients)},
              {"h0", c.h0_mode == H0Mode::identity ? "identity" : "supplied"},
              {"seed", c.seed},
              {"threads", c.threads}};
}

/// Overrides the fields present in j; unknown keys raise ConfigError.
inline void apply_json(SolverConfig& c, const Json& j) {
  if (!j.is_object()) throw ConfigError("configuration JSON must be an object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "epsilon") c.epsilon = value.get<double>();
      else if (key == "max_iter") c.max_iter = value.get<std::size_t>();
      else if (key == "beta") c.line_search.beta = value.get<double>();
      else if (key == "r_max") c.line_search.r_max = value.get<std::size_t>();
      else if (key == "allow_full_step") c.line_search.allow_full_step = value.get<bool>();
      else if (key == "tol_dual") c.subproblem.tol_dual = value.get<double>();
      else if (key == "max_dual_iter") c.subproblem.max_dual_iter = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "threads") c.threads = value.get<std::size_t>();
      else if (key == "gradients") {
        const auto s = value.get<std::string>();
        if (s == "analytic") c.gradients = GradientMode::analytic;
        else if (s == "forward-difference" || s == "fd") c.gradients = GradientMode::forward_difference;
        else throw ConfigError("gradients must be 'analytic' or 'forward-difference'");
      } else if (key == "h0") {
        const auto s = value.get<std::string>();
        if (s == "identity") c.h0_mode = H0Mode::identity;
        else if (s == "supplied") c.h0_mode = H0Mode::supplied;
        else throw ConfigError("h0 must be 'identity' or 'supplied'");
      } else throw ConfigError("unknown configuration key '" + key + "'");
    } catch (const Json::exception& e) {
      throw ConfigError("configuration key '" + key + "': " + e.what());
    }
  }
}

/// Initial Hessians as {"j,i": [[...], ...]} with one-based indices; every pair is required.
inline HessianBundle hessians_from_json(const Json& j, std::size_t m, std::size_t p, std::size_t n) {
  if (!j.is_object()) throw ConfigError("initial Hessian JSON must be an object keyed by \"j,i\"");
  HessianBundle bundle = HessianBundle::identity(m, p, n);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      const std::string key = std::to_string(a + 1) + "," + std::to_string(b + 1);
      if (!j.contains(key)) throw ConfigError("initial Hessian JSON lacks key \"" + key + "\"");
      const auto& rows = j.at(key);
      if (!rows.is_array() || rows.size() != n) throw ConfigError("initial Hessian \"" + key + "\" must have " + std::to_string(n) + " rows");
      Matrix& h = bundle.at(a, b);
      for (std::size_t r = 0; r < n; ++r) {
        if (!rows[r].is_array() || rows[r].size() != n) throw ConfigError("initial Hessian \"" + key + "\" row has wrong length");
        for (std::size_t c = 0; c < n; ++c) h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
      }
    }
  }
  return bundle;
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
  }
}

/// Writes to a temporary sibling and renames it into place.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp);
    out << content;
    if (!out) throw ConfigError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::string comment_header(const Json& meta) { return "# " + meta.dump() + "\n"; }

inline Json front_meta(const ParetoFront& front, std::size_t runs) {
  return Json{{"tool", "rqn"},
              {"version", kToolVersion},
              {"kind", "front"},
              {"problem", front.problem},
              {"solver", front.solver},
              {"seed", front.seed},
              {"runs", runs},
              {"config", to_json(front.config)}};
}

/// Front CSV: start_index,x_1..x_n,F_1..F_m,status,iterations (+ weight_1..weight_m for weighted sum).
inline std::string front_csv(const ParetoFront& front) {
  std::ostringstream out;
  out << comment_header(front_meta(front, front.runs.size()));
  const bool weighted = !front.points.empty() && front.points.front().weight.size() > 0;
  out << "start_index";
  for (std::size_t d = 0; d < front.n; ++d) out << ",x_" << d + 1;
  for (std::size_t j = 0; j < front.m; ++j) out << ",F_" << j + 1;
  out << ",status,iterations";
  if (weighted)
    for (std::size_t j = 0; j < front.m; ++j) out << ",weight_" << j + 1;
  out << "\n";
  for (const auto& pt : front.points) {
    out << pt.index;
    for (Eigen::Index d = 0; d < pt.x.size(); ++d) out << "," << format_number(pt.x[d]);
    for (Eigen::Index j = 0; j < pt.F.size(); ++j) out << "," << format_number(pt.F[j]);
    out << "," << to_string(pt.status) << "," << pt.iterations;
    if (weighted)
      for (Eigen::Index j = 0; j < pt.weight.size(); ++j) out << "," << format_number(pt.weight[j]);
    out << "\n";
  }
  return out.str();
}

/// One JSON object per line: a meta record, one record per iteration, and a summary.
inline std::string trace_jsonl(const SolveTrace& trace, const Json& meta) {
  std::ostringstream out;
  Json head = meta;
  head["type"] = "meta";
  out << head.dump() << "\n";
  for (const auto& r : trace.records) {
    Json rec{{"type", "iteration"},
             {"k", r.k},
             {"x", to_json(r.x)},
             {"F", to_json(r.F)},
             {"s", to_json(r.s)},
             {"theta", to_json_number(r.theta)},
             {"s_norm", to_json_number(r.s_norm)},
             {"alpha", std::isnan(r.alpha) ? Json(nullptr) : Json(r.alpha)},
             {"lambda", to_json(r.lambda)},
             {"kkt_residual", to_json_number(r.kkt_residual)},
             {"dual_iterations", r.dual_iterations}};
    Json sig = Json::array();
    for (const auto& u : r.updates) sig.push_back(u.skipped ? Json(nullptr) : Json(u.sigma));
    rec["sigma"] = sig;
    out << rec.dump() << "\n";
  }
  Json summary{{"type", "summary"},
               {"status", to_string(trace.status)},
               {"message", trace.message},
               {"iterations", trace.iterations},
               {"x", to_json(trace.x_final)},
               {"F", to_json(trace.F_final)},
               {"theta", to_json_number(trace.theta_final)},
               {"s_norm", to_json_number(trace.s_norm_final)},
               {"point_evaluations", trace.point_evaluations},
               {"gradient_evaluations", trace.gradient_evaluations},
               {"kernel_calls", trace.kernel_calls}};
  out << summary.dump() << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Metric summary CSV: problem,solver,delta_spread,hypervolume,iterations,function_evaluations

struct MetricRow {
  std::string problem;
  std::string solver;
  double delta_spread = std::numeric_limits<double>::quiet_NaN();
  double hypervolume = std::numeric_limits<double>::quiet_NaN();
  double iterations = std::numeric_limits<double>::quiet_NaN();
  double function_evaluations = std::numeric_limits<double>::quiet_NaN();
  std::size_t front_size = 0;
};

inline std::string metrics_csv(const std::vector<MetricRow>& rows, const Json& meta) {
  std::ostringstream out;
  out << comment_header(meta);
  out << "problem,solver,delta_spread,hypervolume,iterations,function_evaluations\n";
  for (const auto& r : rows) {
    out << r.problem << "," << r.solver << "," << format_number(r.delta_spread) << "," << format_number(r.hypervolume)
        << "," << format_number(r.iterations) << "," << format_number(r.function_evaluations) << "\n";
  }
  return out.str();
}

inline double parse_number(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<MetricRow> parse_metrics_csv(std::istream& in) {
  std::vector<MetricRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    if (!header_seen) {
      if (cells.size() < 6 || cells[0] != "problem" || cells[1] != "solver")
        throw ConfigError("metric CSV header must start with problem,solver,delta_spread,hypervolume,iterations,function_evaluations");
      header_seen = true;
      continue;
    }
    if (cells.size() < 6) throw ConfigError("metric CSV row has fewer than 6 columns: " + line);
    MetricRow r;
    r.problem = cells[0];
    r.solver = cells[1];
    r.delta_spread = parse_number(cells[2]);
    r.hypervolume = parse_number(cells[3]);
    r.iterations = parse_number(cells[4]);
    r.function_evaluations = parse_number(cells[5]);
    rows.push_back(std::move(r));
  }
  if (!header_seen) throw ConfigError("metric CSV has no header");
  return rows;
}

inline std::string profile_csv(const std::vector<ProfileCurve>& curves, const Json& meta) {
  std::ostringstream out;
  out << comment_header(meta);
  out << "solver,tau,rho\n";
  for (const auto& c : curves)
    for (const auto& [tau, rho] : c.points) out << c.solver << "," << format_number(tau) << "," << format_number(rho) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// SVG charts

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline const char* palette(std::size_t k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return colors[k % 6];
}

struct Frame {
  double x0, x1, y0, y1;
  static constexpr double W = 640, H = 420, L = 60, R = 20, T = 30, B = 50;
  double px(double x) const { return L + (x - x0) / (x1 - x0) * (W - L - R); }
  double py(double y) const { return H - B - (y - y0) / (y1 - y0) * (H - T - B); }
};

inline std::string svg_open(const Frame& f, const std::string& title, const std::string& xlabel,
                            const std::string& ylabel, const Json& meta) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- " << xml_escape(meta.dump()) << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Frame::W << "\" height=\"" << Frame::H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << Frame::W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title) << "</text>\n";
  out << "<line x1=\"" << Frame::L << "\" y1=\"" << Frame::H - Frame::B << "\" x2=\"" << Frame::W - Frame::R << "\" y2=\""
      << Frame::H - Frame::B << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << Frame::L << "\" y1=\"" << Frame::T << "\" x2=\"" << Frame::L << "\" y2=\"" << Frame::H - Frame::B
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    out << "<text x=\"" << f.px(xv) << "\" y=\"" << Frame::H - Frame::B + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
        << std::setprecision(4) << xv << "</text>\n";
    out << "<text x=\"" << Frame::L - 6 << "\" y=\"" << f.py(yv) + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << yv
        << "</text>\n";
  }
  out << "<text x=\"" << Frame::W / 2 << "\" y=\"" << Frame::H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
      << xml_escape(xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << Frame::H / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
      << Frame::H / 2 << ")\">" << xml_escape(ylabel) << "</text>\n";
  return out.str();
}

}  // namespace detail

/// Step-function chart of rho_s(tau), one polyline per solver.
inline std::string profile_svg(const std::vector<ProfileCurve>& curves, const std::string& metric, const Json& meta) {
  double tmax = 1.0;
  for (const auto& c : curves)
    for (const auto& pt : c.points) tmax = std::max(tmax, pt.first);
  if (tmax <= 1.0) tmax = 2.0;
  const detail::Frame f{1.0, tmax * 1.05, 0.0, 1.0};
  std::ostringstream out;
  out << detail::svg_open(f, "Performance profile: " + metric, "tau", "rho(tau)", meta);
  for (std::size_t k = 0; k < curves.size(); ++k) {
    out << "<polyline fill=\"none\" stroke=\"" << detail::palette(k) << "\" stroke-width=\"2\" points=\"";
    double prev = 0.0;
    out << f.px(1.0) << "," << f.py(0.0) << " ";
    for (const auto& [tau, rho] : curves[k].points) {
      out << f.px(tau) << "," << f.py(prev) << " " << f.px(tau) << "," << f.py(rho) << " ";
      prev = rho;
    }
    out << f.px(tmax * 1.05) << "," << f.py(prev) << "\"/>\n";
    out << "<text x=\"" << detail::Frame::W - 150 << "\" y=\"" << 50 + 16 * k << "\" font-size=\"12\" fill=\""
        << detail::palette(k) << "\">" << detail::xml_escape(curves[k].solver) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

/// Scatter of the first two objectives of one or more fronts.
inline std::string front_svg(const std::vector<ParetoFront>& fronts, const Json& meta) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& fr : fronts)
    for (const auto& pt : fr.points) {
      if (pt.F.size() < 2) continue;
      x0 = std::min(x0, pt.F[0]);
      x1 = std::max(x1, pt.F[0]);
      y0 = std::min(y0, pt.F[1]);
      y1 = std::max(y1, pt.F[1]);
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  const double mx = 0.05 * (x1 - x0), my = 0.05 * (y1 - y0);
  const detail::Frame f{x0 - mx, x1 + mx, y0 - my, y1 + my};
  std::ostringstream out;
  out << detail::svg_open(f, fronts.empty() ? "front" : fronts.front().problem, "F_1", "F_2", meta);
  for (std::size_t k = 0; k < fronts.size(); ++k) {
    for (const auto& pt : fronts[k].points) {
      if (pt.F.size() < 2) continue;
      out << "<circle cx=\"" << f.px(pt.F[0]) << "\" cy=\"" << f.py(pt.F[1]) << "\" r=\"3\" fill=\"" << detail::palette(k)
          << "\"/>\n";
    }
    out << "<text x=\"" << detail::Frame::W - 150 << "\" y=\"" << 50 + 16 * k << "\" font-size=\"12\" fill=\""
        << detail::palette(k) << "\">" << detail::xml_escape(fronts[k].solver) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace rqn
