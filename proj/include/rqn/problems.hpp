#pragma once

// Test corpus TP1..TP20 with analytic gradients, plus a name-keyed registry
// that also accepts user-defined problems.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "rqn/robust_model.hpp"

namespace rqn {

enum class Convexity { convex, nonconvex };

inline const char* to_string(Convexity c) { return c == Convexity::convex ? "convex" : "nonconvex"; }

struct ProblemDescriptor {
  std::string name;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t p = 0;
  Vector lb;
  Vector ub;
  Convexity convexity = Convexity::nonconvex;
  std::shared_ptr<const UncertainProblem> problem;
};

class ProblemRegistry {
 public:
  void add(std::shared_ptr<const UncertainProblem> problem, Convexity convexity) {
    if (!problem) throw ConfigError("cannot register a null problem");
    if (find(problem->name()) != nullptr) throw ConfigError("problem '" + problem->name() + "' is already registered");
    ProblemDescriptor d;
    d.name = problem->name();
    d.m = problem->m();
    d.n = problem->n();
    d.p = problem->p();
    d.lb = problem->lb();
    d.ub = problem->ub();
    d.convexity = convexity;
    d.problem = std::move(problem);
    entries_.push_back(std::move(d));
  }

  /// Case-insensitive lookup; nullptr when absent.
  const ProblemDescriptor* find(const std::string& name) const {
    for (const auto& d : entries_)
      if (equal_ignore_case(d.name, name)) return &d;
    return nullptr;
  }

  const ProblemDescriptor& descriptor(const std::string& name) const {
    if (const auto* d = find(name)) return *d;
    std::string valid;
    for (const auto& d : entries_) valid += (valid.empty() ? "" : ", ") + d.name;
    throw UnknownProblem("unknown problem '" + name + "'; valid names: " + valid);
  }

  const UncertainProblem& get(const std::string& name) const { return *descriptor(name).problem; }
  const std::vector<ProblemDescriptor>& list() const noexcept { return entries_; }

 private:
  static bool equal_ignore_case(const std::string& a, const std::string& b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
             return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
  }

  std::vector<ProblemDescriptor> entries_;
};

namespace corpus_detail {

using std::numbers::pi;

/// Writes zeta_j(x, xi) to f and, when g is non-null, its gradient to *g.
using Evaluator = void (*)(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g);

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double d : v) out[k++] = d;
  return out;
}

inline std::shared_ptr<const UncertainProblem> make(const std::string& name, std::size_t n, std::size_t m,
                                                    std::vector<Vector> scenarios, Evaluator fn, Vector lb, Vector ub) {
  Kernel kernel = [fn](std::size_t j, const Vector& xi, const Vector& x) {
    double f = 0.0;
    fn(j, xi, x, f, nullptr);
    return f;
  };
  KernelGradient grad = [fn, n](std::size_t j, const Vector& xi, const Vector& x) {
    double f = 0.0;
    Vector g = Vector::Zero(static_cast<Eigen::Index>(n));
    fn(j, xi, x, f, &g);
    return g;
  };
  return std::make_shared<const UncertainProblem>(name, n, m, std::move(scenarios), std::move(kernel), std::move(grad),
                                                  std::move(lb), std::move(ub));
}

inline void tp1(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double a = xi[0], b = xi[1];
  if (j == 0) {
    const double d1 = x[0] - a, d2 = x[1] - b;
    f = 0.25 * (std::pow(d1, 4) + 2.0 * std::pow(d2, 4));
    if (g) *g = vec({d1 * d1 * d1, 2.0 * d2 * d2 * d2});
  } else {
    const double r = a * x[1] - b * x[0] * x[0];
    const double q = 1.0 - a * x[0];
    f = r * r + q * q;
    if (g) *g = vec({-4.0 * b * x[0] * r - 2.0 * a * q, 2.0 * a * r});
  }
}

inline void tp2(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double a = xi[0], b = xi[1];
  const double x1 = x[0], x2 = x[1];
  switch (j) {
    case 0:
      f = x1 * x1 + a * std::pow(x2, 4) + a * b * x1 * x2;
      if (g) *g = vec({2.0 * x1 + a * b * x2, 4.0 * a * x2 * x2 * x2 + a * b * x1});
      break;
    case 1:
      f = 5.0 * x1 * x1 + a * x2 * x2 + b * std::pow(x1, 4) * x2;
      if (g) *g = vec({10.0 * x1 + 4.0 * b * x1 * x1 * x1 * x2, 2.0 * a * x2 + b * std::pow(x1, 4)});
      break;
    default: {
      const double e = std::exp(-a * x1 + b * x2);
      f = e + x1 * x1 - a * x2 * x2;
      if (g) *g = vec({-a * e + 2.0 * x1, b * e - 2.0 * a * x2});
    }
  }
}

inline void tp3(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double a = xi[0], b = xi[1];
  const double x1 = x[0], x2 = x[1];
  switch (j) {
    case 0: {
      const double r = x2 - x1 * x1;
      f = 100.0 * a * r * r + b * (1.0 - x1) * (1.0 - x1);
      if (g) *g = vec({-400.0 * a * x1 * r - 2.0 * b * (1.0 - x1), 200.0 * a * r});
      break;
    }
    case 1:
      f = (x2 - a) * (x2 - a) + b * x1 * x1;
      if (g) *g = vec({2.0 * b * x1, 2.0 * (x2 - a)});
      break;
    default:
      f = a * x1 * x1 + 3.0 * b * x2 * x2;
      if (g) *g = vec({2.0 * a * x1, 6.0 * b * x2});
  }
}

inline void tp4(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double a = xi[0], b = xi[1];
  if (j == 0) {
    f = (x[0] - a) * (x[0] - a) + (x[1] - b) * (x[1] - b);
    if (g) *g = vec({2.0 * (x[0] - a), 2.0 * (x[1] - b)});
  } else {
    f = a * x[0] * x[0] + b * x[1] * x[1];
    if (g) *g = vec({2.0 * a * x[0], 2.0 * b * x[1]});
  }
}

inline void tp5(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double c = xi[0], t = x[0];
  if (j == 0) {
    f = (t - c) * (t - c);
    if (g) *g = vec({2.0 * (t - c)});
  } else {
    f = t * t + c * t;
    if (g) *g = vec({2.0 * t + c});
  }
}

inline void tp6(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double shift = (j == 0 ? -1.0 : 1.0) / std::sqrt(3.0);
  const Vector d = (x.array() + shift).matrix();
  const double S = (xi.array() * d.array().square()).sum();
  const double e = std::exp(-S);
  f = 1.0 - e;
  if (g) *g = (2.0 * e * xi.array() * d.array()).matrix();
}

inline void tp10(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double a = xi[0], b = xi[1], c = xi[2];
  const double x1 = x[0], x2 = x[1], x3 = x[2];
  const double w = 1.0 + c * x3;
  if (j < 2) {
    const double sign = j == 0 ? -1.0 : 1.0;
    const double q = a * b * std::pow(x1, 3) * std::pow(x2, 3) - 10.0 * a * x1 + sign * 4.0 * b * x2;
    f = w * q;
    if (g)
      *g = vec({w * (3.0 * a * b * x1 * x1 * std::pow(x2, 3) - 10.0 * a),
                w * (3.0 * a * b * std::pow(x1, 3) * x2 * x2 + sign * 4.0 * b), c * q});
  } else {
    f = w * a * x1 * x1;
    if (g) *g = vec({2.0 * w * a * x1, 0.0, c * a * x1 * x1});
  }
}

inline void tp11(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double a = xi[0], b = xi[1];
  if (j == 0) {
    f = (x[0] - a) * (x[0] - a) + (x[1] + b) * (x[1] + b);
    if (g) *g = vec({2.0 * (x[0] - a), 2.0 * (x[1] + b)});
  } else {
    const double r = a * x[0] + b * x[1];
    f = r * r;
    if (g) *g = vec({2.0 * a * r, 2.0 * b * r});
  }
}

inline void tp12(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double a = xi[0], b = xi[1];
  const double x1 = x[0], x2 = x[1], x3 = x[2];
  switch (j) {
    case 0:
      f = x1 * x1 + (x2 - a) * (x2 - a) - b * x3 * x3;
      if (g) *g = vec({2.0 * x1, 2.0 * (x2 - a), -2.0 * b * x3});
      break;
    case 1:
      f = a * x1 + b * x2 * x2 + x3 + 4.0 * a * b;
      if (g) *g = vec({a, 2.0 * b * x2, 1.0});
      break;
    default: {
      const double r = x3 - b * x1;
      f = a * x1 * x1 + 6.0 * x2 * x2 + 25.0 * r * r;
      if (g) *g = vec({2.0 * a * x1 - 50.0 * b * r, 12.0 * x2, 50.0 * r});
    }
  }
}

inline void tp14(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double c = xi[0], t = x[0];
  if (j == 0) {
    f = (t - c) * (t - c);
    if (g) *g = vec({2.0 * (t - c)});
  } else {
    f = -t * t - c * t;
    if (g) *g = vec({-2.0 * t - c});
  }
}

inline void tp16(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const double a = xi[0], b = xi[1];
  const double x1 = x[0], x2 = x[1], x3 = x[2];
  switch (j) {
    case 0:
      f = 3.0 * x1 * x1 + (x2 - a) * (x2 - a) + b * x3 * x3;
      if (g) *g = vec({6.0 * x1, 2.0 * (x2 - a), 2.0 * b * x3});
      break;
    case 1:
      f = 2.0 * a * x1 + b * x2 * x2 + 3.0 * x3 + 4.0 * a * b;
      if (g) *g = vec({2.0 * a, 2.0 * b * x2, 3.0});
      break;
    default: {
      const double r = x3 - b * x1;
      f = a * x1 * x1 + 6.0 * x2 * x2 + 20.0 * r * r;
      if (g) *g = vec({2.0 * a * x1 - 40.0 * b * r, 12.0 * x2, 40.0 * r});
    }
  }
}

/// Sum over k in `ks` (one-based) of (x_k - sin(xi_k pi x_1 + k pi / n))^2, scaled by `weight`.
inline void cec_sum(const std::vector<std::size_t>& ks, double weight, const Vector& xi, const Vector& x, double& f,
                    Vector* g) {
  const double n = static_cast<double>(x.size());
  for (std::size_t k : ks) {
    const auto d = static_cast<Eigen::Index>(k - 1);
    const double theta = xi[d] * pi * x[0] + static_cast<double>(k) * pi / n;
    const double v = x[d] - std::sin(theta);
    f += weight * v * v;
    if (g) {
      (*g)[0] += weight * 2.0 * v * (-std::cos(theta) * xi[d] * pi);
      (*g)[d] += weight * 2.0 * v;
    }
  }
}

inline void tp17(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<std::size_t> odd, even, all;
  for (std::size_t k = 2; k <= n; ++k) {
    (k % 2 == 1 ? odd : even).push_back(k);
    all.push_back(k);
  }
  if (g) g->setZero();
  switch (j) {
    case 0:
      f = x[0];
      if (g) (*g)[0] = 1.0;
      if (!odd.empty()) cec_sum(odd, 2.0 / static_cast<double>(odd.size()), xi, x, f, g);
      break;
    case 1: {
      const double r = std::sqrt(x[0]);
      f = 1.0 - r;
      if (g) (*g)[0] = -0.5 / r;
      if (!even.empty()) cec_sum(even, 2.0 / static_cast<double>(even.size()), xi, x, f, g);
      break;
    }
    default:
      f = (x[0] - 0.5) * (x[0] - 0.5);
      if (g) (*g)[0] = 2.0 * (x[0] - 0.5);
      if (!all.empty()) cec_sum(all, 2.0 / static_cast<double>(all.size()), xi, x, f, g);
  }
}

inline void tp18(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  const bool first = xi[0] == 1.0;
  const double x1 = x[0], x2 = x[1];
  if (j == 0) {
    if (first) {
      f = 1.0 + std::pow(x1, 0.25);
      if (g) *g = vec({0.25 * std::pow(x1, -0.75), 0.0});
    } else {
      f = 1.0 + x2 * x2;
      if (g) *g = vec({0.0, 2.0 * x2});
    }
  } else if (first) {
    const double t = std::pow(x1, 0.25);
    const double q = x1 / (1.0 + t);
    f = 1.0 - q * q;
    if (g) *g = vec({-2.0 * q * (1.0 + 0.75 * t) / ((1.0 + t) * (1.0 + t)), 0.0});
  } else {
    const double q = x1 / (1.0 + x2);
    f = 1.0 - q * q;
    if (g) *g = vec({-2.0 * q / (1.0 + x2), 2.0 * q * x1 / ((1.0 + x2) * (1.0 + x2))});
  }
}

inline void tp19(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  constexpr std::size_t m = 2;
  const auto n = static_cast<std::size_t>(x.size());
  const double K = static_cast<double>(m + n - 1);
  double sum = 0.0;
  Vector dg = Vector::Zero(x.size());
  for (std::size_t k = m; k <= n; ++k) {
    const auto d = static_cast<Eigen::Index>(k - 1);
    const double r = x[d] - xi[d];
    sum += r * r - std::cos(20.0 * pi * r);
    dg[d] = 100.0 * (2.0 * r + 20.0 * pi * std::sin(20.0 * pi * r));
  }
  const double gval = 100.0 * (K + sum);
  const double factor = j == 0 ? x[0] : 1.0 - x[0];
  f = 0.5 * (1.0 + gval) * factor;
  if (g) {
    *g = 0.5 * factor * dg;
    (*g)[0] = (j == 0 ? 0.5 : -0.5) * (1.0 + gval);
  }
}

inline void tp20(std::size_t j, const Vector& xi, const Vector& x, double& f, Vector* g) {
  constexpr std::size_t m = 3;
  const auto n = static_cast<std::size_t>(x.size());
  double gval = 0.0;
  Vector dg = Vector::Zero(x.size());
  for (std::size_t k = m; k <= n; ++k) {
    const auto d = static_cast<Eigen::Index>(k - 1);
    const double r = x[d] - xi[d];
    gval += r * r;
    dg[d] = 2.0 * r;
  }
  const double h = 0.5 * pi;
  const double c1 = std::cos(h * x[0]), s1 = std::sin(h * x[0]);
  const double c2 = std::cos(h * x[1]), s2 = std::sin(h * x[1]);
  double shape = 0.0;
  Vector dshape = Vector::Zero(x.size());
  switch (j) {
    case 0:
      shape = c1 * c2;
      dshape[0] = -h * s1 * c2;
      dshape[1] = -h * c1 * s2;
      break;
    case 1:
      shape = 0.5 * c1 * s2;
      dshape[0] = -0.5 * h * s1 * s2;
      dshape[1] = 0.5 * h * c1 * c2;
      break;
    default:
      shape = 0.5 * s1;
      dshape[0] = 0.5 * h * c1;
  }
  f = (1.0 + gval) * shape;
  if (g) *g = (1.0 + gval) * dshape + shape * dg;
}

inline ProblemRegistry build_corpus() {
  ProblemRegistry reg;
  const auto C = Convexity::convex;
  const auto N = Convexity::nonconvex;

  reg.add(make("TP1", 2, 2, {vec({1, 2}), vec({2, 3})}, tp1, vec({-2, -2}), vec({5, 5})), N);
  reg.add(make("TP2", 2, 3, {vec({5, 3}), vec({5, 6}), vec({4, 1})}, tp2, vec({-1, -1}), vec({5, 2})), N);
  reg.add(make("TP3", 2, 3, {vec({4, 1}), vec({5, 2}), vec({6, 4})}, tp3, vec({-1, -1}), vec({5, 2})), N);
  reg.add(make("TP4", 2, 2, {vec({1, 3}), vec({3, 1})}, tp4, vec({-5, -5}), vec({5, 5})), C);
  reg.add(make("TP5", 1, 2, {vec({-1}), vec({3})}, tp5, vec({-5}), vec({5})), C);
  reg.add(make("TP6", 3, 2, {vec({1, 1, 1}), vec({1, -1, 1}), vec({1, -2, 2})}, tp6, vec({0, 0, 0}), vec({1, 1, 1})), N);
  reg.add(make("TP7", 1, 2, {vec({-4}), vec({7})}, tp5, vec({-3}), vec({3})), C);
  reg.add(make("TP8", 2, 2, {vec({1, 3}), vec({3, 1})}, tp4, vec({-4, -4}), vec({4, 4})), C);
  reg.add(make("TP9", 3, 2, {vec({1, 1, 1}), vec({1, -1, 1}), vec({1, -2, 2})}, tp6, vec({-1, -2, -1}), vec({1, 1, 2})), N);
  reg.add(make("TP10", 3, 3, {vec({1, 1, 1}), vec({1, -1, 1}), vec({1, -2, 2})}, tp10, vec({1, -2, 0}), vec({3.5, 2, 1})), N);
  reg.add(make("TP11", 2, 2, {vec({2, 2}), vec({0, 4})}, tp11, vec({-6, -6}), vec({6, 4})), C);
  reg.add(make("TP12", 3, 3, {vec({4, 1}), vec({0, 2}), vec({1, 0})}, tp12, vec({-1, -1, -1}), vec({5, 5, 5})), N);
  reg.add(make("TP13", 2, 3, {vec({2, 3}), vec({4, 5}), vec({2, 0})}, tp2, vec({-1, -1}), vec({5, 5})), N);
  reg.add(make("TP14", 1, 2, {vec({-3}), vec({8})}, tp14, vec({-100}), vec({100})), N);
  reg.add(make("TP15", 2, 2, {vec({1, 1}), vec({0, 2})}, tp11, vec({-2, -2}), vec({5, 5})), C);
  reg.add(make("TP16", 3, 3, {vec({5, 4}), vec({0, 8}), vec({4, 0})}, tp16, vec({0, 0, 0}), vec({1, 1, 1})), C);
  reg.add(make("TP17", 2, 3, {vec({3, 3}), vec({6, 6}), vec({9, 9})}, tp17, vec({-4, -4}), vec({5, 5})), N);
  reg.add(make("TP18", 2, 2, {vec({1}), vec({2})}, tp18, vec({0.01, 0.001}), vec({1, 1})), N);
  reg.add(make("TP19", 5, 2, {Vector::Constant(5, 0.25), Vector::Constant(5, 0.5)}, tp19, Vector::Constant(5, 0.001),
               Vector::Ones(5)),
          N);
  reg.add(make("TP20", 10, 3, {Vector::Constant(10, 0.4), Vector::Constant(10, 0.5), Vector::Constant(10, 0.6)}, tp20,
               Vector::Constant(10, 0.001), Vector::Ones(10)),
          N);
  return reg;
}

}  // namespace corpus_detail

/// The built-in corpus; constructed once and immutable afterwards.
inline const ProblemRegistry& corpus() {
  static const ProblemRegistry registry = corpus_detail::build_corpus();
  return registry;
}

inline const UncertainProblem& get_problem(const std::string& name) { return corpus().get(name); }

inline const std::vector<ProblemDescriptor>& list_problems() { return corpus().list(); }

}  // namespace rqn
