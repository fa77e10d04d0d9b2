#pragma once

#include <cstddef>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rqn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what) : std::runtime_error(what), kind_(std::move(kind)) {}

  /// Short machine-readable category, e.g. "evaluation" or "config".
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& what) : Error("invariant", what) {}
};

class UnknownProblem : public Error {
 public:
  explicit UnknownProblem(const std::string& what) : Error("unknown-problem", what) {}
};

class UnsupportedDimension : public Error {
 public:
  explicit UnsupportedDimension(const std::string& what) : Error("unsupported-dimension", what) {}
};

class EmptyFront : public Error {
 public:
  EmptyFront(const std::string& what, std::vector<std::string> statuses)
      : Error("empty-front", what), statuses_(std::move(statuses)) {}

  /// Termination status of every start, in start order.
  const std::vector<std::string>& statuses() const noexcept { return statuses_; }

 private:
  std::vector<std::string> statuses_;
};

inline double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

inline std::string format_vector(const Vector& v) {
  std::ostringstream out;
  out.precision(10);
  out << "(";
  for (Eigen::Index d = 0; d < v.size(); ++d) out << (d > 0 ? ", " : "") << v[d];
  out << ")";
  return out.str();
}

}  // namespace rqn
