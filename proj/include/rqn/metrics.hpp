#pragma once

// Front quality metrics (Delta-spread, exact hypervolume for m <= 3) and
// performance profiles over per-problem solver scores.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "rqn/solver.hpp"

namespace rqn {

/// Per-objective best-known minima and maxima.
struct ObjectiveExtremes {
  Vector min;
  Vector max;
};

inline ObjectiveExtremes objective_extremes(const std::vector<std::vector<Vector>>& fronts) {
  ObjectiveExtremes ext;
  for (const auto& front : fronts) {
    for (const auto& y : front) {
      if (ext.min.size() == 0) {
        ext.min = y;
        ext.max = y;
      } else {
        ext.min = ext.min.cwiseMin(y);
        ext.max = ext.max.cwiseMax(y);
      }
    }
  }
  if (ext.min.size() == 0) throw EmptyFront("extremes need at least one point", {});
  return ext;
}

inline std::vector<Vector> remove_exact_duplicates(const std::vector<Vector>& points) {
  std::vector<Vector> out;
  for (const auto& y : points) {
    if (std::none_of(out.begin(), out.end(), [&](const Vector& z) { return z == y; })) out.push_back(y);
  }
  return out;
}

/// Delta-spread of one objective's values (already deduplicated) against [lo, hi].
inline double delta_spread_1d(std::vector<double> f, double lo, double hi) {
  std::sort(f.begin(), f.end());
  const std::size_t N = f.size();
  const double d_first = std::abs(f.front() - lo);
  const double d_last = std::abs(hi - f.back());
  double mean_gap = 0.0;
  if (N > 1) mean_gap = (f.back() - f.front()) / static_cast<double>(N - 1);
  double deviation = 0.0;
  for (std::size_t k = 0; k + 1 < N; ++k) deviation += std::abs((f[k + 1] - f[k]) - mean_gap);
  const double numerator = d_first + d_last + deviation;
  const double denominator = d_first + d_last + static_cast<double>(N - 1) * mean_gap;
  if (denominator == 0.0) return 0.0;
  return numerator / denominator;
}

/// max over objectives of the one-dimensional Delta-spread; duplicates are removed first.
inline double delta_spread(const std::vector<Vector>& front, const ObjectiveExtremes& extremes) {
  if (front.empty()) throw EmptyFront("Delta-spread of an empty front", {});
  const auto points = remove_exact_duplicates(front);
  const auto m = points.front().size();
  if (extremes.min.size() != m || extremes.max.size() != m) throw ConfigError("extremes have wrong dimension");
  double out = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    std::vector<double> f;
    f.reserve(points.size());
    for (const auto& y : points) f.push_back(y[j]);
    out = std::max(out, delta_spread_1d(std::move(f), extremes.min[j], extremes.max[j]));
  }
  return out;
}

/// Componentwise maximum plus 10% of the range (0.1 * max(1, |max|) when the range is zero).
inline Vector reference_point(const std::vector<std::vector<Vector>>& fronts) {
  const auto ext = objective_extremes(fronts);
  Vector ref(ext.max.size());
  for (Eigen::Index j = 0; j < ref.size(); ++j) {
    const double range = ext.max[j] - ext.min[j];
    ref[j] = ext.max[j] + (range > 0.0 ? 0.1 * range : 0.1 * std::max(1.0, std::abs(ext.max[j])));
  }
  return ref;
}

namespace detail {

/// Area dominated by 2-D points (all strictly below ref) w.r.t. ref.
inline double hypervolume_2d(std::vector<std::pair<double, double>> pts, double r1, double r2) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double ceiling = r2;
  for (const auto& [f1, f2] : pts) {
    if (f2 < ceiling) {
      area += (r1 - f1) * (ceiling - f2);
      ceiling = f2;
    }
  }
  return area;
}

}  // namespace detail

/// Exact hypervolume for m in {1, 2, 3}. Points not strictly better than ref in
/// every objective are ignored; their number is stored in *dropped when given.
inline double hypervolume(const std::vector<Vector>& front, const Vector& ref, std::size_t* dropped = nullptr) {
  const auto m = ref.size();
  if (m > 3) throw UnsupportedDimension("hypervolume supports m <= 3, got m=" + std::to_string(m));
  std::vector<Vector> pts;
  std::size_t skipped = 0;
  for (const auto& y : front) {
    if (y.size() != m) throw ConfigError("front point has wrong dimension");
    if ((y.array() < ref.array()).all()) pts.push_back(y);
    else ++skipped;
  }
  if (dropped != nullptr) *dropped = skipped;
  if (pts.empty()) return 0.0;

  if (m == 1) {
    double best = pts.front()[0];
    for (const auto& y : pts) best = std::min(best, y[0]);
    return ref[0] - best;
  }
  if (m == 2) {
    std::vector<std::pair<double, double>> flat;
    for (const auto& y : pts) flat.emplace_back(y[0], y[1]);
    return detail::hypervolume_2d(std::move(flat), ref[0], ref[1]);
  }
  std::sort(pts.begin(), pts.end(), [](const Vector& a, const Vector& b) { return a[2] < b[2]; });
  double volume = 0.0;
  std::vector<std::pair<double, double>> slice;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    slice.emplace_back(pts[k][0], pts[k][1]);
    const double top = (k + 1 < pts.size()) ? pts[k + 1][2] : ref[2];
    const double thickness = top - pts[k][2];
    if (thickness > 0.0) volume += thickness * detail::hypervolume_2d(slice, ref[0], ref[1]);
  }
  return volume;
}

// ---------------------------------------------------------------------------
// Performance profiles

enum class Orientation { lower_is_better, higher_is_better };

inline constexpr double kScoreFloor = 1e-12;

struct ProfileInput {
  Matrix scores;  // problems x solvers; +inf marks a failure
  Orientation orientation = Orientation::lower_is_better;
  std::vector<std::string> solvers;
};

struct ProfileCurve {
  std::string solver;
  std::vector<std::pair<double, double>> points;  // (tau, rho), tau ascending
  double rho_infinity = 0.0;                      // fraction of problems with a finite ratio

  /// Right-continuous step evaluation.
  double rho(double tau) const {
    double out = 0.0;
    for (const auto& [t, r] : points) {
      if (t <= tau) out = r;
      else break;
    }
    return out;
  }
};

/// Ratios r_ps = score_ps / min_s score_ps after orientation handling. Higher-is-better
/// scores are inverted; zero lower-is-better scores are raised to kScoreFloor.
inline Matrix performance_ratios(const ProfileInput& input) {
  const auto P = input.scores.rows();
  const auto S = input.scores.cols();
  Matrix cost(P, S);
  for (Eigen::Index a = 0; a < P; ++a) {
    for (Eigen::Index s = 0; s < S; ++s) {
      const double v = input.scores(a, s);
      if (std::isnan(v) || v < 0.0) throw ConfigError("profile scores must be nonnegative or +inf");
      double c = v;
      if (input.orientation == Orientation::higher_is_better) c = (v == 0.0 || std::isinf(v)) ? std::numeric_limits<double>::infinity() : 1.0 / v;
      if (v == std::numeric_limits<double>::infinity()) c = std::numeric_limits<double>::infinity();
      if (std::isfinite(c)) c = std::max(c, kScoreFloor);
      cost(a, s) = c;
    }
  }
  Matrix ratio(P, S);
  for (Eigen::Index a = 0; a < P; ++a) {
    const double best = cost.row(a).minCoeff();
    for (Eigen::Index s = 0; s < S; ++s) {
      if (!std::isfinite(cost(a, s))) ratio(a, s) = std::numeric_limits<double>::infinity();
      else if (cost(a, s) == best) ratio(a, s) = 1.0;
      else ratio(a, s) = cost(a, s) / best;
    }
  }
  return ratio;
}

/// One curve per solver, all sampled at the union of breakpoints {1} and every finite ratio.
inline std::vector<ProfileCurve> performance_profile(const ProfileInput& input) {
  const auto P = input.scores.rows();
  const auto S = input.scores.cols();
  if (P == 0 || S == 0) throw ConfigError("profile needs at least one problem and one solver");
  if (!input.solvers.empty() && static_cast<Eigen::Index>(input.solvers.size()) != S)
    throw ConfigError("solver names do not match the score columns");
  const Matrix ratio = performance_ratios(input);

  std::vector<double> taus{1.0};
  for (Eigen::Index a = 0; a < P; ++a)
    for (Eigen::Index s = 0; s < S; ++s)
      if (std::isfinite(ratio(a, s))) taus.push_back(ratio(a, s));
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  std::vector<ProfileCurve> curves;
  for (Eigen::Index s = 0; s < S; ++s) {
    ProfileCurve curve;
    curve.solver = input.solvers.empty() ? "solver" + std::to_string(s + 1) : input.solvers[static_cast<std::size_t>(s)];
    for (double tau : taus) {
      Eigen::Index count = 0;
      for (Eigen::Index a = 0; a < P; ++a)
        if (ratio(a, s) <= tau) ++count;
      curve.points.emplace_back(tau, static_cast<double>(count) / static_cast<double>(P));
    }
    Eigen::Index finite = 0;
    for (Eigen::Index a = 0; a < P; ++a)
      if (std::isfinite(ratio(a, s))) ++finite;
    curve.rho_infinity = static_cast<double>(finite) / static_cast<double>(P);
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace rqn
