#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the solver code they are checked against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Data of the max-of-quadratics subproblem: constraints c_a + g_a^T s + 1/2 s^T H_a s.
struct Quadratics {
  std::vector<double> c;
  std::vector<Vector> g;
  std::vector<Matrix> H;
};

/// phi(lambda) = sum lambda_a c_a - 1/2 gbar^T Hbar^-1 gbar.
inline double dual_value(const Quadratics& q, const std::vector<double>& lambda) {
  const auto n = q.g.front().size();
  Vector gbar = Vector::Zero(n);
  Matrix Hbar = Matrix::Zero(n, n);
  double cbar = 0.0;
  for (std::size_t a = 0; a < q.c.size(); ++a) {
    cbar += lambda[a] * q.c[a];
    gbar += lambda[a] * q.g[a];
    Hbar += lambda[a] * q.H[a];
  }
  return cbar - 0.5 * gbar.dot(Hbar.ldlt().solve(gbar));
}

/// Primal objective max_a (c_a + g_a^T s + 1/2 s^T H_a s).
inline double primal_value(const Quadratics& q, const Vector& s) {
  double out = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < q.c.size(); ++a) out = std::max(out, q.c[a] + q.g[a].dot(s) + 0.5 * s.dot(q.H[a] * s));
  return out;
}

/// Visits every lambda = (k_1..k_K)/N with integer k >= 0 summing to N.
inline void for_each_simplex_point(std::size_t K, int N, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> k(K, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
    if (pos + 1 == K) {
      k[pos] = left;
      visit(k);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, N);
}

/// Maximum of phi over the simplex by grid search. phi is concave, so a coarse
/// grid followed by repeated finer grids on a shrinking neighbourhood of the best
/// point reaches the requested resolution without enumerating the full fine grid.
inline double grid_dual_max(const Quadratics& q, double resolution) {
  const std::size_t K = q.c.size();
  if (K == 1) return dual_value(q, {1.0});
  std::vector<double> best(K, 1.0 / static_cast<double>(K));
  double best_value = -std::numeric_limits<double>::infinity();
  const int N0 = 24;
  for_each_simplex_point(K, N0, [&](const std::vector<int>& k) {
    std::vector<double> lam(K);
    for (std::size_t a = 0; a < K; ++a) lam[a] = static_cast<double>(k[a]) / N0;
    const double v = dual_value(q, lam);
    if (v > best_value) best_value = v, best = lam;
  });
  double h = 1.0 / N0;
  while (h > resolution) {
    const double fine = std::max(resolution, h / 4.0);
    const int steps = 8;  // +/- 2h around the best point in steps of h/4
    std::vector<double> centre = best;
    std::vector<int> offset(K, -steps);
    // Enumerate offsets for the first K-1 coordinates; the last one closes the sum.
    std::function<void(std::size_t)> rec = [&](std::size_t pos) {
      if (pos + 1 == K) {
        std::vector<double> lam(K);
        double sum = 0.0;
        for (std::size_t a = 0; a + 1 < K; ++a) {
          lam[a] = centre[a] + offset[a] * fine;
          if (lam[a] < 0.0) return;
          sum += lam[a];
        }
        lam[K - 1] = 1.0 - sum;
        if (lam[K - 1] < -1e-15) return;
        lam[K - 1] = std::max(0.0, lam[K - 1]);
        const double v = dual_value(q, lam);
        if (v > best_value) best_value = v, best = lam;
        return;
      }
      for (int o = -steps; o <= steps; ++o) {
        offset[pos] = o;
        rec(pos + 1);
      }
    };
    rec(0);
    h = fine;
    if (fine <= resolution) break;
  }
  return best_value;
}

/// Pairwise dominance filter; keeps the first of exact duplicates.
inline bool dominates(const Vector& a, const Vector& b) {
  bool strict = false;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    if (a[j] > b[j]) return false;
    if (a[j] < b[j]) strict = true;
  }
  return strict;
}

inline std::vector<Vector> brute_force_nondominated(const std::vector<Vector>& pts) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool keep = true;
    for (std::size_t k = 0; k < pts.size() && keep; ++k) {
      if (k != i && dominates(pts[k], pts[i])) keep = false;
      if (k < i && pts[k] == pts[i]) keep = false;
    }
    if (keep) out.push_back(pts[i]);
  }
  return out;
}

/// Hypervolume by inclusion-exclusion over all non-empty subsets.
inline double hypervolume_inclusion_exclusion(const std::vector<Vector>& pts, const Vector& ref) {
  const std::size_t N = pts.size();
  double total = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << N); ++mask) {
    Vector corner = Vector::Constant(ref.size(), -std::numeric_limits<double>::infinity());
    int bits = 0;
    for (std::size_t i = 0; i < N; ++i) {
      if (mask & (1u << i)) {
        corner = corner.cwiseMax(pts[i]);
        ++bits;
      }
    }
    double vol = 1.0;
    for (Eigen::Index d = 0; d < ref.size(); ++d) vol *= std::max(0.0, ref[d] - corner[d]);
    total += (bits % 2 == 1 ? 1.0 : -1.0) * vol;
  }
  return total;
}

/// Monte Carlo hypervolume over the box [lo, ref].
inline double hypervolume_monte_carlo(const std::vector<Vector>& pts, const Vector& lo, const Vector& ref,
                                      std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t hits = 0;
  Vector z(ref.size());
  for (std::size_t k = 0; k < samples; ++k) {
    for (Eigen::Index d = 0; d < ref.size(); ++d) z[d] = lo[d] + unit(gen) * (ref[d] - lo[d]);
    for (const auto& p : pts) {
      if ((p.array() <= z.array()).all()) {
        ++hits;
        break;
      }
    }
  }
  double box = 1.0;
  for (Eigen::Index d = 0; d < ref.size(); ++d) box *= ref[d] - lo[d];
  return box * static_cast<double>(hits) / static_cast<double>(samples);
}

/// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
inline Matrix random_spd(std::size_t n, std::mt19937_64& gen, double lo = 0.2, double hi = 5.0) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> eig(lo, hi);
  Matrix A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < A.rows(); ++r)
    for (Eigen::Index c = 0; c < A.cols(); ++c) A(r, c) = normal(gen);
  const Matrix Q = A.householderQr().householderQ();
  Vector d(static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < d.size(); ++k) d[k] = eig(gen);
  Matrix H = Q * d.asDiagonal() * Q.transpose();
  return 0.5 * (H + H.transpose());
}

// Random instance shaped like a robust evaluation: per objective the largest
// value sits at zero and the rest are below it.
inline Quadratics random_instance(std::mt19937_64& gen, std::size_t n, std::size_t m, std::size_t p) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> below(-1.0, 0.0);
  Quadratics q;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t top = static_cast<std::size_t>(gen() % p);
    for (std::size_t i = 0; i < p; ++i) {
      q.c.push_back(i == top ? 0.0 : below(gen));
      Vector g(static_cast<Eigen::Index>(n));
      for (Eigen::Index d = 0; d < g.size(); ++d) g[d] = normal(gen);
      q.g.push_back(g);
      q.H.push_back(oracle::random_spd(n, gen));
    }
  }
  return q;
}

/// Central differences with one Richardson extrapolation step, O(h^4) accurate.
inline Vector richardson_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-3) {
  Vector g(x.size());
  for (Eigen::Index d = 0; d < x.size(); ++d) {
    const double step = h * std::max(1.0, std::abs(x[d]));
    auto central = [&](double t) {
      Vector a = x, b = x;
      a[d] += t;
      b[d] -= t;
      return (f(a) - f(b)) / (2.0 * t);
    };
    g[d] = (4.0 * central(step / 2.0) - central(step)) / 3.0;
  }
  return g;
}

}  // namespace oracle
