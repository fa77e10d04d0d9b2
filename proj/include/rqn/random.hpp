#pragma once

// Portable seeded randomness: std::mt19937_64 has a fully specified output
// sequence, and doubles are formed from its top 53 bits, so draws are identical
// on every platform. Substreams are keyed by (seed, stream index).

#include <cstdint>
#include <random>

#include "rqn/types.hpp"

namespace rqn {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Vector uniform_in_box(const Vector& lb, const Vector& ub) {
    Vector x(lb.size());
    for (Eigen::Index d = 0; d < lb.size(); ++d) x[d] = uniform(lb[d], ub[d]);
    return x;
  }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rqn
