#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "fitcoef/special.hpp"

namespace fitcoef {

/// Seeded random stream. Variates are derived from raw 64-bit engine output
/// with our own transforms, so a given seed yields the same draws on every
/// standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  /// Independent stream `index` derived from a master seed.
  static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix(seed) ^ mix(index + 0x632be59bd9b4e019ULL));
  }

  /// Uniform on the open interval (0,1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % bound;
  }

  double normal() { return special::normal_quantile(uniform()); }

  double exponential() { return -std::log(uniform()); }

  /// Chi-square with an integer number of degrees of freedom.
  double chi_square(int dof) {
    double s = 0.0;
    for (int k = 0; k < dof; ++k) {
      const double z = normal();
      s += z * z;
    }
    return s;
  }

  double student_t(int dof) { return normal() / std::sqrt(chi_square(dof) / dof); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace fitcoef
