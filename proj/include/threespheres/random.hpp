#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "threespheres/common.hpp"

namespace threespheres {

/// SplitMix64 step; used to derive independent child seeds from a root seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for stream `index` under `root`. Deterministic, independent of scheduling.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  return splitmix64(splitmix64(root) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

// The distribution objects of <random> are implementation defined, so the
// conversions below are spelled out to keep streams identical across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return mag * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vector unit_vector(int n) {
    Vector v(n);
    do {
      for (int i = 0; i < n; ++i) v[i] = normal();
    } while (v.norm() == 0.0);
    return v / v.norm();
  }

  /// Uniform point in the ball of radius `radius` centered at the origin.
  Vector in_ball(int n, double radius = 1.0) {
    return radius * std::pow(uniform(), 1.0 / n) * unit_vector(n);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace threespheres
