#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace sp2opt {

// Deterministic random stream. The engine is std::mt19937_64 (bit-exact per
// the standard); value mappings are done here because the standard library's
// distributions are not bit-reproducible across implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Box-Muller without caching the second value: call parity never shifts
  // the stream, which paired dense/efficient runs rely on.
  double normal() {
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double rademacher() { return (gen_() >> 63) ? 1.0 : -1.0; }

  Eigen::VectorXd rademacher_vector(Eigen::Index p) {
    Eigen::VectorXd v(p);
    for (Eigen::Index i = 0; i < p; ++i) v[i] = rademacher();
    return v;
  }

  Eigen::VectorXd normal_vector(Eigen::Index p) {
    Eigen::VectorXd v(p);
    for (Eigen::Index i = 0; i < p; ++i) v[i] = normal();
    return v;
  }

  // Stable derived seed for replicate i of a master seed (splitmix64 step).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace sp2opt
