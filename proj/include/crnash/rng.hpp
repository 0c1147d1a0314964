#pragma once

#include <cstdint>
#include <random>

#include "crnash/linalg.hpp"

namespace crnash {

/// Seeded random values with a fixed generation recipe (mt19937_64 plus
/// hand-rolled Box-Muller), so streams are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed ^ 0x9e3779b97f4a7c15ull) {}

  double uniform01() { return std::ldexp(static_cast<double>(gen_() >> 11), -53); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  cplx complex_normal() { return {normal(), normal()}; }

  RVec unit_direction(int dim) {
    RVec v(dim);
    double n = 0;
    do {
      for (auto& x : v) x = normal();
      n = norm2(v);
    } while (n < 1e-12);
    for (auto& x : v) x /= n;
    return v;
  }

  CVec complex_unit(int dim) {
    CVec v(dim);
    double n = 0;
    do {
      for (auto& z : v) z = complex_normal();
      n = norm2(v);
    } while (n < 1e-12);
    for (auto& z : v) z /= n;
    return v;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace crnash
