#pragma once

#include <cstdint>
#include <random>

#include "reslab/base.hpp"

namespace reslab {

/// Deterministic uniform generator. mt19937_64 output is pinned by the C++
/// standard; the unit() mapping avoids std::uniform_real_distribution, whose
/// stream is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  double unit() {  // [0, 1)
    return static_cast<double>(bits() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

  cplx unit_square() { return {uniform(-0.5, 0.5), uniform(-0.5, 0.5)}; }

  /// Uniform over the closed disc D(center, radius).
  cplx in_disc(cplx center, double radius) {
    const double r = radius * std::sqrt(unit());
    const double th = 2.0 * M_PI * unit();
    return center + cplx{r * std::cos(th), r * std::sin(th)};
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace reslab
