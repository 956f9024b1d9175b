#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "contactnh/constrained.hpp"

namespace contactnh {

/// Reproducible uniform reals: 53 high bits of mt19937_64, identical on every platform.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Vec vector(int size, double lo, double hi);

 private:
  std::mt19937_64 rng_;
};

/// Ambient points in [-radius, radius]^{2n+1}, Newton-projected onto M along the
/// force directions. Points where projection fails are rejected. Throws
/// PreconditionFailed if too few survive.
std::vector<PhasePoint> sample_on_M(const ConstrainedSystem& sys, int count, UniformSource& src, double radius = 1.0);

/// Random quadratic polynomial in all 2n+1 coordinates, coefficients in [-1, 1].
ScalarField random_polynomial(int n, UniformSource& src);

}  // namespace contactnh
