#pragma once

// Double integral of 1/|x - y| over the unit cube: closed form and a seeded
// Monte Carlo estimate.

#include <cmath>
#include <cstdint>
#include <random>

namespace oracle {

inline double cube_coulomb_closed_form() {
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  const double pi = 3.14159265358979323846;
  return 2.0 * ((1.0 + s2 - 2.0 * s3) / 5.0 - pi / 3.0 + std::log((1.0 + s2) * (2.0 + s3)));
}

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Uses the autocorrelation form: t uniform in [-1,1]^3 weighted by prod(1-|t_a|),
// sampled as the difference of two uniform points.
inline McEstimate cube_coulomb_monte_carlo(std::uint64_t seed, long samples) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double s = 0.0, s2 = 0.0;
  for (long n = 0; n < samples; ++n) {
    const double dx = u(rng) - u(rng), dy = u(rng) - u(rng), dz = u(rng) - u(rng);
    const double v = 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
    s += v;
    s2 += v * v;
  }
  McEstimate e;
  e.mean = s / samples;
  e.stderr_ = std::sqrt((s2 / samples - e.mean * e.mean) / samples);
  return e;
}

}  // namespace oracle
