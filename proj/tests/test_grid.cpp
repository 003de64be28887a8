#include <gtest/gtest.h>

#include <random>

#include "solvlab/grid.hpp"

using namespace solvlab;

namespace {

ScalarField random_field(const Grid3D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ScalarField f(g);
  for (double& v : f.values) v = n(rng);
  return f;
}

}  // namespace

TEST(Grid, RejectsBadShapes) {
  EXPECT_THROW(Grid3D({0, 0, 0}, 0.0, {4, 4, 4}), std::invalid_argument);
  EXPECT_THROW(Grid3D({0, 0, 0}, -1.0, {4, 4, 4}), std::invalid_argument);
  EXPECT_THROW(Grid3D({0, 0, 0}, 0.1, {1, 4, 4}), std::invalid_argument);
}

TEST(Grid, IndexRoundTrip) {
  const Grid3D g({0, 0, 0}, 0.5, {3, 4, 5});
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto p = g.ijk(c);
    EXPECT_EQ(g.index(p[0], p[1], p[2]), c);
  }
  EXPECT_EQ(g.index(1, 0, 0), 1u);  // x fastest
  EXPECT_EQ(g.index(0, 1, 0), 3u);
}

TEST(Grid, CoveringContainsBox) {
  const Grid3D g = Grid3D::covering({-1, 0, 0}, {1.05, 2.0, 0.3}, 0.1);
  EXPECT_GE(g.extent()[0], 1.05 - 1e-12);
  EXPECT_GE(g.extent()[1], 2.0 - 1e-12);
  EXPECT_LT(g.extent()[0], 1.05 + 0.1 + 1e-12);
  EXPECT_DOUBLE_EQ(g.origin()[0], -1.0);
}

TEST(Grid, CellRangeIsClampedAndCovers) {
  const Grid3D g({0, 0, 0}, 0.1, {10, 10, 10});
  std::array<int, 3> lo{}, hi{};
  g.cell_range({0.05, 0.5, 0.95}, 0.2, lo, hi);
  EXPECT_EQ(lo[0], 0);
  EXPECT_EQ(hi[2], 10);
  for (int i = 0; i < 10; ++i) {
    const double x = g.center(i, 5, 9)[0];
    if (std::abs(x - 0.05) <= 0.2) {
      EXPECT_GE(i, lo[0]);
      EXPECT_LT(i, hi[0]);
    }
  }
}

TEST(Grid, DivergenceIsNegativeAdjointOfGradient) {
  const Grid3D g({0, 0, 0}, 0.3, {5, 6, 7});
  const ScalarField f = random_field(g, 1);
  VectorField v(g);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& comp : v.components) {
    for (double& x : comp) x = n(rng);
  }
  const double lhs = inner(gradient(f), v);
  const double rhs = -inner(f, divergence(v));
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs));
}

TEST(Grid, PerimeterCountsGhostFaces) {
  const Grid3D g({0, 0, 0}, 0.5, {4, 4, 4});
  PhaseField u(g, 1);
  EXPECT_EQ(tv_anisotropic(u), 0.0);
  u[g.index(1, 1, 1)] = 0;
  EXPECT_DOUBLE_EQ(tv_anisotropic(u), 6 * 0.25);
  u = PhaseField(g, 1);
  u[g.index(0, 0, 0)] = 0;  // corner cell touches three ghost faces
  EXPECT_DOUBLE_EQ(tv_anisotropic(u), 6 * 0.25);
  u = PhaseField(g, 0);
  EXPECT_DOUBLE_EQ(tv_anisotropic(u), 6 * 16 * 0.25);
  EXPECT_EQ(u.count_zero(), 64u);
}

TEST(Grid, RelaxedPerimeterMatchesBinary) {
  const Grid3D g({0, 0, 0}, 0.2, {5, 5, 5});
  PhaseField u(g, 1);
  ScalarField s(g, 1.0);
  std::mt19937_64 rng(3);
  for (std::size_t c = 0; c < u.size(); ++c) {
    u[c] = rng() % 2;
    s[c] = u[c];
  }
  EXPECT_NEAR(tv_anisotropic(u), tv_anisotropic(s), 1e-14);
}

TEST(Grid, CellGradientEnergySumsFaceDifferences) {
  const Grid3D g({0, 0, 0}, 0.25, {4, 3, 5});
  const ScalarField psi = random_field(g, 4);
  const double h = g.spacing();
  // Every face once, ghost value 0.
  auto val = [&](int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= g.nx() || j >= g.ny() || k >= g.nz()) return 0.0;
    return psi.at(i, j, k);
  };
  double faces = 0.0;
  for (int k = -1; k < g.nz(); ++k) {
    for (int j = -1; j < g.ny(); ++j) {
      for (int i = -1; i < g.nx(); ++i) {
        if (j >= 0 && k >= 0) faces += std::pow(val(i + 1, j, k) - val(i, j, k), 2);
        if (i >= 0 && k >= 0) faces += std::pow(val(i, j + 1, k) - val(i, j, k), 2);
        if (i >= 0 && j >= 0) faces += std::pow(val(i, j, k + 1) - val(i, j, k), 2);
      }
    }
  }
  const double expected = faces * h;  // (diff/h)^2 * h^3
  EXPECT_NEAR(integrate(cell_gradient_energy(psi)), expected, 1e-12 * expected);
}

TEST(Grid, MaskedIntegralSplitsTotal) {
  const Grid3D g({0, 0, 0}, 0.5, {3, 3, 3});
  const ScalarField f = random_field(g, 5);
  PhaseField u(g, 1);
  for (std::size_t c = 0; c < u.size(); c += 2) u[c] = 0;
  EXPECT_NEAR(integrate_masked(f, u, false) + integrate_masked(f, u, true), integrate(f), 1e-13);
}

TEST(Grid, FieldArithmeticChecksGrids) {
  const Grid3D a({0, 0, 0}, 0.5, {3, 3, 3});
  const Grid3D b({0, 0, 0}, 0.25, {3, 3, 3});
  ScalarField fa(a, 1.0);
  const ScalarField fb(b, 1.0);
  EXPECT_THROW(fa += fb, std::invalid_argument);
  fa += ScalarField(a, 2.0);
  EXPECT_EQ(fa.max_abs(), 3.0);
  fa[0] = std::nan("");
  EXPECT_FALSE(fa.all_finite());
}
