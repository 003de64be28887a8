#include <gtest/gtest.h>

#include <random>

#include "oracles/finite_difference.hpp"
#include "solvlab/error.hpp"
#include "solvlab/pbsolver.hpp"

using namespace solvlab;

namespace {

const Grid3D kGrid({0, 0, 0}, 0.1, {8, 7, 6});

ScalarField random_field(std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  ScalarField f(kGrid);
  for (double& v : f.values) v = n(rng);
  return f;
}

PhaseField random_phase(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PhaseField u(kGrid, 1);
  for (auto& v : u.values) v = (rng() % 3) != 0;
  return u;
}

ModelParams dielectric() {
  ModelParams p;
  p.eps0 = 1.0;
  p.eps1 = 5.0;
  return p;
}

BModel salt() { return BModel::ionic({{0.5, 1.0}, {0.5, -1.0}}, 1.0); }

// Relative size of the functional's gradient at psi, probed along random directions.
double stationarity(const PhaseField& u, const ScalarField& Q, const BModel& B, double r, const ModelParams& p,
                    const ScalarField& psi) {
  auto F = [&](const std::vector<double>& x) {
    ScalarField f(kGrid);
    f.values = x;
    return electric_functional(u, Q, B, r, p, f);
  };
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const ScalarField dir = random_field(100 + s);
    const double d = oracle::directional_derivative(F, psi.values, dir.values, 1e-4);
    const double scale = std::sqrt(inner(Q, Q) * inner(dir, dir));
    worst = std::max(worst, std::abs(d) / scale);
  }
  return worst;
}

}  // namespace

TEST(Operator, SymmetricPositive) {
  const PhaseField u = random_phase(1);
  const DielectricOperator op(u, 0.3, dielectric());
  const ScalarField x = random_field(2), y = random_field(3);
  std::vector<double> ax, ay;
  op.apply(x.values, {}, ax);
  op.apply(y.values, {}, ay);
  double xay = 0.0, yax = 0.0;
  for (std::size_t c = 0; c < ax.size(); ++c) {
    xay += x.values[c] * ay[c];
    yax += y.values[c] * ax[c];
  }
  EXPECT_NEAR(xay, yax, 1e-12 * std::abs(xay));
  EXPECT_GT(op.quadratic_form(x.values), 0.0);
}

TEST(Operator, DirichletEnergyIsUnaryInPhase) {
  // Arithmetic-mean faces: the Dirichlet energy is linear in u with the cell weights g_c.
  const PhaseField u = random_phase(4);
  const ScalarField psi = random_field(5);
  const ModelParams p = dielectric();
  const double r = 0.7;
  const ScalarField g = cell_gradient_energy(psi);
  double expected = 0.0;
  for (std::size_t c = 0; c < g.size(); ++c) expected += p.eps(u[c]) / (2 * r) * g[c];
  expected *= kGrid.cell_volume();
  EXPECT_NEAR(dirichlet_energy(u, psi, r, p), expected, 1e-12 * expected);
}

TEST(Solve, LinearIsStationaryAndHalfWork) {
  const PhaseField u = random_phase(6);
  const ScalarField Q = random_field(7);
  for (const BModel& B : {BModel::zero(), BModel::quadratic(2.0)}) {
    const auto sol = solve_potential(u, Q, B, 0.5, dielectric(), 1e-12);
    EXPECT_TRUE(sol.converged);
    EXPECT_LT(stationarity(u, Q, B, 0.5, dielectric(), sol.psi), 1e-7);
    EXPECT_NEAR(sol.electric_energy, 0.5 * inner(Q, sol.psi), 1e-9 * std::abs(sol.electric_energy));
  }
}

TEST(Solve, IonicNewtonIsStationary) {
  const PhaseField u = random_phase(8);
  ScalarField Q = random_field(9, 20.0);
  for (double& v : Q.values) v += 400.0;
  const auto sol = solve_potential(u, Q, salt(), 0.5, dielectric(), 1e-12);
  EXPECT_TRUE(sol.converged);
  EXPECT_GT(sol.psi.max_abs(), 1.0);  // nonlinear regime
  EXPECT_LT(stationarity(u, Q, salt(), 0.5, dielectric(), sol.psi), 1e-7);
}

TEST(Solve, IonicLinearisesToQuadratic) {
  // 1:1 salt with c = 1/2 has B''(0) = 1.
  const PhaseField u(kGrid, 1);
  const ScalarField Q = random_field(10, 1e-4);
  const auto a = solve_potential(u, Q, salt(), 1.0, dielectric(), 1e-12);
  const auto b = solve_potential(u, Q, BModel::quadratic(1.0), 1.0, dielectric(), 1e-12);
  EXPECT_NEAR(a.electric_energy, b.electric_energy, 1e-6 * b.electric_energy);
}

TEST(Solve, WarmStartHelps) {
  const PhaseField u = random_phase(11);
  const ScalarField Q = random_field(12);
  const auto cold = solve_potential(u, Q, BModel::zero(), 0.5, dielectric(), 1e-10);
  const auto warm = solve_potential(u, Q, BModel::zero(), 0.5, dielectric(), 1e-10, &cold.psi);
  EXPECT_LE(warm.iterations, 1);
}

TEST(Solve, Failures) {
  const PhaseField u(kGrid, 1);
  ScalarField Q = random_field(13);
  SolverOptions tight;
  tight.max_cg_iterations = 2;
  try {
    solve_potential(u, Q, BModel::zero(), 1.0, dielectric(), 1e-12, nullptr, tight);
    FAIL() << "expected NonConvergenceError";
  } catch (const NonConvergenceError& e) {
    EXPECT_FALSE(e.best().converged);
    EXPECT_EQ(e.best().psi.size(), Q.size());
  }
  Q[3] = std::nan("");
  EXPECT_THROW(solve_potential(u, Q, BModel::zero(), 1.0, dielectric(), 1e-10), NumericalError);
  EXPECT_THROW(solve_potential(PhaseField(Grid3D({0, 0, 0}, 0.2, {3, 3, 3})), random_field(1), BModel::zero(), 1.0,
                               dielectric(), 1e-10),
               std::invalid_argument);
}

TEST(Comparison, IonicBelowPositivePartBound) {
  const PhaseField u = random_phase(14);
  const ScalarField Q = random_field(15, 5.0);
  const auto sol = solve_potential(u, Q, salt(), 0.5, dielectric(), 1e-12);
  const ScalarField bar = comparison_bound(u, positive_part(Q), 0.5, dielectric(), 1e-12);
  EXPECT_TRUE(verify_comparison(sol.psi, bar));
  ScalarField probe = bar;
  probe[0] = bar[0] + 0.5 * bar.max_abs() + 1.0;
  EXPECT_FALSE(verify_comparison(probe, bar));
}

TEST(DualBound, QuadraticAndIonic) {
  const PhaseField u = random_phase(16);
  const ScalarField Q = random_field(17, 5.0);
  for (const BModel& B : {BModel::quadratic(1.5), salt()}) {
    const auto sol = solve_potential(u, Q, B, 0.5, dielectric(), 1e-12);
    const double c = B.is_quadratic() ? 1.0 : check_B2(B, -sol.psi.max_abs(), sol.psi.max_abs(), 2001);
    const auto res = dual_bound_check(sol, u, Q, B, 0.5, dielectric(), c);
    EXPECT_TRUE(res.ok) << res.lhs << " vs " << res.rhs;
    EXPECT_GT(res.lhs, 0.0);
  }
  EXPECT_THROW(dual_bound_check({}, u, Q, BModel::quadratic(1.0), 0.5, dielectric(), 0.0), std::invalid_argument);
}
