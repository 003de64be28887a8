#pragma once

#include <optional>
#include <vector>

#include "solvlab/grid.hpp"
#include "solvlab/model.hpp"
#include "solvlab/pbsolver.hpp"

namespace solvlab {

struct EnergyBreakdown {
  double term_rho = 0.0;       ///< a |rho|
  double term_pressure = 0.0;  ///< beta r^-3 int (1 - u)
  double term_surface = 0.0;   ///< gamma r^-2 |Du|
  double term_lj = 0.0;        ///< r^-3 int u U
  double term_electric = 0.0;  ///< electrostatic functional at psi
  double total = 0.0;
};

/// Sums the terms in declaration order.
double sum_terms(const EnergyBreakdown& e);

/// Per-cell coefficient of u in the energy for fixed psi:
///   f = -beta/r^3 + U/r^3 - (eps1 - eps0)/(2r) g(psi) - B(psi)/r^3,
/// where g is the per-cell share of |grad psi|^2 (see cell_gradient_energy).
ScalarField unary_cost_field(const ScalarField& psi, const ScalarField& U, const ModelParams& params, double r,
                             const BModel& B = BModel::zero());

/// int f u + gamma r^-2 TV(u), ghost u = 1.
double phase_energy(const PhaseField& u, const ScalarField& f, double gamma, double r);
double phase_energy(const ScalarField& u, const ScalarField& f, double gamma, double r);

/// Exact binary minimiser of phase_energy. gamma = 0 thresholds f (ties go
/// to u = 1); gamma > 0 solves a min-cut on the 6-neighbour cell graph.
PhaseField minimize_phase_field(const ScalarField& f, double gamma, double r);

struct RelaxOptions {
  int iterations = 2000;
  /// Optional snapshots of the primal iterate every `snapshot_every` steps.
  int snapshot_every = 0;
};

struct RelaxResult {
  ScalarField u;                     ///< final iterate, values in [0, 1]
  std::vector<ScalarField> snapshots;
  double energy = 0.0;
};

/// Convex relaxation over u in [0,1] solved by Chambolle-Pock iterations.
RelaxResult relax_phase_field(const ScalarField& f, double gamma, double r, const RelaxOptions& options = {});

PhaseField threshold(const ScalarField& u, double t);

struct ThresholdResult {
  double t = 0.5;
  double energy = 0.0;
  PhaseField u;
};

/// Best superlevel set {u > t} over the distinct values of u (at most
/// max_levels candidates, chosen as quantiles when there are more).
ThresholdResult best_threshold(const ScalarField& u, const ScalarField& f, double gamma, double r,
                               int max_levels = 512);

struct SaddleOptions {
  double tol = 1e-8;            ///< outer energy tolerance, relative to 1 + |total|
  int max_outer = 50;
  double potential_tol = 1e-10;  ///< inner solver tolerance
  std::optional<PhaseField> u0;  ///< start; u = 1 everywhere when empty
  AssemblyOptions assembly;
  SolverOptions solver;
};

struct SaddleSolution {
  PhaseField u;
  ScalarField psi;
  EnergyBreakdown breakdown;
  int outer_iterations = 0;
  bool converged = false;
  bool cycled = false;
  std::vector<double> history;  ///< total after every psi solve
};

/// Alternates psi-maximisation and exact u-minimisation.
SaddleSolution solve_saddle(const SoluteConfiguration& config, const SpeciesTable& species, const BModel& B,
                            const ModelParams& params, const Grid3D& grid, const SaddleOptions& options = {});

/// Same, on pre-assembled charge density Q and LJ field U.
SaddleSolution solve_saddle_fields(const ScalarField& Q, const ScalarField& U, double rho_mass, double r,
                                   const BModel& B, const ModelParams& params, const SaddleOptions& options = {});

EnergyBreakdown energy_breakdown(const SoluteConfiguration& config, const SpeciesTable& species, const PhaseField& u,
                                 const ScalarField& psi, const BModel& B, const ModelParams& params);

EnergyBreakdown energy_breakdown_fields(const ScalarField& Q, const ScalarField& U, double rho_mass, double r,
                                        const PhaseField& u, const ScalarField& psi, const BModel& B,
                                        const ModelParams& params);

}  // namespace solvlab
