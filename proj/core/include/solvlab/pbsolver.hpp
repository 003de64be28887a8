#pragma once

#include <vector>

#include "solvlab/error.hpp"
#include "solvlab/grid.hpp"
#include "solvlab/model.hpp"

namespace solvlab {

struct TraceRow {
  int iteration = 0;
  double residual = 0.0;
  double energy = 0.0;
};

struct PotentialSolution {
  ScalarField psi;
  double electric_energy = 0.0;  ///< value of the electrostatic functional at psi
  double residual_norm = 0.0;    ///< relative: CG residual / |Q|, or Newton gradient / (1 + |Q|)
  int iterations = 0;            ///< CG iterations (linear) or Newton steps
  int cg_iterations = 0;         ///< total inner CG iterations
  bool converged = false;
  std::vector<TraceRow> trace;
};

/// Thrown when an iteration limit is hit; carries the best iterate.
class NonConvergenceError : public Error {
public:
  NonConvergenceError(const std::string& what, PotentialSolution best) : Error(what), best_(std::move(best)) {}
  const PotentialSolution& best() const { return best_; }

private:
  PotentialSolution best_;
};

struct SolverOptions {
  int max_cg_iterations = 50000;
  int max_newton_iterations = 200;
  double armijo = 1e-4;  ///< sufficient-increase constant; steps are halved on rejection
};

/// Discrete electrostatic operator for a fixed phase field:
///   (A psi)_c = h^-2 sum_faces k_f (psi_c - psi_nb) + m_c psi_c,
/// with k_f = (eps_a + eps_b) / (2r) on interior faces, eps_c / r on faces
/// against the zero ghost layer, and an optional diagonal m.
class DielectricOperator {
public:
  DielectricOperator(const PhaseField& u, double r, const ModelParams& params);

  const Grid3D& grid() const { return grid_; }
  /// y = A_eps x + diag .* x (diag may be empty).
  void apply(const std::vector<double>& x, const std::vector<double>& diag, std::vector<double>& y) const;
  /// Diagonal of A_eps.
  const std::vector<double>& diagonal() const { return diag_; }
  /// psi^T A_eps psi * h^3, i.e. twice the Dirichlet energy.
  double quadratic_form(const std::vector<double>& psi) const;

private:
  Grid3D grid_;
  std::vector<double> coef_;  ///< eps(u_c) / r per cell
  std::vector<double> diag_;
};

/// Maximises  int Q psi - eps(u)/(2r) |grad psi|^2 - u r^-3 B(psi)  over discrete H^1_0.
/// Linear B (zero or quadratic): PCG to relative residual <= tol.
/// Ionic B: damped Newton until |gradient| <= tol (1 + |Q|).
PotentialSolution solve_potential(const PhaseField& u, const ScalarField& Q, const BModel& B, double r,
                                  const ModelParams& params, double tol, const ScalarField* initial = nullptr,
                                  const SolverOptions& options = {});

/// Electrostatic functional at a given psi (not maximised).
double electric_functional(const PhaseField& u, const ScalarField& Q, const BModel& B, double r,
                           const ModelParams& params, const ScalarField& psi);

/// int eps(u)/(2r) |grad psi|^2
double dirichlet_energy(const PhaseField& u, const ScalarField& psi, double r, const ModelParams& params);

/// int u r^-3 B(psi)
double b_energy(const PhaseField& u, const ScalarField& psi, const BModel& B, double r);

/// Maximiser of the linear problem with the positive part of the charge.
ScalarField comparison_bound(const PhaseField& u, const ScalarField& Q_plus, double r, const ModelParams& params,
                             double tol = 1e-10);

/// True iff psi <= psi_bar + rel_tol * max|psi_bar| in every cell.
bool verify_comparison(const ScalarField& psi, const ScalarField& psi_bar, double rel_tol = 1e-10);

struct DualBoundResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

/// Checks  int eps(u)/(2r)|grad psi|^2 + u r^-3 B(psi) <= E_el / min(c, 1)  (with 1e-6 slack).
DualBoundResult dual_bound_check(const PotentialSolution& sol, const PhaseField& u, const ScalarField& Q,
                                 const BModel& B, double r, const ModelParams& params, double c);

}  // namespace solvlab
