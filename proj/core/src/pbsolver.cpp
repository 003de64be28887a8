#include "solvlab/pbsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace solvlab {

namespace {

double dot_plain(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_plain(const std::vector<double>& a) { return std::sqrt(dot_plain(a, a)); }

void require_same_grid(const Grid3D& a, const Grid3D& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

struct CgResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// Jacobi-preconditioned conjugate gradients on (A_eps + diag) x = b.
CgResult pcg(const DielectricOperator& op, const std::vector<double>& mass, const std::vector<double>& b,
             std::vector<double>& x, double rel_tol, int max_iter) {
  const std::size_t n = b.size();
  CgResult res;
  const double bnorm = norm_plain(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  std::vector<double> inv_diag(n);
  const auto& d = op.diagonal();
  for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / (d[i] + (mass.empty() ? 0.0 : mass[i]));

  std::vector<double> r(n), z(n), p(n), q(n);
  op.apply(x, mass, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm = norm_plain(r);
  if (!std::isfinite(rnorm)) throw NumericalError("pcg: non-finite residual");
  if (rnorm <= rel_tol * bnorm) {
    res.relative_residual = rnorm / bnorm;
    res.converged = true;
    return res;
  }
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot_plain(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    op.apply(p, mass, q);
    const double pq = dot_plain(p, q);
    if (!(pq > 0.0)) throw NumericalError("pcg: operator is not positive definite along the search direction");
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rnorm = norm_plain(r);
    res.iterations = it;
    if (!std::isfinite(rnorm)) throw NumericalError("pcg: non-finite residual");
    if (rnorm <= rel_tol * bnorm) {
      res.relative_residual = rnorm / bnorm;
      res.converged = true;
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = dot_plain(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.relative_residual = rnorm / bnorm;
  return res;
}

double sum_b(const PhaseField& u, const std::vector<double>& psi, const BModel& B) {
  if (B.is_zero()) return 0.0;
  double s = 0.0;
  for (std::size_t c = 0; c < psi.size(); ++c) {
    if (u.values[c]) s += b_value(B, psi[c]);
  }
  return s;
}

double functional_value(const DielectricOperator& op, const PhaseField& u, const ScalarField& Q, const BModel& B,
                        double r, const std::vector<double>& psi) {
  const double vol = op.grid().cell_volume();
  const double linear = dot_plain(Q.values, psi) * vol;
  const double quad = op.quadratic_form(psi);
  const double penalty = sum_b(u, psi, B) * vol / (r * r * r);
  return linear - 0.5 * quad - penalty;
}

}  // namespace

// ---------------------------------------------------------------- operator

DielectricOperator::DielectricOperator(const PhaseField& u, double r, const ModelParams& params)
    : grid_(u.grid), coef_(u.grid.cell_count()), diag_(u.grid.cell_count()) {
  if (!(r > 0.0)) throw std::invalid_argument("DielectricOperator: r must be positive");
  for (std::size_t c = 0; c < coef_.size(); ++c) coef_[c] = params.eps(u.values[c]) / r;
  const int nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
  const std::size_t sy = static_cast<std::size_t>(nx), sz = sy * ny;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = grid_.index(i, j, k);
        const double e = coef_[c];
        double acc = 0.0;
        acc += i > 0 ? 0.5 * (e + coef_[c - 1]) : e;
        acc += i + 1 < nx ? 0.5 * (e + coef_[c + 1]) : e;
        acc += j > 0 ? 0.5 * (e + coef_[c - sy]) : e;
        acc += j + 1 < ny ? 0.5 * (e + coef_[c + sy]) : e;
        acc += k > 0 ? 0.5 * (e + coef_[c - sz]) : e;
        acc += k + 1 < nz ? 0.5 * (e + coef_[c + sz]) : e;
        diag_[c] = acc * inv_h2;
      }
    }
  }
}

void DielectricOperator::apply(const std::vector<double>& x, const std::vector<double>& diag,
                               std::vector<double>& y) const {
  const int nx = grid_.nx(), ny = grid_.ny(), nz = grid_.nz();
  const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
  const std::size_t sy = static_cast<std::size_t>(nx), sz = sy * ny;
  y.resize(x.size());
  const double* cf = coef_.data();
  const double* xv = x.data();
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      const std::size_t base = grid_.index(0, j, k);
      for (int i = 0; i < nx; ++i) {
        const std::size_t c = base + i;
        const double e = cf[c];
        const double xc = xv[c];
        double acc = 0.0;
        acc += i > 0 ? 0.5 * (e + cf[c - 1]) * (xc - xv[c - 1]) : e * xc;
        acc += i + 1 < nx ? 0.5 * (e + cf[c + 1]) * (xc - xv[c + 1]) : e * xc;
        acc += j > 0 ? 0.5 * (e + cf[c - sy]) * (xc - xv[c - sy]) : e * xc;
        acc += j + 1 < ny ? 0.5 * (e + cf[c + sy]) * (xc - xv[c + sy]) : e * xc;
        acc += k > 0 ? 0.5 * (e + cf[c - sz]) * (xc - xv[c - sz]) : e * xc;
        acc += k + 1 < nz ? 0.5 * (e + cf[c + sz]) * (xc - xv[c + sz]) : e * xc;
        y[c] = acc * inv_h2 + (diag.empty() ? 0.0 : diag[c] * xc);
      }
    }
  }
}

double DielectricOperator::quadratic_form(const std::vector<double>& psi) const {
  std::vector<double> y;
  apply(psi, {}, y);
  return dot_plain(psi, y) * grid_.cell_volume();
}

// ---------------------------------------------------------------- solver

PotentialSolution solve_potential(const PhaseField& u, const ScalarField& Q, const BModel& B, double r,
                                  const ModelParams& params, double tol, const ScalarField* initial,
                                  const SolverOptions& options) {
  require_same_grid(u.grid, Q.grid, "solve_potential");
  if (!(tol > 0.0)) throw std::invalid_argument("solve_potential: tol must be positive");
  if (!Q.all_finite()) throw NumericalError("solve_potential: charge density contains NaN or infinity");
  params.validate();

  const DielectricOperator op(u, r, params);
  const std::size_t n = Q.size();
  const double vol = Q.grid.cell_volume();
  const double r3 = r * r * r;

  PotentialSolution sol;
  sol.psi = ScalarField(Q.grid);
  if (initial) {
    require_same_grid(initial->grid, Q.grid, "solve_potential(initial)");
    sol.psi.values = initial->values;
  }

  if (B.is_linear()) {
    std::vector<double> mass;
    if (B.is_quadratic()) {
      const double k = std::get<BModel::Quadratic>(B.variant()).stiffness;
      mass.resize(n);
      for (std::size_t c = 0; c < n; ++c) mass[c] = u.values[c] ? k / r3 : 0.0;
    }
    const CgResult cg = pcg(op, mass, Q.values, sol.psi.values, tol, options.max_cg_iterations);
    sol.iterations = cg.iterations;
    sol.cg_iterations = cg.iterations;
    sol.residual_norm = cg.relative_residual;
    sol.converged = cg.converged;
    sol.electric_energy = functional_value(op, u, Q, B, r, sol.psi.values);
    sol.trace.push_back({cg.iterations, cg.relative_residual, sol.electric_energy});
    if (!cg.converged) {
      std::ostringstream os;
      os << "solve_potential: CG stopped after " << cg.iterations << " iterations at relative residual "
         << cg.relative_residual;
      throw NonConvergenceError(os.str(), std::move(sol));
    }
    return sol;
  }

  // Damped Newton on the concave functional.
  const double qnorm = std::sqrt(dot_plain(Q.values, Q.values) * vol);
  const double target = tol * (1.0 + qnorm);
  std::vector<double>& psi = sol.psi.values;
  std::vector<double> grad(n), curvature(n), step(n), trial(n), tmp(n);

  auto gradient_at = [&](const std::vector<double>& x, std::vector<double>& g) {
    op.apply(x, {}, tmp);
    for (std::size_t c = 0; c < n; ++c) {
      g[c] = Q.values[c] - tmp[c] - (u.values[c] ? b_subgradient(B, x[c]) / r3 : 0.0);
    }
    return std::sqrt(dot_plain(g, g) * vol);
  };

  double energy = functional_value(op, u, Q, B, r, psi);
  double gnorm = gradient_at(psi, grad);
  if (!std::isfinite(energy) || !std::isfinite(gnorm)) throw NumericalError("solve_potential: non-finite start");
  for (int it = 0;; ++it) {
    sol.trace.push_back({it, gnorm / (1.0 + qnorm), energy});
    sol.iterations = it;
    sol.residual_norm = gnorm / (1.0 + qnorm);
    sol.electric_energy = energy;
    if (gnorm <= target) {
      sol.converged = true;
      return sol;
    }
    if (it >= options.max_newton_iterations) break;

    for (std::size_t c = 0; c < n; ++c) curvature[c] = u.values[c] ? b_curvature(B, psi[c]) / r3 : 0.0;
    std::fill(step.begin(), step.end(), 0.0);
    const double forcing = std::clamp(0.1 * gnorm / (1.0 + qnorm), 1e-12, 1e-3);
    const CgResult cg = pcg(op, curvature, grad, step, forcing, options.max_cg_iterations);
    sol.cg_iterations += cg.iterations;

    const double slope = dot_plain(grad, step) * vol;
    double t = 1.0;
    bool accepted = false;
    double new_energy = energy, new_gnorm = gnorm;
    while (t > 1e-14) {
      for (std::size_t c = 0; c < n; ++c) trial[c] = psi[c] + t * step[c];
      try {
        new_energy = functional_value(op, u, Q, B, r, trial);
      } catch (const OverflowError&) {
        t *= 0.5;
        continue;
      }
      if (std::isfinite(new_energy) && new_energy >= energy + options.armijo * t * slope) {
        accepted = true;
        break;
      }
      // At round-off level the energy test is blind; fall back to gradient decrease.
      if (t == 1.0 && std::abs(new_energy - energy) <= 1e-13 * std::max(1.0, std::abs(energy))) {
        std::vector<double> g2(n);
        const double gn2 = gradient_at(trial, g2);
        if (gn2 < gnorm) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) break;
    psi.swap(trial);
    energy = new_energy;
    new_gnorm = gradient_at(psi, grad);
    if (!std::isfinite(new_gnorm)) throw NumericalError("solve_potential: non-finite gradient");
    gnorm = new_gnorm;
  }
  std::ostringstream os;
  os << "solve_potential: Newton stopped at gradient " << gnorm << " (target " << target << ")";
  throw NonConvergenceError(os.str(), std::move(sol));
}

double electric_functional(const PhaseField& u, const ScalarField& Q, const BModel& B, double r,
                           const ModelParams& params, const ScalarField& psi) {
  require_same_grid(u.grid, Q.grid, "electric_functional");
  require_same_grid(u.grid, psi.grid, "electric_functional");
  const DielectricOperator op(u, r, params);
  return functional_value(op, u, Q, B, r, psi.values);
}

double dirichlet_energy(const PhaseField& u, const ScalarField& psi, double r, const ModelParams& params) {
  require_same_grid(u.grid, psi.grid, "dirichlet_energy");
  const DielectricOperator op(u, r, params);
  return 0.5 * op.quadratic_form(psi.values);
}

double b_energy(const PhaseField& u, const ScalarField& psi, const BModel& B, double r) {
  require_same_grid(u.grid, psi.grid, "b_energy");
  return sum_b(u, psi.values, B) * psi.grid.cell_volume() / (r * r * r);
}

ScalarField comparison_bound(const PhaseField& u, const ScalarField& Q_plus, double r, const ModelParams& params,
                             double tol) {
  return solve_potential(u, Q_plus, BModel::zero(), r, params, tol).psi;
}

bool verify_comparison(const ScalarField& psi, const ScalarField& psi_bar, double rel_tol) {
  require_same_grid(psi.grid, psi_bar.grid, "verify_comparison");
  const double slack = rel_tol * psi_bar.max_abs();
  for (std::size_t c = 0; c < psi.size(); ++c) {
    if (psi.values[c] > psi_bar.values[c] + slack) return false;
  }
  return true;
}

DualBoundResult dual_bound_check(const PotentialSolution& sol, const PhaseField& u, const ScalarField& Q,
                                 const BModel& B, double r, const ModelParams& params, double c) {
  (void)Q;
  if (!(c > 0.0)) throw std::invalid_argument("dual_bound_check: (B2) constant must be positive");
  DualBoundResult out;
  out.lhs = dirichlet_energy(u, sol.psi, r, params) + b_energy(u, sol.psi, B, r);
  out.rhs = sol.electric_energy / std::min(c, 1.0);
  out.ok = out.lhs <= out.rhs * (1.0 + 1e-6) + 1e-300;
  return out;
}

}  // namespace solvlab
