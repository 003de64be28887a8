#include "solvlab/interface.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "solvlab/error.hpp"
#include "solvlab/maxflow.hpp"

namespace solvlab {

namespace {

void require_same_grid(const Grid3D& a, const Grid3D& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": fields live on different grids");
}

std::uint64_t fingerprint(const PhaseField& u) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint8_t v : u.values) {
    h ^= v;
    h *= 1099511628211ULL;
  }
  return h;
}

double unary_part(const ScalarField& f, const std::vector<double>& u_values) {
  double s = 0.0;
  for (std::size_t c = 0; c < u_values.size(); ++c) s += f.values[c] * u_values[c];
  return s * f.grid.cell_volume();
}

}  // namespace

double sum_terms(const EnergyBreakdown& e) {
  return e.term_rho + e.term_pressure + e.term_surface + e.term_lj + e.term_electric;
}

ScalarField unary_cost_field(const ScalarField& psi, const ScalarField& U, const ModelParams& params, double r,
                             const BModel& B) {
  require_same_grid(psi.grid, U.grid, "unary_cost_field");
  const double r3 = r * r * r;
  const double dielectric = (params.eps1 - params.eps0) / (2.0 * r);
  const ScalarField g = cell_gradient_energy(psi);
  ScalarField f(psi.grid);
  for (std::size_t c = 0; c < f.size(); ++c) {
    double v = (-params.beta + U.values[c]) / r3 - dielectric * g.values[c];
    if (!B.is_zero()) v -= b_value(B, psi.values[c]) / r3;
    f.values[c] = v;
  }
  return f;
}

double phase_energy(const PhaseField& u, const ScalarField& f, double gamma, double r) {
  require_same_grid(u.grid, f.grid, "phase_energy");
  double s = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u.values[c]) s += f.values[c];
  }
  return s * f.grid.cell_volume() + gamma / (r * r) * tv_anisotropic(u);
}

double phase_energy(const ScalarField& u, const ScalarField& f, double gamma, double r) {
  require_same_grid(u.grid, f.grid, "phase_energy");
  return unary_part(f, u.values) + gamma / (r * r) * tv_anisotropic(u);
}

PhaseField minimize_phase_field(const ScalarField& f, double gamma, double r) {
  if (!f.all_finite()) throw NumericalError("minimize_phase_field: unary cost is not finite");
  if (gamma < 0.0) throw std::invalid_argument("minimize_phase_field: gamma must be nonnegative");
  const Grid3D& g = f.grid;
  PhaseField u(g, 1);
  if (gamma == 0.0) {
    for (std::size_t c = 0; c < f.size(); ++c) u.values[c] = f.values[c] > 0.0 ? 0 : 1;
    return u;
  }
  const double h = g.spacing();
  const double vol = g.cell_volume();
  const double w = gamma / (r * r) * h * h;
  const int nx = g.nx(), ny = g.ny(), nz = g.nz();
  if (g.cell_count() > static_cast<std::size_t>(std::numeric_limits<int>::max() / 8)) {
    throw std::invalid_argument("minimize_phase_field: grid too large for the max-flow solver");
  }
  MaxFlowGraph graph(static_cast<int>(g.cell_count()));
  // Source side = solvent (u = 1). A source-side node pays its sink link,
  // a sink-side node its source link.
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int c = static_cast<int>(g.index(i, j, k));
        const int boundary = (i == 0) + (i + 1 == nx) + (j == 0) + (j + 1 == ny) + (k == 0) + (k + 1 == nz);
        const double cost_solvent = f.values[c] * vol;
        const double cost_solute = boundary * w;
        const double diff = cost_solute - cost_solvent;
        if (diff > 0.0) {
          graph.add_terminal(c, diff, 0.0);
        } else if (diff < 0.0) {
          graph.add_terminal(c, 0.0, -diff);
        }
        if (i + 1 < nx) graph.add_edge(c, c + 1, w, w);
        if (j + 1 < ny) graph.add_edge(c, c + nx, w, w);
        if (k + 1 < nz) graph.add_edge(c, c + nx * ny, w, w);
      }
    }
  }
  graph.solve();
  for (std::size_t c = 0; c < u.size(); ++c) u.values[c] = graph.source_side(static_cast<int>(c)) ? 1 : 0;
  return u;
}

RelaxResult relax_phase_field(const ScalarField& f, double gamma, double r, const RelaxOptions& options) {
  const Grid3D& g = f.grid;
  const double vol = g.cell_volume();
  RelaxResult out;
  out.u = ScalarField(g, 1.0);
  if (gamma == 0.0) {
    for (std::size_t c = 0; c < f.size(); ++c) out.u.values[c] = f.values[c] > 0.0 ? 0.0 : 1.0;
    out.energy = phase_energy(out.u, f, gamma, r);
    return out;
  }
  const double h = g.spacing();
  const double w = gamma / (r * r) * h * h;
  const std::array<int, 3> n = g.dims();
  // Dual variable per face, faces at positions 0..n_a along axis a (ghost u = 1).
  std::array<std::vector<double>, 3> p;
  std::array<std::array<int, 3>, 3> fdims;
  for (int a = 0; a < 3; ++a) {
    fdims[a] = n;
    fdims[a][a] += 1;
    p[a].assign(static_cast<std::size_t>(fdims[a][0]) * fdims[a][1] * fdims[a][2], 0.0);
  }
  auto face_index = [&](int a, int i, int j, int k) {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(fdims[a][0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(fdims[a][1]) * k);
  };
  auto value_or_ghost = [&](const std::vector<double>& v, int i, int j, int k) {
    if (i < 0 || j < 0 || k < 0 || i >= n[0] || j >= n[1] || k >= n[2]) return 1.0;
    return v[g.index(i, j, k)];
  };

  // |K|^2 <= 12 for the face-jump operator; balance steps by the dual scale w.
  const double norm_bound = std::sqrt(12.0);
  const double tau = 0.99 / norm_bound / std::sqrt(w);
  const double sigma = 0.99 / norm_bound * std::sqrt(w);

  std::vector<double>& u = out.u.values;
  std::vector<double> ubar = u, u_old(u.size());
  for (int it = 1; it <= options.iterations; ++it) {
    for (int a = 0; a < 3; ++a) {
      const int off[3] = {a == 0, a == 1, a == 2};
      for (int k = 0; k < fdims[a][2]; ++k) {
        for (int j = 0; j < fdims[a][1]; ++j) {
          for (int i = 0; i < fdims[a][0]; ++i) {
            const double jump =
                value_or_ghost(ubar, i, j, k) - value_or_ghost(ubar, i - off[0], j - off[1], k - off[2]);
            double& q = p[a][face_index(a, i, j, k)];
            q = std::clamp(q + sigma * jump, -w, w);
          }
        }
      }
    }
    u_old = u;
    for (int k = 0; k < n[2]; ++k) {
      for (int j = 0; j < n[1]; ++j) {
        for (int i = 0; i < n[0]; ++i) {
          const std::size_t c = g.index(i, j, k);
          const double kt = p[0][face_index(0, i, j, k)] - p[0][face_index(0, i + 1, j, k)] +
                            p[1][face_index(1, i, j, k)] - p[1][face_index(1, i, j + 1, k)] +
                            p[2][face_index(2, i, j, k)] - p[2][face_index(2, i, j, k + 1)];
          u[c] = std::clamp(u[c] - tau * (kt + vol * f.values[c]), 0.0, 1.0);
        }
      }
    }
    for (std::size_t c = 0; c < u.size(); ++c) ubar[c] = 2.0 * u[c] - u_old[c];
    if (options.snapshot_every > 0 && it % options.snapshot_every == 0) out.snapshots.push_back(out.u);
  }
  out.energy = phase_energy(out.u, f, gamma, r);
  return out;
}

PhaseField threshold(const ScalarField& u, double t) {
  PhaseField out(u.grid, 1);
  for (std::size_t c = 0; c < u.size(); ++c) out.values[c] = u.values[c] > t ? 1 : 0;
  return out;
}

ThresholdResult best_threshold(const ScalarField& u, const ScalarField& f, double gamma, double r, int max_levels) {
  std::vector<double> levels = u.values;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  // {u > t} for t just below each distinct value, plus t = max (empty set).
  std::vector<double> candidates;
  if (static_cast<int>(levels.size()) <= max_levels) {
    candidates.push_back(levels.front() - 1.0);
    for (std::size_t i = 1; i < levels.size(); ++i) candidates.push_back(0.5 * (levels[i - 1] + levels[i]));
    candidates.push_back(levels.back());
  } else {
    for (int q = 0; q <= max_levels; ++q) {
      const std::size_t idx = static_cast<std::size_t>(static_cast<double>(q) / max_levels * (levels.size() - 1));
      candidates.push_back(levels[idx]);
    }
    candidates.push_back(levels.front() - 1.0);
  }
  ThresholdResult best;
  bool have = false;
  for (double t : candidates) {
    PhaseField b = threshold(u, t);
    const double e = phase_energy(b, f, gamma, r);
    if (!have || e < best.energy) {
      best.t = t;
      best.energy = e;
      best.u = std::move(b);
      have = true;
    }
  }
  return best;
}

EnergyBreakdown energy_breakdown_fields(const ScalarField& Q, const ScalarField& U, double rho_mass, double r,
                                        const PhaseField& u, const ScalarField& psi, const BModel& B,
                                        const ModelParams& params) {
  require_same_grid(Q.grid, U.grid, "energy_breakdown");
  require_same_grid(Q.grid, u.grid, "energy_breakdown");
  require_same_grid(Q.grid, psi.grid, "energy_breakdown");
  const double r3 = r * r * r;
  EnergyBreakdown e;
  e.term_rho = params.a * rho_mass;
  e.term_pressure = params.beta / r3 * static_cast<double>(u.count_zero()) * u.grid.cell_volume();
  e.term_surface = params.gamma / (r * r) * tv_anisotropic(u);
  e.term_lj = integrate_masked(U, u, false) / r3;
  e.term_electric = electric_functional(u, Q, B, r, params, psi);
  e.total = sum_terms(e);
  return e;
}

EnergyBreakdown energy_breakdown(const SoluteConfiguration& config, const SpeciesTable& species, const PhaseField& u,
                                 const ScalarField& psi, const BModel& B, const ModelParams& params) {
  const ScalarField Q = assemble_charge_density(config, species, u.grid);
  const ScalarField U = assemble_lj_potential(config, species, u.grid);
  return energy_breakdown_fields(Q, U, static_cast<double>(config.size()), config.r, u, psi, B, params);
}

SaddleSolution solve_saddle_fields(const ScalarField& Q, const ScalarField& U, double rho_mass, double r,
                                   const BModel& B, const ModelParams& params, const SaddleOptions& options) {
  require_same_grid(Q.grid, U.grid, "solve_saddle");
  if (!(options.tol > 0.0)) throw std::invalid_argument("solve_saddle: tol must be positive");
  if (options.max_outer < 1) throw std::invalid_argument("solve_saddle: max_outer must be at least 1");
  params.validate();
  const Grid3D& grid = Q.grid;

  PhaseField u = options.u0 ? *options.u0 : PhaseField(grid, 1);
  require_same_grid(u.grid, grid, "solve_saddle(u0)");

  SaddleSolution best;
  bool have_best = false;
  std::vector<double> history;
  std::unordered_set<std::uint64_t> visited{fingerprint(u)};
  ScalarField warm;
  bool have_warm = false;
  double previous_total = 0.0;

  for (int outer = 1; outer <= options.max_outer; ++outer) {
    PotentialSolution sol =
        solve_potential(u, Q, B, r, params, options.potential_tol, have_warm ? &warm : nullptr, options.solver);
    EnergyBreakdown e = energy_breakdown_fields(Q, U, rho_mass, r, u, sol.psi, B, params);
    e.term_electric = sol.electric_energy;
    e.total = sum_terms(e);
    history.push_back(e.total);

    const ScalarField f = unary_cost_field(sol.psi, U, params, r, B);
    PhaseField next = minimize_phase_field(f, params.gamma, r);

    const bool stable = next == u;
    const bool small_change =
        outer == 1 || std::abs(e.total - previous_total) <= options.tol * (1.0 + std::abs(e.total));
    if (!have_best || e.total < best.breakdown.total || (stable && small_change)) {
      best.u = u;
      best.psi = sol.psi;
      best.breakdown = e;
      have_best = true;
    }
    best.outer_iterations = outer;
    if (stable && small_change) {
      best.u = std::move(u);
      best.psi = std::move(sol.psi);
      best.breakdown = e;
      best.converged = true;
      best.history = std::move(history);
      return best;
    }
    if (!stable && !visited.insert(fingerprint(next)).second) {
      best.cycled = true;
      best.history = std::move(history);
      warn("solve_saddle: phase field revisited an earlier state; returning the lowest-energy iterate");
      return best;
    }
    previous_total = e.total;
    warm = std::move(sol.psi);
    have_warm = true;
    u = std::move(next);
  }
  best.history = std::move(history);
  return best;
}

SaddleSolution solve_saddle(const SoluteConfiguration& config, const SpeciesTable& species, const BModel& B,
                            const ModelParams& params, const Grid3D& grid, const SaddleOptions& options) {
  if (!config.solutes.empty()) require_resolution(grid, config.r);
  const ScalarField Q = assemble_charge_density(config, species, grid, options.assembly);
  const ScalarField U = assemble_lj_potential(config, species, grid);
  return solve_saddle_fields(Q, U, static_cast<double>(config.size()), config.r, B, params, options);
}

}  // namespace solvlab
