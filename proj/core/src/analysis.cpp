#include "solvlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "solvlab/pbsolver.hpp"

namespace solvlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes and weights on [0, 1].
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.x[i] = 0.5 * (1.0 - z);
    rule.w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

const GaussRule& rule16() {
  static const GaussRule r = gauss_legendre(16);
  return r;
}

const GaussRule& rule8() {
  static const GaussRule r = gauss_legendre(8);
  return r;
}

// Autocorrelation weight of the unit cube: prod (1 - |t_a|) on [-1,1]^3.
double cube_weight(const Vec3& t) {
  return (1.0 - std::abs(t[0])) * (1.0 - std::abs(t[1])) * (1.0 - std::abs(t[2]));
}

double dist_to_box(const Vec3& p, const Vec3& lo, double size) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double d = std::max({lo[a] - p[a], 0.0, p[a] - (lo[a] + size)});
    s += d * d;
  }
  return std::sqrt(s);
}

// Integral of cube_weight(t) / |t - s0| over the box [lo, lo + size]^3,
// where the box lies inside one octant of [-1,1]^3.
double integrate_box(const Vec3& lo, double size, const Vec3& s0, int depth) {
  // Singular point at a vertex: Duffy transform, one pyramid per axis.
  for (int corner = 0; corner < 8; ++corner) {
    Vec3 v{lo[0] + ((corner & 1) ? size : 0.0), lo[1] + ((corner & 2) ? size : 0.0),
           lo[2] + ((corner & 4) ? size : 0.0)};
    if (v != s0) continue;
    const Vec3 dir{(corner & 1) ? -size : size, (corner & 2) ? -size : size, (corner & 4) ? -size : size};
    const GaussRule& g = rule16();
    double total = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
      for (std::size_t is = 0; is < g.x.size(); ++is) {
        const double s = g.x[is];
        for (std::size_t i1 = 0; i1 < g.x.size(); ++i1) {
          for (std::size_t i2 = 0; i2 < g.x.size(); ++i2) {
            Vec3 y{};
            y[axis] = s;
            y[a1] = s * g.x[i1];
            y[a2] = s * g.x[i2];
            const Vec3 t{v[0] + dir[0] * y[0], v[1] + dir[1] * y[1], v[2] + dir[2] * y[2]};
            const double rho = std::sqrt(1.0 + g.x[i1] * g.x[i1] + g.x[i2] * g.x[i2]);
            total += g.w[is] * g.w[i1] * g.w[i2] * s * cube_weight(t) / rho;
          }
        }
      }
    }
    return total * size * size;
  }
  if (depth < 8 && dist_to_box(s0, lo, size) < 2.0 * size) {
    const double half = 0.5 * size;
    double total = 0.0;
    for (int c = 0; c < 8; ++c) {
      const Vec3 sub{lo[0] + ((c & 1) ? half : 0.0), lo[1] + ((c & 2) ? half : 0.0), lo[2] + ((c & 4) ? half : 0.0)};
      total += integrate_box(sub, half, s0, depth + 1);
    }
    return total;
  }
  const GaussRule& g = rule8();
  double total = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    for (std::size_t j = 0; j < g.x.size(); ++j) {
      for (std::size_t k = 0; k < g.x.size(); ++k) {
        const Vec3 t{lo[0] + size * g.x[i], lo[1] + size * g.x[j], lo[2] + size * g.x[k]};
        total += g.w[i] * g.w[j] * g.w[k] * cube_weight(t) / norm(t - s0);
      }
    }
  }
  return total * size * size * size;
}

bool parallel_positive(const std::vector<double>& a, const std::vector<double>& b, double& ratio_num,
                       double& ratio_den) {
  if (a.size() != b.size()) return false;
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (!(ab > 0.0)) return false;
  const double scale = std::sqrt(aa * bb);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (std::abs(a[i] * b[j] - a[j] * b[i]) > 1e-12 * scale) return false;
    }
  }
  ratio_num = ab;
  ratio_den = bb;
  return true;
}

std::string format_vector(const std::vector<double>& v) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- self-energy

Grid3D truncation_grid(double R, double spacing) {
  if (!(R > 0.0) || !(spacing > 0.0)) throw std::invalid_argument("truncation_grid: R and spacing must be positive");
  const int half = static_cast<int>(std::floor(R / (std::sqrt(3.0) * spacing) + 1e-9));
  if (half < 1) throw std::invalid_argument("truncation_grid: R too small for the spacing");
  const int n = 2 * half;
  const double o = -half * spacing;
  return Grid3D({o, o, o}, spacing, {n, n, n});
}

double truncation_radius(double R, double spacing) {
  const Grid3D g = truncation_grid(R, spacing);
  return 0.5 * g.nx() * spacing * std::sqrt(3.0);
}

SaddleSolution cluster_energy(const std::vector<Solute>& cluster, double R, const SelfEnergyProblem& problem) {
  const Grid3D grid = truncation_grid(R, problem.spacing);
  SoluteConfiguration config;
  config.box = Box{grid.origin(), grid.extent()};
  config.r = 1.0;
  config.solutes = cluster;
  config.concentration_bound = problem.params.M;
  return solve_saddle(config, problem.species, problem.B, problem.params, grid, problem.saddle);
}

double self_energy_truncated(int species_id, double R, const SelfEnergyProblem& problem) {
  const SoluteSpecies& sp = problem.species.get(species_id);
  const double need = 4.0 * std::max(sp.profile.support_radius(), sp.lj.cutoff_radius * (sp.lj.well_depth != 0.0));
  if (R < need) {
    throw std::invalid_argument("self_energy_truncated: R must be at least 4 times the profile and LJ ranges");
  }
  return cluster_energy({Solute{species_id, {0.0, 0.0, 0.0}}}, R, problem).breakdown.total;
}

SelfEnergyEstimate fit_truncation(const std::vector<double>& radii, const std::vector<double>& energies) {
  if (radii.size() != energies.size() || radii.size() < 3) {
    throw std::invalid_argument("fit_truncation: need at least three (R, E) pairs");
  }
  SelfEnergyEstimate est;
  est.radii = radii;
  est.effective = radii;
  est.energies = energies;
  const std::size_t n = radii.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 1.0 / radii[i];
    sx += x;
    sy += energies[i];
    sxx += x * x;
    sxy += x * energies[i];
  }
  const double det = n * sxx - sx * sx;
  est.tail_coefficient = (n * sxy - sx * sy) / det;
  est.extrapolated = (sy - est.tail_coefficient * sx) / n;
  for (std::size_t i = 0; i < n; ++i) {
    const double fit = est.extrapolated + est.tail_coefficient / radii[i];
    est.fit_residual = std::max(est.fit_residual, std::abs(energies[i] - fit));
  }
  const double d1 = energies[0] - energies[1];
  const double d2 = energies[1] - energies[2];
  const double q = std::sqrt(radii[2] / radii[0]);
  est.tail_exponent = (d1 / d2 > 0.0) ? std::log(d1 / d2) / std::log(q) : std::numeric_limits<double>::quiet_NaN();
  return est;
}

SelfEnergyEstimate estimate_self_energy(int species_id, const std::vector<double>& radii,
                                        const SelfEnergyProblem& problem) {
  std::vector<double> effective, energies;
  for (double R : radii) {
    effective.push_back(truncation_radius(R, problem.spacing));
    energies.push_back(self_energy_truncated(species_id, R, problem));
  }
  SelfEnergyEstimate est = fit_truncation(effective, energies);
  est.radii = radii;
  est.xi.assign(problem.species.size(), 0.0);
  est.xi[problem.species.slot(species_id)] = 1.0;
  return est;
}

// ---------------------------------------------------------------- phi upper bound

double phi_upper(const std::vector<double>& xi, const std::vector<ClusterEntry>& library) {
  if (library.empty()) throw EmptyLibraryError("phi_upper: cluster library is empty");
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const auto& entry : library) {
    double num = 0.0, den = 0.0;
    if (!parallel_positive(xi, entry.composition, num, den)) continue;
    const double v = entry.energy * num / den;
    if (!found || v < best) best = v;
    found = true;
  }
  if (!found) throw MissingDirectionError("phi_upper: no library cluster has composition parallel to " + format_vector(xi));
  return best;
}

// ---------------------------------------------------------------- H^-1

Hminus1Value hminus1_atoms(const std::vector<Atom>& atoms, bool paper_convention) {
  double s = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      const double d = norm(atoms[i].position - atoms[j].position);
      if (d == 0.0) throw SingularSelfTermError("hminus1_atoms: coincident atoms have infinite interaction");
      s += 2.0 * atoms[i].mass * atoms[j].mass / (4.0 * kPi * d);
    }
    if (atoms[i].self_term) s += atoms[i].mass * atoms[i].mass * *atoms[i].self_term;
  }
  Hminus1Value out;
  out.method = HMethod::Kernel;
  out.paper_convention = paper_convention;
  out.value = paper_convention ? 4.0 * kPi * s : s;
  return out;
}

double cube_pair_integral(int dx, int dy, int dz) {
  // K(D) = int over [-1,1]^3 of prod(1 - |t_a|) / |t + D|.
  const Vec3 s0{-static_cast<double>(dx), -static_cast<double>(dy), -static_cast<double>(dz)};
  double total = 0.0;
  for (int c = 0; c < 8; ++c) {
    const Vec3 lo{(c & 1) ? 0.0 : -1.0, (c & 2) ? 0.0 : -1.0, (c & 4) ? 0.0 : -1.0};
    total += integrate_box(lo, 1.0, s0, 0);
  }
  return total;
}

double unit_cube_coulomb_integral() {
  static const double value = cube_pair_integral(0, 0, 0);
  return value;
}

namespace {

constexpr int kNearOffset = 3;

// K(D) for |D|_inf <= kNearOffset, indexed by sorted absolute offsets.
double near_kernel(int a, int b, int c) {
  static const std::vector<double> table = [] {
    const int m = kNearOffset + 1;
    std::vector<double> t(m * m * m, 0.0);
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        for (int k = j; k < m; ++k) t[(i * m + j) * m + k] = cube_pair_integral(i, j, k);
      }
    }
    return t;
  }();
  int v[3] = {std::abs(a), std::abs(b), std::abs(c)};
  std::sort(v, v + 3);
  const int m = kNearOffset + 1;
  return table[(v[0] * m + v[1]) * m + v[2]];
}

double hminus1_kernel(const ScalarField& mu) {
  const Grid3D& g = mu.grid;
  struct Cell {
    int i, j, k;
    double m;
  };
  std::vector<Cell> cells;
  for (std::size_t c = 0; c < mu.size(); ++c) {
    if (mu.values[c] == 0.0) continue;
    const auto ijk = g.ijk(c);
    cells.push_back({ijk[0], ijk[1], ijk[2], mu.values[c]});
  }
  if (cells.size() > 200000) throw std::invalid_argument("hminus1_field: too many charged cells for the kernel route");
  double s = 0.0;
  for (std::size_t a = 0; a < cells.size(); ++a) {
    double row = 0.0;
    for (std::size_t b = a + 1; b < cells.size(); ++b) {
      const int dx = cells[b].i - cells[a].i, dy = cells[b].j - cells[a].j, dz = cells[b].k - cells[a].k;
      double k;
      if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) <= kNearOffset) {
        k = near_kernel(dx, dy, dz);
      } else {
        k = 1.0 / std::sqrt(static_cast<double>(dx * dx + dy * dy + dz * dz));
      }
      row += cells[b].m * k;
    }
    s += cells[a].m * (2.0 * row + cells[a].m * near_kernel(0, 0, 0));
  }
  const double h = g.spacing();
  return s * std::pow(h, 5) / (4.0 * kPi);
}

double hminus1_pde(const ScalarField& mu, BoundaryData boundary, double tol) {
  const Grid3D& g = mu.grid;
  const double h = g.spacing();
  const double vol = g.cell_volume();
  ScalarField rhs = mu;
  if (boundary == BoundaryData::FreeSpace) {
    std::vector<std::pair<Vec3, double>> sources;
    for (std::size_t c = 0; c < mu.size(); ++c) {
      if (mu.values[c] != 0.0) sources.emplace_back(g.center(c), mu.values[c] * vol);
    }
    auto potential = [&](const Vec3& x) {
      double p = 0.0;
      for (const auto& [y, m] : sources) p += m / norm(x - y);
      return p / (4.0 * kPi);
    };
    const int n[3] = {g.nx(), g.ny(), g.nz()};
    const double inv_h2 = 1.0 / (h * h);
    for (int k = 0; k < n[2]; ++k) {
      for (int j = 0; j < n[1]; ++j) {
        for (int i = 0; i < n[0]; ++i) {
          const int pos[3] = {i, j, k};
          const std::size_t c = g.index(i, j, k);
          for (int a = 0; a < 3; ++a) {
            for (int side : {-1, 1}) {
              const int q = pos[a] + side;
              if (q >= 0 && q < n[a]) continue;
              Vec3 ghost = g.center(i, j, k);
              ghost[a] += side * h;
              rhs.values[c] += potential(ghost) * inv_h2;
            }
          }
        }
      }
    }
  }
  ModelParams unit;
  unit.beta = 1.0;
  unit.eps0 = unit.eps1 = 1.0;
  const PhaseField u(g, 1);
  const PotentialSolution sol = solve_potential(u, rhs, BModel::zero(), 1.0, unit, tol);
  double s = 0.0;
  for (std::size_t c = 0; c < mu.size(); ++c) s += mu.values[c] * sol.psi.values[c];
  return s * vol;
}

}  // namespace

Hminus1Value hminus1_field(const ScalarField& mu, const Hminus1Options& options) {
  if (!mu.all_finite()) throw NumericalError("hminus1_field: density is not finite");
  Hminus1Value out;
  out.method = options.method;
  out.paper_convention = options.paper_convention;
  const double v = options.method == HMethod::Kernel ? hminus1_kernel(mu) : hminus1_pde(mu, options.boundary, options.tol);
  out.value = options.paper_convention ? 4.0 * kPi * v : v;
  return out;
}

// ---------------------------------------------------------------- cubes

ScalarField local_cost_field(const PhaseField& u, const ModelParams& params, double r) {
  const Grid3D& g = u.grid;
  const double h = g.spacing();
  const double pressure = params.beta / (r * r * r) * g.cell_volume();
  const double surface = params.gamma / (r * r) * h * h;
  ScalarField out(g);
  const int n[3] = {g.nx(), g.ny(), g.nz()};
  const std::size_t stride[3] = {1, static_cast<std::size_t>(n[0]), static_cast<std::size_t>(n[0]) * n[1]};
  for (int k = 0; k < n[2]; ++k) {
    for (int j = 0; j < n[1]; ++j) {
      for (int i = 0; i < n[0]; ++i) {
        const int pos[3] = {i, j, k};
        const std::size_t c = g.index(i, j, k);
        const int uc = u.values[c];
        double jumps = 0.0;
        for (int a = 0; a < 3; ++a) {
          jumps += pos[a] + 1 < n[a] ? 0.5 * std::abs(u.values[c + stride[a]] - uc) : 1.0 - uc;
          jumps += pos[a] > 0 ? 0.5 * std::abs(u.values[c - stride[a]] - uc) : 1.0 - uc;
        }
        out.values[c] = pressure * (1 - uc) + surface * jumps;
      }
    }
  }
  return out;
}

CubePartition evaluate_partition(const std::vector<Vec3>& points, const std::vector<double>& masses, double delta,
                                 double L, double r, const Vec3& offset, const ScalarField* local_cost,
                                 double frame_constant) {
  CubePartition p;
  p.delta = delta;
  p.offset = offset;
  p.cube_of_point.resize(points.size());
  std::set<std::array<long, 3>> cubes;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (int d = 0; d < 3; ++d) {
      p.cube_of_point[a][d] = static_cast<long>(std::floor((points[a][d] - offset[d]) / delta));
    }
    cubes.insert(p.cube_of_point[a]);
    p.total_mass += std::abs(masses[a]);
  }
  p.cube_count = cubes.size();
  double cross = 0.0;
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      if (p.cube_of_point[a] == p.cube_of_point[b]) continue;
      cross += 2.0 * std::abs(masses[a] * masses[b]) / norm(points[a] - points[b]);
    }
  }
  p.cross_interaction = cross;
  p.interaction_bound = 4.0 * p.total_mass * p.total_mass / delta;
  if (local_cost) {
    p.frame_checked = true;
    const double width = L * r;
    const Grid3D& g = local_cost->grid;
    for (std::size_t c = 0; c < local_cost->size(); ++c) {
      const double v = local_cost->values[c];
      if (v == 0.0) continue;
      p.local_cost += v;
      const Vec3 x = g.center(c);
      bool in_frame = false;
      for (int d = 0; d < 3 && !in_frame; ++d) {
        double t = std::fmod(x[d] - offset[d], delta);
        if (t < 0.0) t += delta;
        in_frame = std::min(t, delta - t) < width;
      }
      if (in_frame) p.frame_cost += v;
    }
    p.frame_bound = frame_constant * width / delta * p.local_cost;
  }
  return p;
}

CubePartition cluster_cubes(const std::vector<Vec3>& points, const std::vector<double>& masses, double delta, double L,
                            double r, const ScalarField* local_cost, const ClusterOptions& options) {
  if (points.size() != masses.size()) throw std::invalid_argument("cluster_cubes: points and masses differ in length");
  if (!(delta > 2.0 * L * r)) throw std::invalid_argument("cluster_cubes: need delta > 2 L r");
  std::vector<Vec3> candidates;
  const int s = std::max(1, options.sublattice);
  for (int k = 0; k < s; ++k) {
    for (int j = 0; j < s; ++j) {
      for (int i = 0; i < s; ++i) candidates.push_back({delta * i / s, delta * j / s, delta * k / s});
    }
  }
  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> uniform(0.0, delta);
  while (static_cast<int>(candidates.size()) < options.max_candidates) {
    const double x = uniform(rng), y = uniform(rng), z = uniform(rng);
    candidates.push_back({x, y, z});
  }
  if (static_cast<int>(candidates.size()) > options.max_candidates) candidates.resize(options.max_candidates);

  CubePartition best;
  double best_score = std::numeric_limits<double>::infinity();
  int tried = 0;
  for (const Vec3& z0 : candidates) {
    ++tried;
    CubePartition p = evaluate_partition(points, masses, delta, L, r, z0, local_cost, options.frame_constant);
    p.candidates_tried = tried;
    if (p.certified()) return p;
    double score = p.interaction_bound > 0.0 ? p.cross_interaction / p.interaction_bound : 0.0;
    if (p.frame_checked && p.frame_bound > 0.0) score = std::max(score, p.frame_cost / p.frame_bound);
    if (score < best_score) {
      best_score = score;
      best = p;
    }
  }
  throw ClusterSearchError("cluster_cubes: no certified offset among " + std::to_string(tried) + " candidates", best);
}

// ---------------------------------------------------------------- limits

double PhiTable::lookup(const std::vector<double>& xi) const {
  std::vector<ClusterEntry> lib;
  lib.reserve(entries.size());
  for (const auto& e : entries) lib.push_back({e.direction, e.estimate, ""});
  if (lib.empty()) throw EmptyLibraryError("phi table is empty");
  double zero = 0.0;
  for (double v : xi) zero += std::abs(v);
  if (zero == 0.0) return 0.0;
  return phi_upper(xi, lib);
}

ScalarField rasterize_blocks(const std::vector<CubeBlock>& blocks, const std::vector<double>& charges, double spacing) {
  if (blocks.empty()) throw std::invalid_argument("rasterize_blocks: no blocks");
  Vec3 lo = blocks.front().lower, hi = blocks.front().lower + Vec3{blocks.front().side, blocks.front().side, blocks.front().side};
  for (const auto& b : blocks) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], b.lower[a]);
      hi[a] = std::max(hi[a], b.lower[a] + b.side);
    }
  }
  const Grid3D g = Grid3D::covering(lo, hi - lo, spacing);
  ScalarField q(g);
  const double vol = g.cell_volume();
  for (const auto& b : blocks) {
    double charge = 0.0;
    for (std::size_t s = 0; s < b.density.size() && s < charges.size(); ++s) charge += charges[s] * b.density[s];
    if (charge == 0.0) continue;
    for (std::size_t c = 0; c < q.size(); ++c) {
      const Vec3 x = g.center(c);
      double overlap = 1.0;
      for (int a = 0; a < 3; ++a) {
        const double l = std::max(x[a] - 0.5 * spacing, b.lower[a]);
        const double u = std::min(x[a] + 0.5 * spacing, b.lower[a] + b.side);
        overlap *= std::max(0.0, u - l);
      }
      q.values[c] += charge * overlap / vol;
    }
  }
  return q;
}

double limit_energy(const LimitDensity& rho, Regime regime, const PhiTable& phi, const LimitOptions& options) {
  std::size_t nspecies = options.species_charges.size();
  for (const auto& a : rho.atoms) nspecies = std::max(nspecies, a.composition.size());
  for (const auto& b : rho.blocks) nspecies = std::max(nspecies, b.density.size());

  auto net_charge = [&](const std::vector<double>& comp) {
    double q = 0.0;
    for (std::size_t s = 0; s < comp.size() && s < options.species_charges.size(); ++s) {
      q += options.species_charges[s] * comp[s];
    }
    return q;
  };
  auto coulomb = [&]() {
    for (const auto& a : rho.atoms) {
      if (std::abs(net_charge(a.composition)) > 1e-12) {
        throw std::invalid_argument("limit_energy: a charged atom has infinite Coulomb energy in this regime");
      }
    }
    if (rho.blocks.empty()) return 0.0;
    const ScalarField q = rasterize_blocks(rho.blocks, options.species_charges, options.spacing);
    Hminus1Options h;
    h.method = HMethod::Kernel;
    h.paper_convention = options.paper_convention;
    return hminus1_field(q, h).value;
  };

  switch (regime) {
    case Regime::Sub: {
      double e = 0.0;
      for (const auto& a : rho.atoms) e += phi.lookup(a.composition);
      for (const auto& b : rho.blocks) e += phi.lookup(b.density) * b.side * b.side * b.side;
      return e;
    }
    case Regime::Crit: {
      std::vector<double> mass(nspecies, 0.0);
      for (const auto& a : rho.atoms) {
        for (std::size_t s = 0; s < a.composition.size(); ++s) mass[s] += std::abs(a.composition[s]);
      }
      for (const auto& b : rho.blocks) {
        for (std::size_t s = 0; s < b.density.size(); ++s) mass[s] += std::abs(b.density[s]) * b.side * b.side * b.side;
      }
      double e = 0.0;
      for (std::size_t s = 0; s < nspecies; ++s) {
        if (mass[s] == 0.0) continue;
        std::vector<double> unit(nspecies, 0.0);
        unit[s] = 1.0;
        e += phi.lookup(unit) * mass[s];
      }
      return e + options.alpha / (2.0 * options.eps1) * coulomb();
    }
    case Regime::Super:
      return coulomb() / (2.0 * options.eps1);
  }
  return 0.0;
}

// ---------------------------------------------------------------- decay fits

std::vector<RaySample> sample_axis(const ScalarField& psi, const Vec3& source, double dmin, double dmax) {
  const Grid3D& g = psi.grid;
  const double h = g.spacing();
  const int j = std::clamp(static_cast<int>(std::floor((source[1] - g.origin()[1]) / h)), 0, g.ny() - 1);
  const int k = std::clamp(static_cast<int>(std::floor((source[2] - g.origin()[2]) / h)), 0, g.nz() - 1);
  std::vector<RaySample> out;
  for (int i = 0; i < g.nx(); ++i) {
    const Vec3 x = g.center(i, j, k);
    if (x[0] <= source[0]) continue;
    const double d = norm(x - source);
    if (d < dmin - 1e-12 || d > dmax + 1e-12) continue;
    out.push_back({d, psi.at(i, j, k)});
  }
  return out;
}

ExponentialFit fit_exponential_decay(const std::vector<RaySample>& samples) {
  if (samples.size() < 3) throw std::invalid_argument("fit_exponential_decay: need at least three samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(samples.size());
  std::vector<double> ys;
  for (const auto& s : samples) {
    if (!(std::abs(s.value) > 0.0)) throw std::invalid_argument("fit_exponential_decay: zero sample");
    const double y = std::log(std::abs(s.value) * s.distance);
    ys.push_back(y);
    sx += s.distance;
    sy += y;
    sxx += s.distance * s.distance;
    sxy += s.distance * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  ExponentialFit fit;
  fit.length = -1.0 / slope;
  fit.amplitude = std::exp(icpt);
  fit.samples = static_cast<int>(samples.size());
  double rss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double e = ys[i] - (icpt + slope * samples[i].distance);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / n);
  return fit;
}

namespace {

// Least squares for A, C in y = A x^s + C; returns the residual sum of squares.
double offset_fit(const std::vector<RaySample>& samples, double s, double& A, double& C) {
  double sf = 0, sff = 0, sy = 0, sfy = 0;
  const double n = static_cast<double>(samples.size());
  for (const auto& p : samples) {
    const double f = std::pow(p.distance, s);
    const double y = std::abs(p.value);
    sf += f;
    sff += f * f;
    sy += y;
    sfy += f * y;
  }
  A = (n * sfy - sf * sy) / (n * sff - sf * sf);
  C = (sy - A * sf) / n;
  double rss = 0.0;
  for (const auto& p : samples) {
    const double e = std::abs(p.value) - (A * std::pow(p.distance, s) + C);
    rss += e * e;
  }
  return rss;
}

}  // namespace

PowerFit fit_power_decay(const std::vector<RaySample>& samples, bool with_offset) {
  if (samples.size() < 4) throw std::invalid_argument("fit_power_decay: need at least four samples");
  PowerFit fit;
  fit.samples = static_cast<int>(samples.size());
  double vmax = 0.0;
  for (const auto& p : samples) vmax = std::max(vmax, std::abs(p.value));
  const double n = static_cast<double>(samples.size());
  if (!with_offset) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : samples) {
      const double x = std::log(p.distance), y = std::log(std::abs(p.value));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.amplitude = std::exp((sy - fit.exponent * sx) / n);
    double rss = 0.0;
    for (const auto& p : samples) {
      const double e = std::abs(p.value) - fit.amplitude * std::pow(p.distance, fit.exponent);
      rss += e * e;
    }
    fit.residual = std::sqrt(rss / n) / vmax;
    return fit;
  }
  // Golden-section search on the exponent; A and C by linear least squares.
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = -4.0, b = -0.1;
  double A = 0, C = 0;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = offset_fit(samples, x1, A, C), f2 = offset_fit(samples, x2, A, C);
  for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = offset_fit(samples, x1, A, C);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = offset_fit(samples, x2, A, C);
    }
  }
  fit.exponent = 0.5 * (a + b);
  const double rss = offset_fit(samples, fit.exponent, A, C);
  fit.amplitude = A;
  fit.offset = C;
  fit.residual = std::sqrt(rss / n) / vmax;
  return fit;
}

}  // namespace solvlab
