#include "solvlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "solvlab/error.hpp"

namespace solvlab {

// ---------------------------------------------------------------- profiles

ChargeProfile ChargeProfile::uniform_ball(double radius, double charge) {
  if (!(radius > 0.0)) throw std::invalid_argument("uniform_ball: radius must be positive");
  ChargeProfile p;
  p.shape_ = UniformBall{radius, charge};
  p.total_charge_ = charge;
  return p;
}

ChargeProfile ChargeProfile::tabulated(double spacing, int n, std::vector<double> values, double support_radius) {
  if (!(spacing > 0.0) || n < 2) throw std::invalid_argument("tabulated profile: need spacing > 0 and n >= 2");
  if (values.size() != static_cast<std::size_t>(n) * n * n) {
    throw std::invalid_argument("tabulated profile: expected n^3 samples");
  }
  const double half = 0.5 * (n - 1);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double v = values[static_cast<std::size_t>(i) + static_cast<std::size_t>(n) * (j + static_cast<std::size_t>(n) * k)];
        if (!std::isfinite(v)) throw std::invalid_argument("tabulated profile: non-finite sample");
        const Vec3 y{(i - half) * spacing, (j - half) * spacing, (k - half) * spacing};
        if (norm(y) > support_radius && v != 0.0) {
          throw std::invalid_argument("tabulated profile: nonzero sample outside the support radius");
        }
        sum += v;
      }
    }
  }
  ChargeProfile p;
  p.shape_ = Tabulated{spacing, n, std::move(values), support_radius};
  p.total_charge_ = sum * spacing * spacing * spacing;
  return p;
}

double ChargeProfile::support_radius() const {
  return std::visit(
      [](const auto& s) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, UniformBall>) {
          return s.radius;
        } else {
          return s.support_radius;
        }
      },
      shape_);
}

double ChargeProfile::total_charge() const { return total_charge_; }

double ChargeProfile::value(const Vec3& y) const {
  if (const auto* ball = std::get_if<UniformBall>(&shape_)) {
    if (norm(y) >= ball->radius) return 0.0;
    return ball->charge / (4.0 / 3.0 * std::numbers::pi * ball->radius * ball->radius * ball->radius);
  }
  const auto& t = std::get<Tabulated>(shape_);
  if (norm(y) > t.support_radius) return 0.0;
  const double half = 0.5 * (t.n - 1);
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const double s = y[a] / t.spacing + half;
    if (s < 0.0 || s > t.n - 1) return 0.0;
    base[a] = std::min(static_cast<int>(std::floor(s)), t.n - 2);
    frac[a] = s - base[a];
  }
  auto at = [&](int i, int j, int k) {
    return t.values[static_cast<std::size_t>(i) + static_cast<std::size_t>(t.n) * (j + static_cast<std::size_t>(t.n) * k)];
  };
  double v = 0.0;
  for (int dz = 0; dz < 2; ++dz) {
    for (int dy = 0; dy < 2; ++dy) {
      for (int dx = 0; dx < 2; ++dx) {
        const double w = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) * (dz ? frac[2] : 1.0 - frac[2]);
        if (w != 0.0) v += w * at(base[0] + dx, base[1] + dy, base[2] + dz);
      }
    }
  }
  return v;
}

double ChargeProfile::cell_average(const Vec3& center, double half_width, int subsamples) const {
  const double radius = support_radius();
  double nearest2 = 0.0;
  double farthest2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double lo = center[a] - half_width;
    const double hi = center[a] + half_width;
    const double near = lo > 0.0 ? lo : (hi < 0.0 ? -hi : 0.0);
    const double far = std::max(std::abs(lo), std::abs(hi));
    nearest2 += near * near;
    farthest2 += far * far;
  }
  if (nearest2 >= radius * radius) return 0.0;
  if (const auto* ball = std::get_if<UniformBall>(&shape_)) {
    if (farthest2 <= radius * radius) {
      return ball->charge / (4.0 / 3.0 * std::numbers::pi * ball->radius * ball->radius * ball->radius);
    }
  }
  const int s = std::max(1, subsamples);
  const double step = 2.0 * half_width / s;
  double sum = 0.0;
  for (int k = 0; k < s; ++k) {
    for (int j = 0; j < s; ++j) {
      for (int i = 0; i < s; ++i) {
        const Vec3 y{center[0] - half_width + (i + 0.5) * step, center[1] - half_width + (j + 0.5) * step,
                     center[2] - half_width + (k + 0.5) * step};
        sum += value(y);
      }
    }
  }
  return sum / (static_cast<double>(s) * s * s);
}

// ---------------------------------------------------------------- Lennard-Jones

double LennardJones::value(double distance) const {
  if (distance >= cutoff_radius) return 0.0;
  const double d = std::max(distance, core_radius / 8.0);
  const double s6 = std::pow(core_radius / d, 6);
  return 4.0 * well_depth * (s6 * s6 - s6);
}

double LennardJones::minimum_location() const { return std::pow(2.0, 1.0 / 6.0) * core_radius; }

double LennardJones::negative_part_integral() const {
  // U < 0 only on (core_radius, cutoff_radius); composite Simpson in d.
  if (cutoff_radius <= core_radius || well_depth <= 0.0) return 0.0;
  const int n = 4000;
  const double a = core_radius, b = cutoff_radius;
  const double step = (b - a) / n;
  auto f = [&](double d) { return 4.0 * std::numbers::pi * d * d * std::max(-value(d), 0.0); };
  double s = f(a) + f(b - 1e-12 * (b - a));
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * step);
  return s * step / 3.0;
}

// ---------------------------------------------------------------- species

SpeciesTable::SpeciesTable(std::vector<SoluteSpecies> species) : species_(std::move(species)) {
  for (std::size_t i = 0; i < species_.size(); ++i) {
    for (std::size_t j = i + 1; j < species_.size(); ++j) {
      if (species_[i].id == species_[j].id) {
        throw std::invalid_argument("SpeciesTable: duplicate species id " + std::to_string(species_[i].id));
      }
    }
  }
}

const SoluteSpecies& SpeciesTable::get(int id) const { return species_[slot(id)]; }

bool SpeciesTable::contains(int id) const {
  return std::any_of(species_.begin(), species_.end(), [id](const SoluteSpecies& s) { return s.id == id; });
}

std::size_t SpeciesTable::slot(int id) const {
  for (std::size_t i = 0; i < species_.size(); ++i) {
    if (species_[i].id == id) return i;
  }
  throw std::out_of_range("unknown species id " + std::to_string(id));
}

SoluteSpecies default_species(int id) {
  SoluteSpecies s;
  s.id = id;
  s.profile = ChargeProfile::uniform_ball(1.0, 1.0);
  s.lj = LennardJones{0.0, 1.0, 2.0};
  return s;
}

SoluteConfiguration concatenate(const SoluteConfiguration& a, const SoluteConfiguration& b) {
  SoluteConfiguration out = a;
  out.solutes.insert(out.solutes.end(), b.solutes.begin(), b.solutes.end());
  return out;
}

// ---------------------------------------------------------------- B models

BModel BModel::zero() { return BModel{}; }

BModel BModel::quadratic(double stiffness) {
  if (!(stiffness > 0.0)) throw std::invalid_argument("quadratic B: stiffness must be positive");
  BModel b;
  b.variant_ = Quadratic{stiffness};
  return b;
}

BModel BModel::ionic(std::vector<Ion> ions, double kbt) {
  if (ions.empty()) throw std::invalid_argument("ionic B: need at least one ion species");
  if (!(kbt > 0.0)) throw std::invalid_argument("ionic B: kBT must be positive");
  double net = 0.0, scale = 0.0, charge_sum = 0.0, charge_scale = 0.0;
  for (const auto& ion : ions) {
    if (!(ion.bulk_concentration >= 0.0)) throw std::invalid_argument("ionic B: negative bulk concentration");
    net += ion.bulk_concentration * ion.charge;
    scale += std::abs(ion.bulk_concentration * ion.charge);
    charge_sum += ion.charge;
    charge_scale += std::abs(ion.charge);
  }
  if (std::abs(net) > 1e-12 * std::max(scale, 1e-300)) {
    throw std::invalid_argument("ionic B: bulk is not electroneutral (sum c_k q_k != 0)");
  }
  if (std::abs(charge_sum) > 1e-12 * std::max(charge_scale, 1e-300)) {
    warn("ionic B: sum of ion charges is nonzero; only sum c_k q_k = 0 is enforced");
  }
  BModel b;
  b.variant_ = Ionic{std::move(ions), kbt};
  return b;
}

std::optional<double> BModel::analytic_b2_constant() const {
  if (is_quadratic()) return 1.0;
  return std::nullopt;
}

std::string BModel::name() const {
  if (is_zero()) return "zero";
  if (is_quadratic()) return "quadratic";
  return "ionic";
}

namespace {

double ionic_exponent(const BModel::Ionic& m, const BModel::Ion& ion, double s) {
  const double x = -ion.charge * s / m.kbt;
  if (std::abs(x) > 700.0) {
    std::ostringstream os;
    os << "ionic B: exponent " << x << " outside [-700, 700] at s = " << s;
    throw OverflowError(os.str());
  }
  return x;
}

}  // namespace

double b_value(const BModel& b, double s) {
  return std::visit(
      [s](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BModel::Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, BModel::Quadratic>) {
          return 0.5 * m.stiffness * s * s;
        } else {
          double v = 0.0;
          for (const auto& ion : m.ions) v += ion.bulk_concentration * std::expm1(ionic_exponent(m, ion, s));
          return m.kbt * v;
        }
      },
      b.variant());
}

double b_subgradient(const BModel& b, double s) {
  return std::visit(
      [s](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BModel::Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, BModel::Quadratic>) {
          return m.stiffness * s;
        } else {
          // Written as a sum of expm1 terms so that B'(0) = 0 holds to round-off.
          double v = 0.0;
          for (const auto& ion : m.ions) {
            v -= ion.bulk_concentration * ion.charge * std::expm1(ionic_exponent(m, ion, s));
          }
          return v;
        }
      },
      b.variant());
}

double b_curvature(const BModel& b, double s) {
  return std::visit(
      [s](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, BModel::Zero>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, BModel::Quadratic>) {
          return m.stiffness;
        } else {
          double v = 0.0;
          for (const auto& ion : m.ions) {
            v += ion.bulk_concentration * ion.charge * ion.charge / m.kbt * std::exp(ionic_exponent(m, ion, s));
          }
          return v;
        }
      },
      b.variant());
}

double check_B2(const BModel& b, double lo, double hi, int n_samples) {
  if (b.is_zero()) throw std::invalid_argument("check_B2: B = 0 is not strictly convex");
  if (n_samples < 2 || !(hi > lo)) throw std::invalid_argument("check_B2: need hi > lo and n_samples >= 2");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_samples; ++i) {
    const double s = lo + (hi - lo) * i / (n_samples - 1);
    if (std::abs(s) < 1e-6) continue;
    const double bs = b_value(b, s);
    if (!(bs > 0.0)) continue;
    best = std::min(best, s * b_subgradient(b, s) / bs - 1.0);
  }
  if (!std::isfinite(best)) return 0.0;
  return std::max(best, 0.0);
}

// ---------------------------------------------------------------- parameters

void ModelParams::validate() const {
  if (!(eps0 > 0.0)) throw std::invalid_argument("ModelParams: eps0 must be positive");
  if (!(eps1 >= eps0)) throw std::invalid_argument("ModelParams: need eps1 >= eps0");
  if (!(beta > 0.0)) throw std::invalid_argument("ModelParams: beta must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("ModelParams: gamma must be nonnegative");
  if (!(M > 0.0)) throw std::invalid_argument("ModelParams: M must be positive");
}

// ---------------------------------------------------------------- admissibility

namespace {

bool circumcenter3(const Vec3& a, const Vec3& b, const Vec3& c, Vec3& out) {
  const Vec3 ab = b - a, ac = c - a;
  const Vec3 n{ab[1] * ac[2] - ab[2] * ac[1], ab[2] * ac[0] - ab[0] * ac[2], ab[0] * ac[1] - ab[1] * ac[0]};
  const double n2 = dot(n, n);
  if (n2 < 1e-30 * dot(ab, ab) * dot(ac, ac)) return false;
  // Standard formula: a + (|ac|^2 (n x ab) + |ab|^2 (ac x n)) / (2 |n|^2).
  auto cross = [](const Vec3& u, const Vec3& v) {
    return Vec3{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  };
  const Vec3 t = dot(ac, ac) * cross(n, ab) + dot(ab, ab) * cross(ac, n);
  out = a + (0.5 / n2) * t;
  return true;
}

bool circumcenter4(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, Vec3& out) {
  // Solve 2 (p_i - a) . x = |p_i|^2 - |a|^2 for i = b, c, d.
  const Vec3 rows[3] = {b - a, c - a, d - a};
  double m[3][4];
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = 2.0 * rows[i][j];
  }
  m[0][3] = dot(b, b) - dot(a, a);
  m[1][3] = dot(c, c) - dot(a, a);
  m[2][3] = dot(d, d) - dot(a, a);
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    if (std::abs(m[piv][col]) < 1e-14) return false;
    for (int j = 0; j < 4; ++j) std::swap(m[col][j], m[piv][j]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int j = col; j < 4; ++j) m[r][j] -= f * m[col][j];
    }
  }
  out = {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
  return true;
}

}  // namespace

AdmissibilityReport check_admissible(const SoluteConfiguration& config, std::optional<double> delta_sep) {
  AdmissibilityReport rep;
  const auto& pts = config.solutes;
  const std::size_t n = pts.size();
  const double r = config.r;
  const Vec3 lo = config.box.origin, hi = config.box.upper();

  for (const auto& s : pts) {
    for (int a = 0; a < 3; ++a) {
      if (!(s.position[a] > lo[a] && s.position[a] < hi[a])) rep.inside_box = false;
    }
  }

  // |rho(B_r(x))| is taken as the atom count in the open ball. The optimal
  // ball for the largest enclosable subset can be centred at that subset's
  // minimal enclosing ball centre, which is a point, a pair midpoint, or a
  // triangle/tetrahedron circumcentre; enumerate those within reach.
  std::vector<std::vector<std::size_t>> nbr(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norm(pts[i].position - pts[j].position) < 2.0 * r) {
        nbr[i].push_back(j);
        nbr[j].push_back(i);
      }
    }
  }
  auto count_at = [&](std::size_t base, const Vec3& c) {
    double m = norm(pts[base].position - c) < r ? 1.0 : 0.0;
    for (std::size_t j : nbr[base]) {
      if (norm(pts[j].position - c) < r) m += 1.0;
    }
    return m;
  };
  auto consider = [&](std::size_t base, const Vec3& c) {
    const double m = count_at(base, c);
    if (m > rep.max_ball_mass) {
      rep.max_ball_mass = m;
      rep.worst_center = c;
    }
  };
  auto close = [&](std::size_t a, std::size_t b) { return norm(pts[a].position - pts[b].position) < 2.0 * r; };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& pi = pts[i].position;
    consider(i, pi);
    const auto& ni = nbr[i];
    for (std::size_t a = 0; a < ni.size(); ++a) {
      const std::size_t j = ni[a];
      if (j < i) continue;
      consider(i, 0.5 * (pi + pts[j].position));
      for (std::size_t b = a + 1; b < ni.size(); ++b) {
        const std::size_t k = ni[b];
        if (k < i || !close(j, k)) continue;
        Vec3 c;
        if (circumcenter3(pi, pts[j].position, pts[k].position, c) && norm(c - pi) < r) consider(i, c);
        for (std::size_t e = b + 1; e < ni.size(); ++e) {
          const std::size_t l = ni[e];
          if (l < i || !close(j, l) || !close(k, l)) continue;
          if (circumcenter4(pi, pts[j].position, pts[k].position, pts[l].position, c) && norm(c - pi) < r) {
            consider(i, c);
          }
        }
      }
    }
  }
  rep.concentration_ok = rep.max_ball_mass <= config.concentration_bound;

  double worst = 0.0;
  if (!rep.concentration_ok) worst = (rep.max_ball_mass - config.concentration_bound) / config.concentration_bound;

  rep.min_pair_distance = std::numeric_limits<double>::infinity();
  rep.min_boundary_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) {
      rep.min_boundary_distance =
          std::min({rep.min_boundary_distance, pts[i].position[a] - lo[a], hi[a] - pts[i].position[a]});
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      rep.min_pair_distance = std::min(rep.min_pair_distance, norm(pts[i].position - pts[j].position));
    }
  }
  if (delta_sep) {
    const double d = *delta_sep;
    rep.separation_checked = true;
    rep.separation_ok = rep.min_pair_distance >= 2.0 * d && rep.min_boundary_distance >= d;
    if (rep.min_pair_distance < 2.0 * d) worst = std::max(worst, (2.0 * d - rep.min_pair_distance) / (2.0 * d));
    if (rep.min_boundary_distance < d) worst = std::max(worst, (d - rep.min_boundary_distance) / d);
  }
  if (!rep.inside_box) worst = std::max(worst, 1.0);
  rep.worst_violation = worst;
  return rep;
}

// ---------------------------------------------------------------- assembly

void require_resolution(const Grid3D& grid, double r) {
  if (grid.spacing() > 0.25 * r * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "grid spacing " << grid.spacing() << " exceeds r/4 = " << 0.25 * r;
    throw GridTooCoarseError(os.str());
  }
}

ScalarField assemble_charge_density(const SoluteConfiguration& config, const SpeciesTable& species, const Grid3D& grid,
                                    const AssemblyOptions& options) {
  require_resolution(grid, config.r);
  ScalarField q(grid);
  const double r = config.r;
  const double inv_r3 = 1.0 / (r * r * r);
  const double half_width = 0.5 * grid.spacing() / r;
  const Vec3 lo = grid.origin(), hi = grid.upper();
  for (const auto& s : config.solutes) {
    const auto& sp = species.get(s.species);
    const double reach = sp.profile.support_radius() * r;
    for (int a = 0; a < 3; ++a) {
      if (s.position[a] - reach < lo[a] || s.position[a] + reach > hi[a]) {
        std::ostringstream os;
        os << "charge profile of species " << s.species << " at (" << s.position[0] << ", " << s.position[1] << ", "
           << s.position[2] << ") crosses the box boundary";
        throw ProfileClippedError(os.str());
      }
    }
    if (sp.profile.total_charge() == 0.0 && sp.profile.is_uniform_ball()) continue;
    std::array<int, 3> clo{}, chi{};
    grid.cell_range(s.position, reach, clo, chi);
    for (int k = clo[2]; k < chi[2]; ++k) {
      for (int j = clo[1]; j < chi[1]; ++j) {
        for (int i = clo[0]; i < chi[0]; ++i) {
          const Vec3 y = (1.0 / r) * (grid.center(i, j, k) - s.position);
          const double v = sp.profile.cell_average(y, half_width, options.subsamples);
          if (v != 0.0) q.at(i, j, k) += v * inv_r3;
        }
      }
    }
  }
  return q;
}

ScalarField positive_part(const ScalarField& q) {
  ScalarField out = q;
  for (double& v : out.values) v = std::max(v, 0.0);
  return out;
}

ScalarField assemble_lj_potential(const SoluteConfiguration& config, const SpeciesTable& species, const Grid3D& grid) {
  require_resolution(grid, config.r);
  ScalarField u(grid);
  const double r = config.r;
  for (const auto& s : config.solutes) {
    const auto& lj = species.get(s.species).lj;
    if (lj.well_depth == 0.0) continue;
    const double reach = lj.cutoff_radius * r;
    std::array<int, 3> clo{}, chi{};
    grid.cell_range(s.position, reach, clo, chi);
    for (int k = clo[2]; k < chi[2]; ++k) {
      for (int j = clo[1]; j < chi[1]; ++j) {
        for (int i = clo[0]; i < chi[0]; ++i) {
          const double d = norm(grid.center(i, j, k) - s.position) / r;
          if (d >= lj.cutoff_radius) continue;
          u.at(i, j, k) += lj.value(d);
        }
      }
    }
  }
  return u;
}

}  // namespace solvlab
