#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "solvlab/grid.hpp"

namespace solvlab {

/// Charge distribution of one solute species in reference (unit-scale)
/// coordinates. At microscale r a solute at x0 contributes
/// phi((x - x0) / r) / r^3 to the charge density.
class ChargeProfile {
public:
  struct UniformBall {
    double radius = 1.0;
    double charge = 1.0;
  };
  /// Samples on a cubic lattice of spacing `spacing` centred at the origin,
  /// `n` points per axis, x-fastest; trilinear in between.
  struct Tabulated {
    double spacing = 0.0;
    int n = 0;
    std::vector<double> values;
    double support_radius = 0.0;
  };

  ChargeProfile() = default;
  static ChargeProfile uniform_ball(double radius, double charge);
  static ChargeProfile tabulated(double spacing, int n, std::vector<double> values, double support_radius);

  double support_radius() const;
  /// Integral of the profile (quadrature sum for tabulated profiles).
  double total_charge() const;
  double value(const Vec3& y) const;
  /// Mean of the profile over the cube centre +- half_width (reference units),
  /// exact on cells that the support covers fully or misses.
  double cell_average(const Vec3& center, double half_width, int subsamples) const;

  bool is_uniform_ball() const { return std::holds_alternative<UniformBall>(shape_); }
  const std::variant<UniformBall, Tabulated>& shape() const { return shape_; }

private:
  std::variant<UniformBall, Tabulated> shape_{UniformBall{}};
  double total_charge_ = 1.0;
};

/// 12-6 Lennard-Jones solute-solvent potential in reference units, hard
/// cutoff at cutoff_radius, value clamped inside core_radius / 8.
struct LennardJones {
  double well_depth = 0.0;
  double core_radius = 1.0;
  double cutoff_radius = 2.5;

  double value(double distance) const;
  double minimum_location() const;
  /// Integral of max(-U, 0) over R^3 (reference units), by radial quadrature.
  double negative_part_integral() const;
};

struct SoluteSpecies {
  int id = 1;
  ChargeProfile profile;
  LennardJones lj;

  double total_charge() const { return profile.total_charge(); }
};

class SpeciesTable {
public:
  SpeciesTable() = default;
  explicit SpeciesTable(std::vector<SoluteSpecies> species);

  const SoluteSpecies& get(int id) const;
  bool contains(int id) const;
  const std::vector<SoluteSpecies>& all() const { return species_; }
  std::size_t size() const { return species_.size(); }
  /// Position of species `id` in the composition vector.
  std::size_t slot(int id) const;

private:
  std::vector<SoluteSpecies> species_;
};

/// Default species: unit-charge uniform ball of radius 1.
SoluteSpecies default_species(int id = 1);

struct Box {
  Vec3 origin{0.0, 0.0, 0.0};
  Vec3 extent{1.0, 1.0, 1.0};

  Vec3 upper() const { return origin + extent; }
  double volume() const { return extent[0] * extent[1] * extent[2]; }
  Vec3 center() const { return origin + 0.5 * extent; }
};

struct Solute {
  int species = 1;
  Vec3 position{0.0, 0.0, 0.0};
};

struct SoluteConfiguration {
  Box box;
  double r = 1.0;
  std::vector<Solute> solutes;
  double concentration_bound = 1.0;

  std::size_t size() const { return solutes.size(); }
};

/// Concatenation of two configurations sharing box and microscale.
SoluteConfiguration concatenate(const SoluteConfiguration& a, const SoluteConfiguration& b);

/// Ionic penalty B(s) acting on the electric potential in solvent.
class BModel {
public:
  struct Zero {};
  struct Quadratic {
    double stiffness = 1.0;
  };
  struct Ion {
    double bulk_concentration = 0.0;
    double charge = 0.0;
  };
  struct Ionic {
    std::vector<Ion> ions;
    double kbt = 1.0;
  };

  BModel() = default;
  static BModel zero();
  static BModel quadratic(double stiffness);
  /// Requires sum_k c_k q_k = 0 (bulk electroneutrality, so B'(0) = 0);
  /// warns when sum_k q_k != 0.
  static BModel ionic(std::vector<Ion> ions, double kbt);

  bool is_zero() const { return std::holds_alternative<Zero>(variant_); }
  bool is_quadratic() const { return std::holds_alternative<Quadratic>(variant_); }
  bool is_ionic() const { return std::holds_alternative<Ionic>(variant_); }
  /// Quadratic models have constant curvature and give a linear problem.
  bool is_linear() const { return !is_ionic(); }
  const std::variant<Zero, Quadratic, Ionic>& variant() const { return variant_; }
  /// (B2) constant when known in closed form (Quadratic: c = 1).
  std::optional<double> analytic_b2_constant() const;
  std::string name() const;

private:
  std::variant<Zero, Quadratic, Ionic> variant_{Zero{}};
};

double b_value(const BModel& b, double s);
double b_subgradient(const BModel& b, double s);
double b_curvature(const BModel& b, double s);

/// Estimates the (B2) constant: inf over samples s != 0 in [lo, hi] of
/// s B'(s) / B(s) - 1, clipped at 0. Samples with |s| < 1e-6 are skipped.
double check_B2(const BModel& b, double lo, double hi, int n_samples);

struct ModelParams {
  double beta = 1.0;   ///< pressure
  double gamma = 0.0;  ///< surface tension
  double a = 0.0;      ///< coercivity weight on |rho|
  double eps0 = 1.0;   ///< dielectric in the solute region (u = 0)
  double eps1 = 1.0;   ///< dielectric in the solvent (u = 1)
  double M = 1.0;      ///< concentration bound

  /// Throws std::invalid_argument unless eps1 >= eps0 > 0, beta > 0, gamma >= 0.
  void validate() const;
  double eps(std::uint8_t u) const { return u ? eps1 : eps0; }
};

struct AdmissibilityReport {
  bool concentration_ok = true;
  double max_ball_mass = 0.0;  ///< sup_x |rho(B_r(x))|
  Vec3 worst_center{0.0, 0.0, 0.0};

  bool separation_checked = false;
  bool separation_ok = true;
  double min_pair_distance = 0.0;      ///< +inf when fewer than two solutes
  double min_boundary_distance = 0.0;  ///< +inf when empty

  bool inside_box = true;

  bool admissible() const { return inside_box && concentration_ok && (!separation_checked || separation_ok); }
  /// Largest relative violation among the checked conditions (0 when admissible).
  double worst_violation = 0.0;
};

/// Checks membership in A_r (concentration bound, by exact enclosing-ball
/// enumeration over pairwise distances) and, when delta_sep is given, the
/// well-separated class: pair distances >= 2 delta, boundary distance >= delta.
AdmissibilityReport check_admissible(const SoluteConfiguration& config, std::optional<double> delta_sep = std::nullopt);

struct AssemblyOptions {
  int subsamples = 10;  ///< per-axis subsamples on cells cut by a profile boundary
};

/// Q_r rho as cell averages of sum_j phi((x - x_j)/r)/r^3.
ScalarField assemble_charge_density(const SoluteConfiguration& config, const SpeciesTable& species, const Grid3D& grid,
                                    const AssemblyOptions& options = {});

/// Positive part of a charge density (Q^+).
ScalarField positive_part(const ScalarField& q);

/// U_{r,rho} sampled at cell centres.
ScalarField assemble_lj_potential(const SoluteConfiguration& config, const SpeciesTable& species, const Grid3D& grid);

/// Cells with spacing above r/4 cannot resolve the profiles.
void require_resolution(const Grid3D& grid, double r);

}  // namespace solvlab
