#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "solvlab/error.hpp"
#include "solvlab/grid.hpp"
#include "solvlab/interface.hpp"
#include "solvlab/model.hpp"

namespace solvlab {

// ---------------------------------------------------------------- self-energy

/// Cubic grid centred at the origin, inscribed in the ball of radius R:
/// an even number of cells per axis so that the origin is a cell vertex.
Grid3D truncation_grid(double R, double spacing);

/// Half-diagonal of truncation_grid(R, spacing), i.e. the radius actually used.
double truncation_radius(double R, double spacing);

struct SelfEnergyProblem {
  SpeciesTable species;
  BModel B;
  ModelParams params;
  double spacing = 0.25;  ///< grid spacing at r = 1
  SaddleOptions saddle;
};

/// Saddle energy at r = 1 of `cluster` (positions in reference units, placed
/// around the origin) in truncation_grid(R). Returns the full breakdown.
SaddleSolution cluster_energy(const std::vector<Solute>& cluster, double R, const SelfEnergyProblem& problem);

/// E_1(e_i delta_0; B_R) for a single solute of species `species_id` at the origin.
double self_energy_truncated(int species_id, double R, const SelfEnergyProblem& problem);

struct SelfEnergyEstimate {
  std::vector<double> xi;
  std::vector<double> radii;      ///< requested radii
  std::vector<double> effective;  ///< radii actually used by the grids
  std::vector<double> energies;
  double extrapolated = 0.0;  ///< E_inf of the fit E = E_inf + C / R
  double tail_coefficient = 0.0;
  double fit_residual = 0.0;   ///< max |E - fit| over the radii
  double tail_exponent = 0.0;  ///< from the first three radii; 1 for a pure 1/R tail
};

/// Least-squares fit of E_inf + C / R (needs at least 3 points).
SelfEnergyEstimate fit_truncation(const std::vector<double>& radii, const std::vector<double>& energies);

/// Runs self_energy_truncated over `radii` and fits the tail.
SelfEnergyEstimate estimate_self_energy(int species_id, const std::vector<double>& radii,
                                        const SelfEnergyProblem& problem);

// ---------------------------------------------------------------- phi upper bound

struct ClusterEntry {
  std::vector<double> composition;  ///< species counts n_k (one slot per species)
  double energy = 0.0;              ///< E_1 of the cluster
  std::string label;
};

/// min over entries whose composition is a positive multiple of xi of
/// E_k (xi . n_k) / (n_k . n_k). Throws EmptyLibraryError / MissingDirectionError.
double phi_upper(const std::vector<double>& xi, const std::vector<ClusterEntry>& library);

// ---------------------------------------------------------------- H^-1

enum class HMethod { Pde, Kernel };

enum class BoundaryData {
  Zero,       ///< homogeneous Dirichlet data on the grid box
  FreeSpace,  ///< Dirichlet data from the free-space Coulomb potential of mu
};

struct Hminus1Value {
  double value = 0.0;
  HMethod method = HMethod::Kernel;
  bool paper_convention = false;  ///< true: kernel 1/|x-y|; false: 1/(4 pi |x-y|)
};

struct Atom {
  Vec3 position{0.0, 0.0, 0.0};
  double mass = 0.0;
  /// Double integral of the atom's own profile under 1/(4 pi |x-y|); when
  /// absent the diagonal term is dropped.
  std::optional<double> self_term;
};

/// sum_{i != j} m_i m_j / (4 pi |x_i - x_j|) + sum_i m_i^2 self_i.
Hminus1Value hminus1_atoms(const std::vector<Atom>& atoms, bool paper_convention = false);

struct Hminus1Options {
  HMethod method = HMethod::Kernel;
  BoundaryData boundary = BoundaryData::FreeSpace;
  bool paper_convention = false;
  double tol = 1e-10;  ///< CG tolerance for the pde route
};

/// Norm of a piecewise-constant density: kernel route sums exact cell-cell
/// integrals; pde route solves -Lap psi = mu on the grid and returns <mu, psi>.
Hminus1Value hminus1_field(const ScalarField& mu, const Hminus1Options& options = {});

/// int_{[0,1]^3} int_{[0,1]^3} dx dy / |x - y|.
double unit_cube_coulomb_integral();

/// int_{[0,1]^3} int_{[0,1]^3 + offset} dx dy / |x - y| for an integer offset.
double cube_pair_integral(int dx, int dy, int dz);

// ---------------------------------------------------------------- cubes

struct CubePartition {
  double delta = 0.0;
  Vec3 offset{0.0, 0.0, 0.0};
  std::vector<std::array<long, 3>> cube_of_point;
  std::size_t cube_count = 0;
  double total_mass = 0.0;
  double cross_interaction = 0.0;  ///< ordered split pairs of m_a m_b / |x_a - x_b|
  double interaction_bound = 0.0;  ///< 4 M^2 / delta
  bool frame_checked = false;
  double frame_cost = 0.0;   ///< local cost within L r of the cube boundaries
  double local_cost = 0.0;   ///< total local cost
  double frame_bound = 0.0;  ///< C L r / delta * local_cost
  int candidates_tried = 0;

  bool certified() const {
    return cross_interaction <= interaction_bound && (!frame_checked || frame_cost <= frame_bound);
  }
};

/// Offset search failed; carries the best candidate seen.
class ClusterSearchError : public Error {
public:
  ClusterSearchError(const std::string& what, CubePartition best) : Error(what), best_(std::move(best)) {}
  const CubePartition& best() const { return best_; }

private:
  CubePartition best_;
};

struct ClusterOptions {
  int sublattice = 4;  ///< offsets on a sublattice^3 grid of [0, delta)^3 come first
  int max_candidates = 128;
  std::uint64_t seed = 0;
  double frame_constant = 48.0;
};

/// Local cost field beta r^-3 (1 - u) + gamma r^-2 |Du| per cell (face jumps split evenly).
ScalarField local_cost_field(const PhaseField& u, const ModelParams& params, double r);

/// Finds an offset z0 such that the half-open cubes z0 + delta (Z^3 + [0,1)^3)
/// satisfy the interaction bound and, when `local_cost` is given, the frame bound.
CubePartition cluster_cubes(const std::vector<Vec3>& points, const std::vector<double>& masses, double delta, double L,
                            double r, const ScalarField* local_cost = nullptr, const ClusterOptions& options = {});

/// Re-evaluates the bounds of a partition for a given offset.
CubePartition evaluate_partition(const std::vector<Vec3>& points, const std::vector<double>& masses, double delta,
                                 double L, double r, const Vec3& offset, const ScalarField* local_cost,
                                 double frame_constant);

// ---------------------------------------------------------------- limits

enum class Regime { Sub, Crit, Super };

struct PhiEntry {
  std::vector<double> direction;
  double estimate = 0.0;
  std::vector<double> radii;
  double residual = 0.0;
};

struct PhiTable {
  std::vector<PhiEntry> entries;
  /// phi_hat(xi) by 1-homogeneity from an entry parallel to xi.
  double lookup(const std::vector<double>& xi) const;
};

/// Point mass with a composition vector (one count per species).
struct AtomicMass {
  Vec3 position{0.0, 0.0, 0.0};
  std::vector<double> composition;
};

/// Uniform composition density on an axis-aligned cube.
struct CubeBlock {
  Vec3 lower{0.0, 0.0, 0.0};
  double side = 1.0;
  std::vector<double> density;
};

struct LimitDensity {
  std::vector<AtomicMass> atoms;
  std::vector<CubeBlock> blocks;
};

struct LimitOptions {
  double alpha = 1.0;
  double eps1 = 1.0;
  std::vector<double> species_charges;  ///< total charge per species slot
  double spacing = 1.0 / 16.0;          ///< rasterisation spacing for the H^-1 term
  bool paper_convention = false;
};

double limit_energy(const LimitDensity& rho, Regime regime, const PhiTable& phi, const LimitOptions& options);

/// Charge density Q_0 rho of the blocks on a grid covering them.
ScalarField rasterize_blocks(const std::vector<CubeBlock>& blocks, const std::vector<double>& charges, double spacing);

// ---------------------------------------------------------------- decay fits

struct RaySample {
  double distance = 0.0;
  double value = 0.0;
};

/// Values of psi at cell centres along +x from the cell vertex or centre nearest to `source`.
std::vector<RaySample> sample_axis(const ScalarField& psi, const Vec3& source, double dmin, double dmax);

struct ExponentialFit {
  double length = 0.0;     ///< decay length lambda of A exp(-d/lambda)/d
  double amplitude = 0.0;
  double residual = 0.0;   ///< rms of the log residuals
  int samples = 0;
};

/// Linear least squares on ln(|psi| d) = ln A - d / lambda.
ExponentialFit fit_exponential_decay(const std::vector<RaySample>& samples);

struct PowerFit {
  double exponent = 0.0;  ///< s in A d^s + C
  double amplitude = 0.0;
  double offset = 0.0;
  double residual = 0.0;  ///< rms residual relative to max |psi|
  int samples = 0;
};

/// |psi| = A d^s (log-log least squares) or, with `with_offset`, A d^s + C.
PowerFit fit_power_decay(const std::vector<RaySample>& samples, bool with_offset);

}  // namespace solvlab
