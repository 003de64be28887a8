#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "solvlab/analysis.hpp"
#include "solvlab/interface.hpp"
#include "solvlab/model.hpp"

namespace solvlab::cli {

enum class Kind { Solve, CellEnergy, ScalingSweep, ScreeningProbe, ClusterCheck };

std::string kind_name(Kind k);
Kind parse_kind(const std::string& s);

struct CellEnergySpec {
  int species = 1;
  std::vector<double> radii{8.0, 16.0, 32.0};
  double spacing = 0.25;  ///< at r = 1
};

enum class Schedule { Sub, Super };

struct ScalingSweepSpec {
  Schedule schedule = Schedule::Sub;
  std::vector<int> K{1, 2, 3};
  double c = 1.0;  ///< r = c alpha^-p with alpha = K^3
  double p = 1.0;
  std::vector<double> alpha_table;  ///< explicit alpha per K (overrides K^3 for the law)
  double margin = 0.4;              ///< box = [-margin, 1 + margin]^3, at least 4 r
  double cells_per_r = 4.0;         ///< grid spacing r / cells_per_r
  int species = 1;
  std::optional<double> e0;    ///< single-cell energy; computed when absent
  double e0_radius = 8.0;      ///< truncation radius for computing e0
  double e0_spacing = 0.25;
  bool singles = false;        ///< also solve every site alone (neighbour share)
};

struct ScreeningProbeSpec {
  double r = 1.0;
  double half_width = 15.0;  ///< box half width in units of r
  double cells_per_r = 4.0;
  double dmin = 2.0;         ///< fit range in units of r
  double dmax = 10.0;
};

struct ClusterCheckSpec {
  int sets = 20;
  int points = 100;
  double extent = 4.0;  ///< points uniform in [0, extent)^3
  double delta = 1.0;
  double L = 2.0;
  double r = 0.05;
  int sublattice = 4;
  int max_candidates = 128;
};

struct ExperimentSpec {
  std::string id = "experiment";
  Kind kind = Kind::Solve;
  int schema_version = 1;
  ModelParams params;
  BModel B;
  SpeciesTable species;
  SoluteConfiguration configuration;
  double spacing = 0.0;  ///< grid spacing for kind=solve (0: r / 4)
  double tol = 1e-8;
  double potential_tol = 1e-10;
  int max_outer = 50;
  bool dump_fields = false;
  std::uint64_t seed = 0;

  CellEnergySpec cell_energy;
  ScalingSweepSpec sweep;
  ScreeningProbeSpec screening;
  ClusterCheckSpec cluster;
};

/// Parses a JSON experiment document. Lengths are converted to nanometres.
/// Throws ParseError (line/column) on malformed documents and UnitError on
/// unknown or mismatched units.
ExperimentSpec parse_experiment(const std::string& text);
ExperimentSpec load_experiment(const std::string& path);

/// Tabular report: one CSV row per entry; report.json mirrors it plus metadata.
struct Report {
  std::string id;
  Kind kind = Kind::Solve;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;  ///< ordered key/value pairs

  void add_row(const std::vector<std::string>& values);
  const std::string& cell(std::size_t row, const std::string& column) const;
  double number(std::size_t row, const std::string& column) const;
  std::string meta(const std::string& key) const;
};

struct RunOptions {
  std::string out_dir;  ///< empty: do not write artifacts
  int threads = 1;
  std::optional<std::uint64_t> seed;
  bool paper_convention = false;
};

Report run_solve(const ExperimentSpec& spec, const RunOptions& options);
Report run_cell_energy(const ExperimentSpec& spec, const RunOptions& options);
Report run_scaling_sweep(const ExperimentSpec& spec, const RunOptions& options);
Report run_screening_probe(const ExperimentSpec& spec, const RunOptions& options);
Report run_cluster_check(const ExperimentSpec& spec, const RunOptions& options);

/// Dispatches on spec.kind and writes report.csv / report.json into out_dir.
Report run(const ExperimentSpec& spec, const RunOptions& options);

void write_report(const Report& report, const std::string& out_dir);

struct LatticeSetup {
  SoluteConfiguration config;
  Grid3D grid;
};

/// K^3 solutes at ((i + 1/2)/K, ...) in [0,1]^3 inside [-m, 1 + m]^3 with
/// m >= max(margin, 4r). The spacing divides 1/K and every solute sits on a
/// cell vertex, so all sites see the same local discretisation.
LatticeSetup lattice_setup(int K, double r, double margin, double cells_per_r, int species);

/// Runs `jobs` on a bounded pool of worker threads; results keep job order.
void run_pool(std::size_t jobs, int threads, const std::function<void(std::size_t)>& job);

}  // namespace solvlab::cli
