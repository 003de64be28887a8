#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "solvlab/error.hpp"
#include "solvlab/io.hpp"
#include "solvlab/pbsolver.hpp"

namespace solvlab::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing helpers

struct Context {
  const std::string& text;
  double length_factor = 1.0;  // declared length unit -> nm
};

// Approximate source position of a key: first quoted occurrence of the key.
ParseError located(const Context& ctx, const std::string& key, const std::string& message) {
  const std::size_t at = ctx.text.find("\"" + key + "\"");
  int line = 1, col = 1;
  if (at != std::string::npos) line_column(ctx.text, at, line, col);
  return ParseError(message, line, col);
}

double length_unit(const std::string& u) {
  if (u == "nm") return 1.0;
  if (u == "angstrom" || u == "A" || u == "Å") return 0.1;
  if (u == "pm") return 1e-3;
  throw UnitError("unknown length unit '" + u + "' (expected nm, angstrom or pm)");
}

// Number (in the declared unit) or a string "<value> <unit>".
double length_value(const Context& ctx, const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>() * ctx.length_factor;
  if (!v.is_string()) throw located(ctx, key, key + ": expected a length");
  std::istringstream is(v.get<std::string>());
  double x = 0.0;
  std::string unit;
  if (!(is >> x)) throw located(ctx, key, key + ": cannot read number in '" + v.get<std::string>() + "'");
  if (!(is >> unit)) return x * ctx.length_factor;
  if (unit == "kT") throw UnitError(key + ": an energy was given where a length is expected");
  return x * length_unit(unit);
}

double energy_value(const Context& ctx, const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw located(ctx, key, key + ": expected an energy");
  std::istringstream is(v.get<std::string>());
  double x = 0.0;
  std::string unit;
  if (!(is >> x)) throw located(ctx, key, key + ": cannot read number");
  if (!(is >> unit) || unit == "kT") return x;
  throw UnitError(key + ": unknown energy unit '" + unit + "' (only kT is supported)");
}

// Plain dimensionless number; strings with units are rejected.
double plain(const Context& ctx, const json& v, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) throw UnitError(key + ": dimensionless value given with a unit");
  throw located(ctx, key, key + ": expected a number");
}

template <typename T>
T get_or(const Context& ctx, const json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw located(ctx, key, key + ": wrong type");
  }
}

double number_or(const Context& ctx, const json& obj, const std::string& key, double fallback) {
  return obj.contains(key) ? plain(ctx, obj.at(key), key) : fallback;
}

Vec3 length_vec(const Context& ctx, const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) throw located(ctx, key, key + ": expected an array of three lengths");
  return {length_value(ctx, v[0], key), length_value(ctx, v[1], key), length_value(ctx, v[2], key)};
}

SoluteSpecies parse_species(const Context& ctx, const json& j) {
  SoluteSpecies sp = default_species(get_or<int>(ctx, j, "id", 1));
  if (j.contains("profile")) {
    const json& p = j.at("profile");
    const std::string type = get_or<std::string>(ctx, p, "type", "uniform_ball");
    if (type == "uniform_ball") {
      sp.profile = ChargeProfile::uniform_ball(number_or(ctx, p, "radius", 1.0), number_or(ctx, p, "charge", 1.0));
    } else if (type == "tabulated") {
      sp.profile = ChargeProfile::tabulated(number_or(ctx, p, "spacing", 0.0), get_or<int>(ctx, p, "n", 0),
                                            get_or<std::vector<double>>(ctx, p, "values", {}),
                                            number_or(ctx, p, "support_radius", 0.0));
    } else {
      throw located(ctx, "type", "unknown profile type '" + type + "'");
    }
  }
  if (j.contains("lj")) {
    const json& l = j.at("lj");
    if (l.contains("well_depth")) sp.lj.well_depth = energy_value(ctx, l.at("well_depth"), "well_depth");
    sp.lj.core_radius = number_or(ctx, l, "core_radius", sp.lj.core_radius);
    sp.lj.cutoff_radius = number_or(ctx, l, "cutoff_radius", sp.lj.cutoff_radius);
  }
  return sp;
}

BModel parse_b(const Context& ctx, const json& j) {
  const std::string type = get_or<std::string>(ctx, j, "type", "zero");
  if (type == "zero") return BModel::zero();
  if (type == "quadratic") return BModel::quadratic(number_or(ctx, j, "stiffness", 1.0));
  if (type == "ionic") {
    std::vector<BModel::Ion> ions;
    if (!j.contains("ions") || !j.at("ions").is_array()) throw located(ctx, "ions", "ionic B needs an 'ions' array");
    for (const auto& ion : j.at("ions")) {
      ions.push_back({number_or(ctx, ion, "bulk_concentration", 0.0), number_or(ctx, ion, "charge", 0.0)});
    }
    const double kbt = j.contains("kbt") ? energy_value(ctx, j.at("kbt"), "kbt") : 1.0;
    return BModel::ionic(std::move(ions), kbt);
  }
  throw located(ctx, "type", "unknown B model '" + type + "'");
}

}  // namespace

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::Solve: return "solve";
    case Kind::CellEnergy: return "cell-energy";
    case Kind::ScalingSweep: return "scaling-sweep";
    case Kind::ScreeningProbe: return "screening-probe";
    case Kind::ClusterCheck: return "cluster-check";
  }
  return "solve";
}

Kind parse_kind(const std::string& s) {
  for (Kind k : {Kind::Solve, Kind::CellEnergy, Kind::ScalingSweep, Kind::ScreeningProbe, Kind::ClusterCheck}) {
    if (kind_name(k) == s) return k;
  }
  throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

ExperimentSpec parse_experiment(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    int line = 1, col = 1;
    line_column(text, e.byte == 0 ? 0 : e.byte - 1, line, col);
    throw ParseError(std::string("malformed experiment document: ") + e.what(), line, col);
  }
  Context ctx{text};
  if (!doc.is_object()) throw ParseError("experiment document must be a JSON object", 1, 1);

  ExperimentSpec spec;
  spec.schema_version = get_or<int>(ctx, doc, "schema_version", 0);
  if (spec.schema_version != 1) {
    throw located(ctx, "schema_version", "unsupported schema_version " + std::to_string(spec.schema_version));
  }
  if (doc.contains("units")) {
    const json& u = doc.at("units");
    ctx.length_factor = length_unit(get_or<std::string>(ctx, u, "length", "nm"));
    const std::string energy = get_or<std::string>(ctx, u, "energy", "kT");
    if (energy != "kT") throw UnitError("unknown energy unit '" + energy + "' (only kT is supported)");
  }
  spec.id = get_or<std::string>(ctx, doc, "id", "experiment");
  try {
    spec.kind = parse_kind(get_or<std::string>(ctx, doc, "kind", "solve"));
  } catch (const std::invalid_argument& e) {
    throw located(ctx, "kind", e.what());
  }
  spec.seed = get_or<std::uint64_t>(ctx, doc, "seed", 0);

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    spec.params.beta = number_or(ctx, m, "beta", spec.params.beta);
    spec.params.gamma = number_or(ctx, m, "gamma", spec.params.gamma);
    spec.params.a = number_or(ctx, m, "a", spec.params.a);
    spec.params.eps0 = number_or(ctx, m, "eps0", spec.params.eps0);
    spec.params.eps1 = number_or(ctx, m, "eps1", spec.params.eps1);
    spec.params.M = number_or(ctx, m, "M", spec.params.M);
  }
  try {
    spec.params.validate();
  } catch (const std::invalid_argument& e) {
    throw located(ctx, "model", e.what());
  }
  if (doc.contains("b_model")) spec.B = parse_b(ctx, doc.at("b_model"));

  std::vector<SoluteSpecies> species;
  if (doc.contains("species")) {
    for (const auto& s : doc.at("species")) species.push_back(parse_species(ctx, s));
  } else {
    species.push_back(default_species(1));
  }
  try {
    spec.species = SpeciesTable(std::move(species));
  } catch (const std::invalid_argument& e) {
    throw located(ctx, "species", e.what());
  }

  if (doc.contains("configuration")) {
    const json& c = doc.at("configuration");
    if (c.contains("box")) {
      spec.configuration.box.origin = length_vec(ctx, c.at("box").at("origin"), "origin");
      spec.configuration.box.extent = length_vec(ctx, c.at("box").at("extent"), "extent");
    }
    if (c.contains("r")) spec.configuration.r = length_value(ctx, c.at("r"), "r");
    spec.configuration.concentration_bound = spec.params.M;
    if (c.contains("solutes")) {
      for (const auto& s : c.at("solutes")) {
        Solute sol;
        sol.species = get_or<int>(ctx, s, "species", 1);
        if (!spec.species.contains(sol.species)) {
          throw located(ctx, "species", "solute refers to unknown species " + std::to_string(sol.species));
        }
        sol.position = length_vec(ctx, s.at("position"), "position");
        spec.configuration.solutes.push_back(sol);
      }
    }
  }
  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    if (g.contains("spacing")) spec.spacing = length_value(ctx, g.at("spacing"), "spacing");
  }
  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    spec.tol = number_or(ctx, s, "tol", spec.tol);
    spec.potential_tol = number_or(ctx, s, "potential_tol", spec.potential_tol);
    spec.max_outer = get_or<int>(ctx, s, "max_outer", spec.max_outer);
  }
  spec.dump_fields = get_or<bool>(ctx, doc, "dump_fields", false);

  if (doc.contains("cell_energy")) {
    const json& c = doc.at("cell_energy");
    spec.cell_energy.species = get_or<int>(ctx, c, "species", 1);
    spec.cell_energy.radii = get_or<std::vector<double>>(ctx, c, "radii", spec.cell_energy.radii);
    spec.cell_energy.spacing = number_or(ctx, c, "spacing", spec.cell_energy.spacing);
  }
  if (doc.contains("scaling_sweep")) {
    const json& s = doc.at("scaling_sweep");
    const std::string sched = get_or<std::string>(ctx, s, "schedule", "sub");
    if (sched == "sub") {
      spec.sweep.schedule = Schedule::Sub;
    } else if (sched == "super") {
      spec.sweep.schedule = Schedule::Super;
    } else {
      throw located(ctx, "schedule", "schedule must be 'sub' or 'super'");
    }
    spec.sweep.K = get_or<std::vector<int>>(ctx, s, "K", spec.sweep.K);
    spec.sweep.c = number_or(ctx, s, "c", spec.sweep.c);
    spec.sweep.p = number_or(ctx, s, "p", spec.sweep.p);
    spec.sweep.alpha_table = get_or<std::vector<double>>(ctx, s, "alpha_table", {});
    spec.sweep.margin = number_or(ctx, s, "margin", spec.sweep.margin);
    spec.sweep.cells_per_r = number_or(ctx, s, "cells_per_r", spec.sweep.cells_per_r);
    spec.sweep.species = get_or<int>(ctx, s, "species", spec.sweep.species);
    if (s.contains("e0")) spec.sweep.e0 = energy_value(ctx, s.at("e0"), "e0");
    spec.sweep.e0_radius = number_or(ctx, s, "e0_radius", spec.sweep.e0_radius);
    spec.sweep.e0_spacing = number_or(ctx, s, "e0_spacing", spec.sweep.e0_spacing);
    spec.sweep.singles = get_or<bool>(ctx, s, "singles", false);
    if (spec.sweep.K.empty()) throw located(ctx, "K", "K schedule is empty");
    for (int k : spec.sweep.K) {
      if (k < 1 || k > 5) throw located(ctx, "K", "K must lie in 1..5");
    }
    if (!spec.sweep.alpha_table.empty() && spec.sweep.alpha_table.size() != spec.sweep.K.size()) {
      throw located(ctx, "alpha_table", "alpha_table needs one entry per K");
    }
    if (!(spec.sweep.p > 0.0) || !(spec.sweep.c > 0.0)) throw located(ctx, "p", "alpha law needs c > 0 and p > 0");
  }
  if (doc.contains("screening_probe")) {
    const json& s = doc.at("screening_probe");
    if (s.contains("r")) spec.screening.r = length_value(ctx, s.at("r"), "r");
    spec.screening.half_width = number_or(ctx, s, "half_width", spec.screening.half_width);
    spec.screening.cells_per_r = number_or(ctx, s, "cells_per_r", spec.screening.cells_per_r);
    spec.screening.dmin = number_or(ctx, s, "dmin", spec.screening.dmin);
    spec.screening.dmax = number_or(ctx, s, "dmax", spec.screening.dmax);
  }
  if (doc.contains("cluster_check")) {
    const json& s = doc.at("cluster_check");
    spec.cluster.sets = get_or<int>(ctx, s, "sets", spec.cluster.sets);
    spec.cluster.points = get_or<int>(ctx, s, "points", spec.cluster.points);
    spec.cluster.extent = number_or(ctx, s, "extent", spec.cluster.extent);
    spec.cluster.delta = number_or(ctx, s, "delta", spec.cluster.delta);
    spec.cluster.L = number_or(ctx, s, "L", spec.cluster.L);
    spec.cluster.r = number_or(ctx, s, "r", spec.cluster.r);
    spec.cluster.sublattice = get_or<int>(ctx, s, "sublattice", spec.cluster.sublattice);
    spec.cluster.max_candidates = get_or<int>(ctx, s, "max_candidates", spec.cluster.max_candidates);
  }
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_experiment(ss.str());
}

// ---------------------------------------------------------------- reports

void Report::add_row(const std::vector<std::string>& values) {
  if (values.size() != columns.size()) throw std::logic_error("Report::add_row: column count mismatch");
  rows.push_back(values);
}

const std::string& Report::cell(std::size_t row, const std::string& column) const {
  const auto it = std::find(columns.begin(), columns.end(), column);
  if (it == columns.end()) throw std::out_of_range("Report: no column " + column);
  return rows.at(row).at(static_cast<std::size_t>(it - columns.begin()));
}

double Report::number(std::size_t row, const std::string& column) const { return std::stod(cell(row, column)); }

std::string Report::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  throw std::out_of_range("Report: no metadata " + key);
}

namespace {

json typed(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  if (!s.empty()) {
    std::size_t used = 0;
    try {
      const long long i = std::stoll(s, &used);
      if (used == s.size()) return i;
    } catch (const std::exception&) {
    }
    try {
      const double v = std::stod(s, &used);
      if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
  }
  return s;
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

}  // namespace

void write_report(const Report& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream os(std::filesystem::path(out_dir) / "report.csv", std::ios::binary);
    if (!os) throw std::runtime_error("cannot write report.csv in " + out_dir);
    CsvWriter w(os);
    std::vector<std::string> header{"experiment", "kind"};
    header.insert(header.end(), report.columns.begin(), report.columns.end());
    w.row(header);
    for (const auto& r : report.rows) {
      std::vector<std::string> line{report.id, kind_name(report.kind)};
      line.insert(line.end(), r.begin(), r.end());
      w.row(line);
    }
  }
  json j;
  j["experiment"] = report.id;
  j["kind"] = kind_name(report.kind);
  j["columns"] = report.columns;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json row = json::object();
    for (std::size_t c = 0; c < r.size(); ++c) row[report.columns[c]] = typed(r[c]);
    j["rows"].push_back(row);
  }
  json meta = json::object();
  for (const auto& [k, v] : report.metadata) meta[k] = typed(v);
  j["metadata"] = meta;
  std::ofstream os(std::filesystem::path(out_dir) / "report.json", std::ios::binary);
  if (!os) throw std::runtime_error("cannot write report.json in " + out_dir);
  os << j.dump(2) << '\n';
}

void run_pool(std::size_t jobs, int threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::min<std::size_t>(jobs, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) job(i);
    return;
  }
  std::mutex m;
  std::size_t next = 0;
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(m);
          if (next >= jobs) return;
          i = next++;
        }
        try {
          job(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

LatticeSetup lattice_setup(int K, double r, double margin, double cells_per_r, int species) {
  if (K < 1) throw std::invalid_argument("lattice_setup: K must be positive");
  const double s = 1.0 / K;
  const int q = static_cast<int>(std::ceil(s / (r / cells_per_r) - 1e-9));
  const double h = s / q;
  const double m = std::max(margin, 4.0 * r);
  const int mc = static_cast<int>(std::ceil((0.5 * s + m) / h - 1e-9));
  const int n = 2 * mc + (K - 1) * q;
  const double o = 0.5 * s - mc * h;
  LatticeSetup out;
  out.grid = Grid3D({o, o, o}, h, {n, n, n});
  out.config.box = Box{out.grid.origin(), out.grid.extent()};
  out.config.r = r;
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < K; ++j) {
      for (int i = 0; i < K; ++i) {
        out.config.solutes.push_back({species, {(i + 0.5) * s, (j + 0.5) * s, (k + 0.5) * s}});
      }
    }
  }
  return out;
}

namespace {

SaddleOptions saddle_options(const ExperimentSpec& spec) {
  SaddleOptions o;
  o.tol = spec.tol;
  o.potential_tol = spec.potential_tol;
  o.max_outer = spec.max_outer;
  return o;
}

const std::vector<std::string> kTermColumns{"term_rho", "term_pressure", "term_surface", "term_lj", "term_electric",
                                             "total"};

void append_terms(std::vector<std::string>& row, const EnergyBreakdown& e) {
  for (double v : {e.term_rho, e.term_pressure, e.term_surface, e.term_lj, e.term_electric, e.total}) {
    row.push_back(fmt(v));
  }
}

void require_admissible(const SoluteConfiguration& config) {
  const AdmissibilityReport rep = check_admissible(config);
  if (!rep.admissible()) {
    std::ostringstream os;
    os << "configuration is not admissible (max ball mass " << rep.max_ball_mass << " > M = "
       << config.concentration_bound << ", inside box: " << (rep.inside_box ? "yes" : "no") << ")";
    throw InadmissibleError(os.str());
  }
}

}  // namespace

// ---------------------------------------------------------------- verbs

Report run_solve(const ExperimentSpec& spec, const RunOptions& options) {
  const SoluteConfiguration& config = spec.configuration;
  const double h = spec.spacing > 0.0 ? spec.spacing : config.r / 4.0;
  const Grid3D grid = Grid3D::covering(config.box.origin, config.box.extent, h);
  require_admissible(config);
  const SaddleSolution sol = solve_saddle(config, spec.species, spec.B, spec.params, grid, saddle_options(spec));

  Report rep;
  rep.id = spec.id;
  rep.kind = Kind::Solve;
  rep.columns = {"solutes", "r", "spacing", "cells"};
  rep.columns.insert(rep.columns.end(), kTermColumns.begin(), kTermColumns.end());
  rep.columns.insert(rep.columns.end(), {"excluded_volume", "outer_iterations", "converged", "cycled"});
  std::vector<std::string> row{fmt(config.size()), fmt(config.r), fmt(h), fmt(grid.cell_count())};
  append_terms(row, sol.breakdown);
  row.push_back(fmt(static_cast<double>(sol.u.count_zero()) * grid.cell_volume()));
  row.push_back(fmt(sol.outer_iterations));
  row.push_back(fmt(sol.converged));
  row.push_back(fmt(sol.cycled));
  rep.add_row(row);
  rep.metadata = {{"b_model", spec.B.name()}, {"schema_version", fmt(spec.schema_version)}};
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    std::vector<TraceRow> trace;
    for (std::size_t i = 0; i < sol.history.size(); ++i) {
      const double change = i == 0 ? 0.0 : std::abs(sol.history[i] - sol.history[i - 1]) / (1.0 + std::abs(sol.history[i]));
      trace.push_back({static_cast<int>(i + 1), change, sol.history[i]});
    }
    write_trace_csv((std::filesystem::path(options.out_dir) / "trace.csv").string(), trace);
    if (spec.dump_fields) {
      const auto dir = std::filesystem::path(options.out_dir) / "fields";
      std::filesystem::create_directories(dir);
      write_structured_grid((dir / "u.sg").string(), sol.u);
      write_structured_grid((dir / "psi.sg").string(), sol.psi);
    }
  }
  if (!sol.converged) throw NumericalError("solve: saddle iteration did not converge");
  return rep;
}

Report run_cell_energy(const ExperimentSpec& spec, const RunOptions& options) {
  SelfEnergyProblem problem;
  problem.species = spec.species;
  problem.B = spec.B;
  problem.params = spec.params;
  problem.spacing = spec.cell_energy.spacing;
  problem.saddle = saddle_options(spec);
  const auto& radii = spec.cell_energy.radii;
  std::vector<double> energies(radii.size()), effective(radii.size());
  run_pool(radii.size(), options.threads, [&](std::size_t i) {
    effective[i] = truncation_radius(radii[i], problem.spacing);
    energies[i] = self_energy_truncated(spec.cell_energy.species, radii[i], problem);
  });
  Report rep;
  rep.id = spec.id;
  rep.kind = Kind::CellEnergy;
  rep.columns = {"species", "R", "R_effective", "energy"};
  for (std::size_t i = 0; i < radii.size(); ++i) {
    rep.add_row({fmt(spec.cell_energy.species), fmt(radii[i]), fmt(effective[i]), fmt(energies[i])});
  }
  if (radii.size() >= 3) {
    const SelfEnergyEstimate est = fit_truncation(effective, energies);
    rep.metadata = {{"extrapolated", fmt(est.extrapolated)},
                    {"tail_coefficient", fmt(est.tail_coefficient)},
                    {"fit_residual", fmt(est.fit_residual)},
                    {"tail_exponent", fmt(est.tail_exponent)}};
    if (!options.out_dir.empty()) {
      std::filesystem::create_directories(options.out_dir);
      PhiTable table;
      PhiEntry e;
      e.direction.assign(spec.species.size(), 0.0);
      e.direction[spec.species.slot(spec.cell_energy.species)] = 1.0;
      e.estimate = est.extrapolated;
      e.radii = radii;
      e.residual = est.fit_residual;
      table.entries.push_back(e);
      write_phi_table((std::filesystem::path(options.out_dir) / "phi_table.json").string(), table);
    }
  } else {
    rep.metadata = {{"extrapolated", "nan"}};
  }
  return rep;
}

Report run_scaling_sweep(const ExperimentSpec& spec, const RunOptions& options) {
  const ScalingSweepSpec& sw = spec.sweep;
  const std::size_t n = sw.K.size();
  std::vector<double> alpha(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] = sw.alpha_table.empty() ? std::pow(static_cast<double>(sw.K[i]), 3) : sw.alpha_table[i];
    r[i] = sw.c * std::pow(alpha[i], -sw.p);
  }
  std::vector<LatticeSetup> setups;
  for (std::size_t i = 0; i < n; ++i) {
    setups.push_back(lattice_setup(sw.K[i], r[i], sw.margin, sw.cells_per_r, sw.species));
    setups.back().config.concentration_bound = spec.params.M;
    require_admissible(setups.back().config);
  }
  const SaddleOptions so = saddle_options(spec);
  std::vector<SaddleSolution> sols(n);
  run_pool(n, options.threads, [&](std::size_t i) {
    sols[i] = solve_saddle(setups[i].config, spec.species, spec.B, spec.params, setups[i].grid, so);
  });

  double e0 = 0.0;
  if (sw.e0) {
    e0 = *sw.e0;
  } else {
    SelfEnergyProblem problem;
    problem.species = spec.species;
    problem.B = spec.B;
    problem.params = spec.params;
    problem.spacing = sw.e0_spacing;
    problem.saddle = so;
    e0 = self_energy_truncated(sw.species, sw.e0_radius, problem);
  }
  const double icube = unit_cube_coulomb_integral();
  const double q = spec.species.get(sw.species).total_charge();

  Report rep;
  rep.id = spec.id;
  rep.kind = Kind::ScalingSweep;
  rep.columns = {"K", "M", "alpha", "r", "spacing", "cells"};
  rep.columns.insert(rep.columns.end(), kTermColumns.begin(), kTermColumns.end());
  rep.columns.insert(rep.columns.end(),
                     {"E_over_alpha", "E_over_r_alpha2", "heuristic", "heuristic_ratio", "coulomb_estimate",
                      "coulomb_ratio", "converged"});
  std::vector<double> logs_a, logs_e, normalized;
  for (std::size_t i = 0; i < n; ++i) {
    const double M = static_cast<double>(setups[i].config.size());
    const double E = sols[i].breakdown.total;
    const double heuristic = M * e0 + 2.0 * std::numbers::pi / (3.0 * spec.params.eps1) * r[i] * M * M * icube * q * q;
    const double coulomb = M * e0 + r[i] * M * M * icube * q * q / (8.0 * std::numbers::pi * spec.params.eps1);
    std::vector<std::string> row{fmt(sw.K[i]), fmt(M), fmt(alpha[i]), fmt(r[i]), fmt(setups[i].grid.spacing()),
                                 fmt(setups[i].grid.cell_count())};
    append_terms(row, sols[i].breakdown);
    row.insert(row.end(), {fmt(E / alpha[i]), fmt(E / (r[i] * alpha[i] * alpha[i])), fmt(heuristic),
                           fmt(E / heuristic), fmt(coulomb), fmt(E / coulomb), fmt(sols[i].converged)});
    rep.add_row(row);
    logs_a.push_back(std::log(alpha[i]));
    logs_e.push_back(std::log(E));
    normalized.push_back(E / (r[i] * alpha[i] * alpha[i]));
  }
  double slope = std::numeric_limits<double>::quiet_NaN();
  if (n >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += logs_a[i];
      sy += logs_e[i];
      sxx += logs_a[i] * logs_a[i];
      sxy += logs_a[i] * logs_e[i];
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  double spread = std::numeric_limits<double>::quiet_NaN();
  if (n >= 2) {
    const double a = normalized[n - 2], b = normalized[n - 1];
    spread = std::abs(a - b) / (0.5 * (std::abs(a) + std::abs(b)));
  }
  rep.metadata = {{"schedule", sw.schedule == Schedule::Sub ? "sub" : "super"},
                  {"c", fmt(sw.c)},
                  {"p", fmt(sw.p)},
                  {"e0", fmt(e0)},
                  {"I_cube", fmt(icube)},
                  {"slope_log_E_vs_log_alpha", fmt(slope)},
                  {"normalized_spread_last_two", fmt(spread)}};
  if (sw.schedule == Schedule::Sub) {
    rep.metadata.emplace_back("verdict", fmt(std::abs(slope - 1.0) <= 0.15));
  } else {
    rep.metadata.emplace_back("verdict", fmt(spread <= 0.10));
  }

  if (sw.singles) {
    // Every site alone on the same grid: the remainder is the neighbour interaction.
    const LatticeSetup& last = setups.back();
    const std::size_t sites = last.config.size();
    std::vector<double> single(sites);
    run_pool(sites, options.threads, [&](std::size_t s) {
      SoluteConfiguration one = last.config;
      one.solutes = {last.config.solutes[s]};
      single[s] = solve_saddle(one, spec.species, spec.B, spec.params, last.grid, so).breakdown.total;
    });
    double sum = 0.0;
    for (double v : single) sum += v;
    const double total = sols.back().breakdown.total;
    rep.metadata.emplace_back("singles_sum", fmt(sum));
    rep.metadata.emplace_back("neighbour_share", fmt(std::abs(total - sum) / std::abs(total)));
  }
  if (!options.out_dir.empty() && spec.dump_fields) {
    const auto dir = std::filesystem::path(options.out_dir) / "fields";
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < n; ++i) {
      write_structured_grid((dir / ("u_K" + std::to_string(sw.K[i]) + ".sg")).string(), sols[i].u);
      write_structured_grid((dir / ("psi_K" + std::to_string(sw.K[i]) + ".sg")).string(), sols[i].psi);
    }
  }
  return rep;
}

Report run_screening_probe(const ExperimentSpec& spec, const RunOptions& options) {
  const ScreeningProbeSpec& sp = spec.screening;
  const double r = sp.r;
  const double h = r / sp.cells_per_r;
  // Odd cell count: the solute sits at the centre of the middle cell.
  const int half = static_cast<int>(std::ceil(sp.half_width * r / h - 0.5));
  const int n = 2 * half + 1;
  const double o = -(half + 0.5) * h;
  const Grid3D grid({o, o, o}, h, {n, n, n});
  SoluteConfiguration config;
  config.box = Box{grid.origin(), grid.extent()};
  config.r = r;
  config.solutes = {{spec.species.all().front().id, {0.0, 0.0, 0.0}}};
  require_resolution(grid, r);
  const ScalarField Q = assemble_charge_density(config, spec.species, grid);
  const PhaseField u(grid, 1);
  const PotentialSolution sol = solve_potential(u, Q, spec.B, r, spec.params, spec.potential_tol);
  const auto samples = sample_axis(sol.psi, {0.0, 0.0, 0.0}, sp.dmin * r, sp.dmax * r);
  const ExponentialFit ef = fit_exponential_decay(samples);
  const PowerFit naive = fit_power_decay(samples, false);
  const PowerFit offset = fit_power_decay(samples, true);

  double stiffness = 0.0;
  if (spec.B.is_quadratic()) stiffness = std::get<BModel::Quadratic>(spec.B.variant()).stiffness;
  const double expected = stiffness > 0.0 ? r * std::sqrt(spec.params.eps1 / stiffness) : std::numeric_limits<double>::infinity();

  Report rep;
  rep.id = spec.id;
  rep.kind = Kind::ScreeningProbe;
  rep.columns = {"r", "spacing", "cells", "samples", "decay_length", "expected_length", "length_ratio",
                 "power_slope", "power_slope_offset_fit", "offset", "electric_energy"};
  rep.add_row({fmt(r), fmt(h), fmt(grid.cell_count()), fmt(ef.samples), fmt(ef.length), fmt(expected),
               fmt(ef.length / expected), fmt(naive.exponent), fmt(offset.exponent), fmt(offset.offset),
               fmt(sol.electric_energy)});
  rep.metadata = {{"b_model", spec.B.name()}, {"fit_range", fmt(sp.dmin) + "-" + fmt(sp.dmax)}};
  if (!options.out_dir.empty()) {
    std::filesystem::create_directories(options.out_dir);
    write_trace_csv((std::filesystem::path(options.out_dir) / "trace.csv").string(), sol.trace);
    if (spec.dump_fields) {
      const auto dir = std::filesystem::path(options.out_dir) / "fields";
      std::filesystem::create_directories(dir);
      write_structured_grid((dir / "psi.sg").string(), sol.psi);
    }
  }
  return rep;
}

Report run_cluster_check(const ExperimentSpec& spec, const RunOptions& options) {
  const ClusterCheckSpec& cc = spec.cluster;
  const std::uint64_t seed = options.seed.value_or(spec.seed);
  Report rep;
  rep.id = spec.id;
  rep.kind = Kind::ClusterCheck;
  rep.columns = {"set", "points", "total_mass", "delta", "cubes", "cross_interaction", "interaction_bound",
                 "candidates", "certified"};
  for (int s = 0; s < cc.sets; ++s) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(s));
    std::uniform_real_distribution<double> uni(0.0, cc.extent);
    std::vector<Vec3> pts(static_cast<std::size_t>(cc.points));
    for (auto& p : pts) p = {uni(rng), uni(rng), uni(rng)};
    const std::vector<double> masses(pts.size(), 1.0);
    ClusterOptions co;
    co.sublattice = cc.sublattice;
    co.max_candidates = cc.max_candidates;
    co.seed = seed + static_cast<std::uint64_t>(s);
    CubePartition part;
    bool ok = true;
    try {
      part = cluster_cubes(pts, masses, cc.delta, cc.L, cc.r, nullptr, co);
    } catch (const ClusterSearchError& e) {
      part = e.best();
      ok = false;
    }
    rep.add_row({fmt(s), fmt(pts.size()), fmt(part.total_mass), fmt(part.delta), fmt(part.cube_count),
                 fmt(part.cross_interaction), fmt(part.interaction_bound), fmt(part.candidates_tried),
                 fmt(ok && part.certified())});
  }
  rep.metadata = {{"seed", std::to_string(seed)}};
  return rep;
}

Report run(const ExperimentSpec& spec, const RunOptions& options) {
  Report rep;
  switch (spec.kind) {
    case Kind::Solve: rep = run_solve(spec, options); break;
    case Kind::CellEnergy: rep = run_cell_energy(spec, options); break;
    case Kind::ScalingSweep: rep = run_scaling_sweep(spec, options); break;
    case Kind::ScreeningProbe: rep = run_screening_probe(spec, options); break;
    case Kind::ClusterCheck: rep = run_cluster_check(spec, options); break;
  }
  if (!options.out_dir.empty()) write_report(rep, options.out_dir);
  return rep;
}

}  // namespace solvlab::cli
