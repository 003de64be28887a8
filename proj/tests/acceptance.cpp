// Acceptance suite: one PASS/FAIL line per criterion.
// Usage: solvlab_acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "oracles/born.hpp"
#include "oracles/brute_force_cut.hpp"
#include "oracles/cube_integral.hpp"
#include "solvlab/analysis.hpp"
#include "solvlab/error.hpp"
#include "solvlab/interface.hpp"
#include "solvlab/pbsolver.hpp"

using namespace solvlab;

namespace {

// Rock-salt Madelung constant, frozen from oracles/madelung.hpp
// (Evjen sums at half widths 20 and 40, Richardson-extrapolated).
constexpr double kMadelung = 1.747564594633;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

BModel salt() { return BModel::ionic({{0.5, 1.0}, {0.5, -1.0}}, 1.0); }

SoluteSpecies species(int id, double charge, double well = 0.0, double cutoff = 2.0) {
  SoluteSpecies s;
  s.id = id;
  s.profile = ChargeProfile::uniform_ball(1.0, charge);
  s.lj = {well, 1.0, cutoff};
  return s;
}

// ---------------------------------------------------------------- 1

Outcome born_ball() {
  const double a = 0.2, q = 1.0, r = 1.0, eps = 1.0;
  ModelParams p;
  p.eps0 = p.eps1 = eps;
  SoluteSpecies sp;
  sp.profile = ChargeProfile::uniform_ball(a, q);
  const SpeciesTable table({sp});

  struct Run {
    double energy, seconds, L_eff;
    ScalarField psi;
  };
  auto run = [&](int n, const ScalarField* coarse) {
    const double h = 16.0 * a / n;
    const Grid3D g({-8.0 * a, -8.0 * a, -8.0 * a}, h, {n, n, n});
    SoluteConfiguration c;
    c.box = Box{g.origin(), g.extent()};
    c.r = r;
    c.solutes = {{1, {0, 0, 0}}};
    ScalarField init(g);
    if (coarse) {
      for (std::size_t i = 0; i < init.size(); ++i) {
        const auto ijk = g.ijk(i);
        init.values[i] = coarse->at(ijk[0] / 2, ijk[1] / 2, ijk[2] / 2);
      }
    }
    const auto t0 = std::chrono::steady_clock::now();
    const ScalarField Q = assemble_charge_density(c, table, g);
    const PotentialSolution s =
        solve_potential(PhaseField(g, 1), Q, BModel::zero(), r, p, 1e-10, coarse ? &init : nullptr);
    return Run{s.electric_energy, seconds_since(t0), (n + 1) * h, s.psi};
  };

  const Run c = run(128, nullptr);
  const Run f = run(256, &c.psi);
  const double free = oracle::born_ball_free(q, a, eps, r);
  const double box_c = oracle::born_ball_in_grounded_cube(q, a, eps, r, c.L_eff, kMadelung);
  const double box_f = oracle::born_ball_in_grounded_cube(q, a, eps, r, f.L_eff, kMadelung);
  const double err_c = std::abs(c.energy - box_c) / box_c;
  const double err_f = std::abs(f.energy - box_f) / box_f;
  const double ratio = err_c / err_f;
  Outcome o;
  o.pass = err_c <= 0.02 && ratio >= 1.7 && c.seconds <= 60.0;
  o.detail = fmt(
      "E(128^3)=%.6f vs grounded-box analytic %.6f (err %.3f%%), 256^3 err %.3f%%, refinement gain %.2fx, "
      "128^3 runtime %.1fs; free-space analytic %.6f differs by %.2f%% (box image term)",
      c.energy, box_c, 100 * err_c, 100 * err_f, ratio, c.seconds, free, 100 * std::abs(c.energy - free) / free);
  return o;
}

// ---------------------------------------------------------------- 2, 3

cli::ExperimentSpec probe_spec(const BModel& B, double half_width) {
  cli::ExperimentSpec s;
  s.id = "probe";
  s.kind = cli::Kind::ScreeningProbe;
  s.params.eps0 = 1.0;
  s.params.eps1 = 2.0;
  s.B = B;
  s.species = SpeciesTable({species(1, 1.0)});
  s.screening.r = 1.0;
  s.screening.half_width = half_width;
  s.screening.cells_per_r = 4.0;
  s.screening.dmin = 2.0;
  s.screening.dmax = 10.0;
  return s;
}

Outcome yukawa() {
  const cli::Report rep = cli::run_screening_probe(probe_spec(BModel::quadratic(1.0), 15.0), {});
  const double lambda = rep.number(0, "decay_length"), expected = rep.number(0, "expected_length");
  const double dev = std::abs(lambda / expected - 1.0);
  return {dev <= 0.05, fmt("decay length %.5f vs r*sqrt(eps)=%.5f (%.2f%%) from %d samples on [2r,10r], %s cells",
                           lambda, expected, 100 * dev, static_cast<int>(rep.number(0, "samples")),
                           rep.cell(0, "cells").c_str())};
}

Outcome coulomb_decay() {
  const cli::Report rep = cli::run_screening_probe(probe_spec(BModel::zero(), 20.0), {});
  const double s = rep.number(0, "power_slope_offset_fit");
  const double naive = rep.number(0, "power_slope");
  return {std::abs(s + 1.0) <= 0.1,
          fmt("slope %.4f from A d^s + C fit on [2r,10r] (C=%.3g is the constant image potential of the "
              "grounded box); plain log-log slope %.4f, %s cells",
              s, rep.number(0, "offset"), naive, rep.cell(0, "cells").c_str())};
}

// ---------------------------------------------------------------- 4, 5

struct RandomInstance {
  PhaseField u;
  ScalarField Q;
  double r;
  ModelParams params;
};

RandomInstance random_instance(std::uint64_t seed, int n = 32) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.3, 0.7);
  const double r = 4.0 / n;  // h = r/4 on the unit box
  const Grid3D g({0, 0, 0}, 1.0 / n, {n, n, n});
  SpeciesTable table({species(1, 10.0), species(2, -10.0)});
  SoluteConfiguration c;
  c.box = Box{{0, 0, 0}, {1, 1, 1}};
  c.r = r;
  c.concentration_bound = 3.0;
  while (c.size() < 6) {
    Solute s{static_cast<int>(1 + rng() % 2), {pos(rng), pos(rng), pos(rng)}};
    c.solutes.push_back(s);
    if (!check_admissible(c).admissible()) c.solutes.pop_back();
  }
  RandomInstance inst{PhaseField(g, 1), assemble_charge_density(c, table, g), r, ModelParams{}};
  inst.params.eps0 = 1.0;
  inst.params.eps1 = 4.0;
  for (const auto& s : c.solutes) {
    if (rng() % 3 == 0) continue;  // some solutes stay without a pocket
    const double rad = r * (0.6 + 0.6 * std::uniform_real_distribution<double>(0, 1)(rng));
    for (std::size_t i = 0; i < inst.u.size(); ++i) {
      if (norm(g.center(i) - s.position) < rad) inst.u.values[i] = 0;
    }
  }
  return inst;
}

Outcome comparison() {
  double worst = -1e300;
  int ok = 0;
  for (int s = 0; s < 10; ++s) {
    const RandomInstance in = random_instance(1000 + s);
    const auto sol = solve_potential(in.u, in.Q, salt(), in.r, in.params, 1e-13);
    const ScalarField bar = comparison_bound(in.u, positive_part(in.Q), in.r, in.params, 1e-13);
    const double scale = bar.max_abs();
    for (std::size_t c = 0; c < bar.size(); ++c) worst = std::max(worst, (sol.psi[c] - bar[c]) / scale);
    ok += verify_comparison(sol.psi, bar, 1e-10);
  }
  return {ok == 10, fmt("%d/10 configurations satisfy psi <= psi_bar + 1e-10 max|psi_bar|; max (psi - psi_bar)/max|psi_bar| = %.3e",
                        ok, worst)};
}

Outcome dual_bound() {
  int ok = 0;
  double worst = 0.0;
  double cmin = 1e300;
  for (int s = 0; s < 10; ++s) {
    const RandomInstance in = random_instance(1000 + s);
    for (const BModel& B : {BModel::quadratic(1.0), salt()}) {
      const auto sol = solve_potential(in.u, in.Q, B, in.r, in.params, 1e-13);
      const double m = std::max(sol.psi.max_abs(), 1e-3);
      const double c = B.is_quadratic() ? *B.analytic_b2_constant() : check_B2(B, -m, m, 2001);
      cmin = std::min(cmin, c);
      const DualBoundResult d = dual_bound_check(sol, in.u, in.Q, B, in.r, in.params, c);
      ok += d.ok;
      worst = std::max(worst, d.lhs / d.rhs);
    }
  }
  return {ok == 20, fmt("%d/20 (config, B) pairs within bound; max (Dirichlet + B)/(E_el/min(c,1)) = %.9f; smallest c = %.4f",
                        ok, worst, cmin)};
}

// ---------------------------------------------------------------- 6

Outcome coarea() {
  std::mt19937_64 rng(606);
  std::normal_distribution<double> nrm(0.0, 1.0);
  const int shapes[][3] = {{2, 2, 2}, {3, 2, 2}, {2, 3, 2}, {2, 2, 3}, {2, 2, 2}};
  int exact = 0;
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const auto& s = shapes[inst % 5];
    const double h = 0.25, r = 0.5 + 0.1 * (inst % 4), gamma = 0.05 * (1 + inst % 7);
    const Grid3D g({0, 0, 0}, h, {s[0], s[1], s[2]});
    ScalarField f(g);
    for (double& v : f.values) v = 30.0 * nrm(rng);
    const PhaseField u = minimize_phase_field(f, gamma, r);
    const auto bf = oracle::brute_force_cut(f.values, s[0], s[1], s[2], h, gamma / (r * r) * h * h);
    const double e = oracle::binary_energy(f.values, s[0], s[1], s[2], h, gamma / (r * r) * h * h, [&] {
      std::uint32_t m = 0;
      for (std::size_t c = 0; c < u.size(); ++c) m |= static_cast<std::uint32_t>(u[c]) << c;
      return m;
    }());
    const double dev = std::abs(e - bf.energy) / (1.0 + std::abs(bf.energy));
    worst = std::max(worst, dev);
    exact += dev <= 1e-14;
  }
  // Full-size: thresholded relaxed iterates against the min cut.
  double margin = 1e300;
  int levels = 0, mixed = 0;
  double spread = 0.0;
  for (int s = 0; s < 3; ++s) {
    const RandomInstance in = random_instance(2000 + s);
    const auto sol = solve_potential(PhaseField(in.u.grid, 1), in.Q, BModel::zero(), in.r, in.params, 1e-10);
    // LJ-like field: repulsive in the pockets, noisy elsewhere, so f changes sign.
    std::mt19937_64 rng(3000 + s);
    std::normal_distribution<double> noise(0.0, 0.5);
    ScalarField U(in.u.grid);
    const double scale = unary_cost_field(sol.psi, U, in.params, in.r).max_abs() * std::pow(in.r, 3);
    for (std::size_t c = 0; c < U.size(); ++c) U.values[c] = scale * ((in.u[c] ? 0.0 : 2.0) + noise(rng));
    const ScalarField f = unary_cost_field(sol.psi, U, in.params, in.r);
    const double gamma = 0.3;
    const PhaseField cut = minimize_phase_field(f, gamma, in.r);
    const std::size_t zeros = cut.count_zero();
    mixed += zeros > 0 && zeros < cut.size();
    const double e_cut = phase_energy(cut, f, gamma, in.r);
    RelaxOptions ro;
    ro.iterations = 600;
    ro.snapshot_every = 50;
    const RelaxResult rel = relax_phase_field(f, gamma, in.r, ro);
    for (const auto& snap : rel.snapshots) {
      const ThresholdResult t = best_threshold(snap, f, gamma, in.r);
      margin = std::min(margin, (t.energy - e_cut) / std::abs(e_cut));
      spread = std::max(spread, (t.energy - e_cut) / std::abs(e_cut));
      ++levels;
    }
  }
  return {exact == 50 && margin >= -1e-8 && mixed == 3,
          fmt("%d/50 small instances match enumeration (max rel dev %.1e); %d thresholded relaxed iterates on 32^3, "
              "(E_t - E_cut)/|E_cut| in [%.3e, %.3e] (%d/3 cuts non-trivial)",
              exact, worst, levels, margin, spread, mixed)};
}

// ---------------------------------------------------------------- 7

Outcome minimax() {
  double worst = 0.0;
  int agree = 0;
  std::string notes;
  for (int s = 0; s < 5; ++s) {
    std::mt19937_64 rng(700 + s);
    std::uniform_real_distribution<double> pos(0.3, 0.7), uni(0.0, 1.0);
    const int n = 32;
    const double r = 4.0 / n;
    const Grid3D g({0, 0, 0}, 1.0 / n, {n, n, n});
    SpeciesTable table({species(1, 2.0, 1.0), species(2, -2.0, 1.0)});
    SoluteConfiguration c;
    c.box = Box{{0, 0, 0}, {1, 1, 1}};
    c.r = r;
    c.concentration_bound = 2.0;
    while (c.size() < 4) {
      c.solutes.push_back({static_cast<int>(1 + rng() % 2), {pos(rng), pos(rng), pos(rng)}});
      if (!check_admissible(c).admissible()) c.solutes.pop_back();
    }
    ModelParams p;
    p.beta = 0.5;
    p.gamma = 0.2;
    p.eps1 = 4.0;
    SaddleOptions a;
    a.potential_tol = 1e-12;
    a.tol = 1e-12;
    SaddleOptions b = a;
    PhaseField pocket(g, 1);
    const Vec3 centre{uni(rng), uni(rng), uni(rng)};
    const double rad = 0.1 + 0.2 * uni(rng);
    for (std::size_t i = 0; i < pocket.size(); ++i) {
      if (norm(g.center(i) - centre) < rad) pocket.values[i] = 0;
    }
    b.u0 = pocket;
    const SaddleSolution s1 = solve_saddle(c, table, BModel::quadratic(1.0), p, g, a);
    const SaddleSolution s2 = solve_saddle(c, table, BModel::quadratic(1.0), p, g, b);
    const double dev = std::abs(s1.breakdown.total - s2.breakdown.total) / std::abs(s1.breakdown.total);
    worst = std::max(worst, dev);
    agree += dev <= 1e-6 && s1.converged && s2.converged;
    notes += fmt(" %d/%d", s1.outer_iterations, s2.outer_iterations);
  }
  return {agree == 5, fmt("%d/5 instances agree; max relative gap %.3e; outer iterations (u0=1/pocket):%s", agree,
                          worst, notes.c_str())};
}

// ---------------------------------------------------------------- 8, 9

SelfEnergyProblem self_problem() {
  SelfEnergyProblem p;
  p.species = SpeciesTable({species(1, 1.0, 1.0), species(2, -1.0, 1.0)});
  p.params.beta = 0.5;
  p.params.gamma = 0.2;
  p.params.eps0 = 1.0;
  p.params.eps1 = 4.0;
  p.spacing = 0.25;
  p.saddle.tol = 1e-10;
  p.saddle.potential_tol = 1e-10;
  return p;
}

Outcome truncation() {
  const SelfEnergyProblem p = self_problem();
  const SelfEnergyEstimate est = estimate_self_energy(1, {8, 16, 32}, p);
  const double rel = est.fit_residual / std::abs(est.extrapolated);
  const bool ok = est.tail_exponent >= 0.7 && est.tail_exponent <= 1.3 && rel <= 0.01;
  return {ok, fmt("E(8,16,32) = %.6f, %.6f, %.6f; E_inf=%.6f, C=%.4f, tail exponent %.3f, residual %.2e of E_inf",
                  est.energies[0], est.energies[1], est.energies[2], est.extrapolated, est.tail_coefficient,
                  est.tail_exponent, rel)};
}

Outcome phi_structure() {
  const SelfEnergyProblem p = self_problem();
  const double R = 8.0, d = 1.5;
  auto cluster = [&](std::vector<int> ids) {
    std::vector<Solute> c;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const double x = ids.size() == 1 ? 0.0 : (i == 0 ? -d : d);
      c.push_back({ids[i], {x, 0.0, 0.0}});
    }
    return cluster_energy(c, R, p).breakdown.total;
  };
  std::vector<ClusterEntry> lib{{{1, 0}, cluster({1}), "+"},
                                {{0, 1}, cluster({2}), "-"},
                                {{2, 0}, cluster({1, 1}), "++"},
                                {{0, 2}, cluster({2, 2}), "--"},
                                {{1, 1}, cluster({1, 2}), "+-"}};
  bool homogeneous = true;
  for (const auto& xi : std::vector<std::vector<double>>{{1, 0}, {0, 1}, {1, 1}, {2, 0}}) {
    const double base = phi_upper(xi, lib);
    for (double lam : {0.5, 2.0, 3.0, 7.25}) {
      std::vector<double> scaled{lam * xi[0], lam * xi[1]};
      homogeneous = homogeneous && phi_upper(scaled, lib) == lam * base;
    }
  }
  const double p1 = phi_upper({1, 0}, lib), p2 = phi_upper({0, 1}, lib);
  struct Pair {
    std::vector<double> sum;
    double parts;
    const char* name;
  };
  const Pair pairs[] = {{{1, 1}, p1 + p2, "(e1,e2)"}, {{2, 0}, 2 * p1, "(e1,e1)"}, {{0, 2}, 2 * p2, "(e2,e2)"}};
  bool sub = true;
  std::string notes;
  for (const auto& pr : pairs) {
    const double whole = phi_upper(pr.sum, lib);
    sub = sub && whole <= pr.parts + 0.05 * std::abs(pr.parts);
    notes += fmt(" %s: %.5f <= %.5f;", pr.name, whole, pr.parts);
  }
  return {homogeneous && sub, fmt("1-homogeneity %s (exact);%s energies + %.5f, - %.5f, ++ %.5f, -- %.5f, +- %.5f",
                                  homogeneous ? "holds" : "FAILS", notes.c_str(), lib[0].energy, lib[1].energy,
                                  lib[2].energy, lib[3].energy, lib[4].energy)};
}

// ---------------------------------------------------------------- 10

Outcome cubes() {
  int certified = 0, max_tried = 0;
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    std::mt19937_64 rng(1000 + s);
    std::uniform_real_distribution<double> uni(0.0, 4.0);
    const int count = 20 + static_cast<int>(rng() % 181);
    std::vector<Vec3> pts(count);
    std::vector<double> m(count);
    for (int i = 0; i < count; ++i) {
      pts[i] = {uni(rng), uni(rng), uni(rng)};
      m[i] = (rng() % 2) ? 1.0 : -1.0;
    }
    ClusterOptions o;
    o.seed = 50 + s;
    try {
      const CubePartition part = cluster_cubes(pts, m, 1.0, 2.0, 0.05, nullptr, o);
      const CubePartition again = evaluate_partition(pts, m, 1.0, 2.0, 0.05, part.offset, nullptr, o.frame_constant);
      certified += again.cross_interaction <= again.interaction_bound && part.candidates_tried <= 128;
      worst = std::max(worst, again.cross_interaction / again.interaction_bound);
      max_tried = std::max(max_tried, part.candidates_tried);
    } catch (const ClusterSearchError& e) {
      worst = std::max(worst, e.best().cross_interaction / e.best().interaction_bound);
      max_tried = 128;
    }
  }
  return {certified == 20, fmt("%d/20 point sets certified; max cross/bound %.4f; max candidates used %d", certified,
                               worst, max_tried)};
}

// ---------------------------------------------------------------- 11

cli::ExperimentSpec sweep_spec(cli::Schedule sched, std::vector<int> K, double c, double p) {
  cli::ExperimentSpec s;
  s.id = "sweep";
  s.kind = cli::Kind::ScalingSweep;
  s.sweep.schedule = sched;
  s.sweep.K = std::move(K);
  s.sweep.c = c;
  s.sweep.p = p;
  s.sweep.margin = 0.4;
  s.sweep.cells_per_r = 4.0;
  s.tol = 1e-10;
  s.potential_tol = 1e-10;
  return s;
}

Outcome regimes() {
  // Subcritical: M r -> 0, self-energy dominated.
  cli::ExperimentSpec sub = sweep_spec(cli::Schedule::Sub, {1, 2, 3}, 3.0, 1.25);
  sub.params.a = 1.0;
  sub.params.beta = 0.5;
  sub.params.gamma = 0.2;
  sub.params.eps1 = 4.0;
  sub.params.M = 1.0;
  sub.species = SpeciesTable({species(1, 1.0)});
  const cli::Report rs = cli::run_scaling_sweep(sub, {});
  const double slope = std::stod(rs.meta("slope_log_E_vs_log_alpha"));

  // Supercritical: M r -> infinity, Coulomb dominated.
  cli::ExperimentSpec sup = sweep_spec(cli::Schedule::Super, {3, 4, 5}, 0.7, 0.5);
  sup.params.a = 0.0;
  sup.params.beta = 0.01;
  sup.params.gamma = 0.01;
  sup.params.eps0 = sup.params.eps1 = 1.0;
  sup.species = SpeciesTable({species(1, 1.0)});
  const cli::Report rp = cli::run_scaling_sweep(sup, {});
  const double spread = std::stod(rp.meta("normalized_spread_last_two"));
  const std::size_t last = rp.rows.size() - 1;
  const double heuristic = rp.number(last, "heuristic_ratio");
  const double corrected = rp.number(last, "coulomb_ratio");
  // Same Coulomb estimate, but for the uniform unit cube in the grounded box of the K=5 run.
  const double r5 = rp.number(last, "r"), M5 = rp.number(last, "M");
  const Grid3D g5 = cli::lattice_setup(5, r5, sup.sweep.margin, sup.sweep.cells_per_r, 1).grid;
  ScalarField cube(g5);
  for (std::size_t c = 0; c < cube.size(); ++c) {
    const Vec3 x = g5.center(c);
    if (x[0] > 0 && x[0] < 1 && x[1] > 0 && x[1] < 1 && x[2] > 0 && x[2] < 1) cube.values[c] = 1.0;
  }
  Hminus1Options ho;
  ho.method = HMethod::Pde;
  ho.boundary = BoundaryData::Zero;
  const double grounded = M5 * std::stod(rp.meta("e0")) + r5 * M5 * M5 * hminus1_field(cube, ho).value / 2.0;
  const double boxed = rp.number(last, "total") / grounded;

  // Screening: quadratic B, spacing 1/3 >> r = 0.05.
  cli::ExperimentSpec scr = sweep_spec(cli::Schedule::Sub, {3}, 0.05 * 27.0, 1.0);
  scr.B = BModel::quadratic(1.0);
  scr.params.beta = 0.5;
  scr.params.gamma = 0.2;
  scr.params.eps1 = 1.0;
  scr.sweep.margin = 0.2;
  scr.sweep.e0 = 0.0;
  scr.sweep.singles = true;
  scr.species = SpeciesTable({species(1, 1.0)});
  const cli::Report rq = cli::run_scaling_sweep(scr, {});
  const double share = std::stod(rq.meta("neighbour_share"));

  const bool ok_sub = std::abs(slope - 1.0) <= 0.15;
  const bool ok_spread = spread <= 0.10;
  const bool ok_heur = std::abs(heuristic - 1.0) <= 0.10;
  const bool ok_share = share <= 0.05;
  return {ok_sub && ok_spread && ok_heur && ok_share,
          fmt("subcritical slope %.4f [%s]; supercritical E/(r alpha^2) spread %.4f [%s]; E/heuristic %.4f at K=5 [%s] "
              "(with the Coulomb constant 1/(8 pi eps) in place of 2 pi/(3 eps): %.4f, and against the same estimate "
              "for the grounded box: %.4f); screening neighbour share "
              "%.2e [%s]",
              slope, ok_sub ? "ok" : "out", spread, ok_spread ? "ok" : "out", heuristic, ok_heur ? "ok" : "out",
              corrected, boxed, share, ok_share ? "ok" : "out")};
}

// ---------------------------------------------------------------- 12

Outcome hminus1_cross() {
  const int n = 64;
  const double h = 1.0 / 16.0;
  const Grid3D g({-1.5, -1.5, -1.5}, h, {n, n, n});
  ScalarField mu(g);
  for (std::size_t c = 0; c < mu.size(); ++c) {
    const Vec3 x = g.center(c);
    if (x[0] > 0 && x[0] < 1 && x[1] > 0 && x[1] < 1 && x[2] > 0 && x[2] < 1) mu.values[c] = 1.0;
  }
  const double kernel = hminus1_field(mu).value;
  Hminus1Options o;
  o.method = HMethod::Pde;
  o.boundary = BoundaryData::FreeSpace;
  const double pde = hminus1_field(mu, o).value;
  o.boundary = BoundaryData::Zero;
  const double grounded = hminus1_field(mu, o).value;
  const double dev = std::abs(pde - kernel) / kernel;
  return {dev <= 0.03,
          fmt("kernel %.6f, pde %.6f (free-space boundary data), gap %.3f%%; continuum I_cube/(4 pi) = %.6f; "
              "pde with zero boundary data %.6f",
              kernel, pde, 100 * dev, oracle::cube_coulomb_closed_form() / (4 * std::numbers::pi), grounded)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome()>>> criteria{
      {1, {"Born ball", born_ball}},
      {2, {"Yukawa screening", yukawa}},
      {3, {"Coulomb decay", coulomb_decay}},
      {4, {"comparison principle", comparison}},
      {5, {"dual bound", dual_bound}},
      {6, {"coarea / min-cut exactness", coarea}},
      {7, {"minimax consistency", minimax}},
      {8, {"self-energy truncation", truncation}},
      {9, {"phi structure", phi_structure}},
      {10, {"cube clustering", cubes}},
      {11, {"regime scaling", regimes}},
      {12, {"H^-1 cross-method", hminus1_cross}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [k, v] : criteria) selected.push_back(k);
  }
  set_warning_sink([](const std::string&) {});
  int failed = 0;
  for (int k : selected) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %2d (%s, %.0fs): %s\n", o.pass ? "PASS" : "FAIL", k, it->second.first, seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
