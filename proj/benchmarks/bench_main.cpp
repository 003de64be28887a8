#include <benchmark/benchmark.h>

#include <random>

#include "solvlab/interface.hpp"
#include "solvlab/maxflow.hpp"
#include "solvlab/pbsolver.hpp"

using namespace solvlab;

namespace {

Grid3D cube_grid(int n) { return Grid3D({0, 0, 0}, 1.0 / n, {n, n, n}); }

SoluteConfiguration random_config(int count, double r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.2, 0.8);
  SoluteConfiguration c;
  c.r = r;
  c.concentration_bound = static_cast<double>(count);
  for (int i = 0; i < count; ++i) c.solutes.push_back({1, {pos(rng), pos(rng), pos(rng)}});
  return c;
}

void BM_OperatorApply(benchmark::State& state) {
  const Grid3D g = cube_grid(static_cast<int>(state.range(0)));
  PhaseField u(g, 1);
  for (std::size_t c = 0; c < u.size(); c += 7) u.values[c] = 0;
  ModelParams p;
  p.eps1 = 4.0;
  const DielectricOperator op(u, 0.05, p);
  std::vector<double> x(g.cell_count(), 1.0), diag(g.cell_count(), 0.0), y(g.cell_count());
  for (auto _ : state) {
    op.apply(x, diag, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g.cell_count()));
}
BENCHMARK(BM_OperatorApply)->Arg(32)->Arg(64)->Arg(128);

void BM_PotentialSolve(benchmark::State& state) {
  const Grid3D g = cube_grid(static_cast<int>(state.range(0)));
  const SpeciesTable table({default_species(1)});
  const ScalarField Q = assemble_charge_density(random_config(8, 4.0 / g.nx(), 1), table, g);
  ModelParams p;
  p.eps1 = 4.0;
  const BModel B = state.range(1) ? BModel::ionic({{0.5, 1.0}, {0.5, -1.0}}, 1.0) : BModel::quadratic(1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_potential(PhaseField(g, 1), Q, B, 4.0 / g.nx(), p, 1e-8).electric_energy);
  }
}
BENCHMARK(BM_PotentialSolve)->Args({32, 0})->Args({64, 0})->Args({32, 1})->Unit(benchmark::kMillisecond);

void BM_MinCut(benchmark::State& state) {
  const Grid3D g = cube_grid(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nrm(0.0, 1.0);
  ScalarField f(g);
  for (double& v : f.values) v = 1000.0 * nrm(rng);
  for (auto _ : state) benchmark::DoNotOptimize(minimize_phase_field(f, 0.5, 0.05).values.data());
}
BENCHMARK(BM_MinCut)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_MaxFlowChain(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    MaxFlowGraph gr(n);
    for (int i = 0; i < n; ++i) gr.add_terminal(i, i % 3 == 0 ? 2.0 : 0.0, i % 5 == 0 ? 2.0 : 0.0);
    for (int i = 0; i + 1 < n; ++i) gr.add_edge(i, i + 1, 1.0, 1.0);
    benchmark::DoNotOptimize(gr.solve());
  }
}
BENCHMARK(BM_MaxFlowChain)->Arg(1 << 12)->Arg(1 << 16);

void BM_ChargeAssembly(benchmark::State& state) {
  const Grid3D g = cube_grid(64);
  const SpeciesTable table({default_species(1)});
  const SoluteConfiguration c = random_config(static_cast<int>(state.range(0)), 4.0 / g.nx(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_charge_density(c, table, g).values.data());
}
BENCHMARK(BM_ChargeAssembly)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
