#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "experiments.hpp"
#include "solvlab/error.hpp"

namespace {

int execute(solvlab::cli::Kind verb, const std::string& config, const solvlab::cli::RunOptions& options) {
  using namespace solvlab;
  try {
    cli::ExperimentSpec spec = cli::load_experiment(config);
    if (spec.kind != verb) {
      std::fprintf(stderr, "solvlab: %s: config declares kind '%s', verb is '%s'\n", config.c_str(),
                   cli::kind_name(spec.kind).c_str(), cli::kind_name(verb).c_str());
      return 2;
    }
    if (options.seed) spec.seed = *options.seed;
    const cli::Report rep = cli::run(spec, options);
    std::printf("%s: %zu row(s)", rep.id.c_str(), rep.rows.size());
    if (!options.out_dir.empty()) std::printf(" -> %s", options.out_dir.c_str());
    std::printf("\n");
    return 0;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "solvlab: %s:%d:%d: %s\n", config.c_str(), e.line(), e.column(), e.what());
    return 2;
  } catch (const UnitError& e) {
    std::fprintf(stderr, "solvlab: %s: unit error: %s\n", config.c_str(), e.what());
    return 2;
  } catch (const InadmissibleError& e) {
    std::fprintf(stderr, "solvlab: %s: %s\n", config.c_str(), e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solvlab: %s: %s\n", config.c_str(), e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using solvlab::cli::Kind;
  CLI::App app{"solvlab: grid saddle points of the implicit-solvent energy"};
  app.require_subcommand(1);

  std::string config, out;
  int threads = 1;
  std::uint64_t seed = 0;
  bool paper = false;

  struct Verb {
    Kind kind;
    const char* help;
    CLI::App* cmd = nullptr;
  };
  Verb verbs[] = {
      {Kind::Solve, "saddle point of one configuration"},
      {Kind::CellEnergy, "truncated single-solute energies and their 1/R extrapolation"},
      {Kind::ScalingSweep, "K^3 lattice sweep over an alpha(r) schedule"},
      {Kind::ScreeningProbe, "decay of the potential of one solute"},
      {Kind::ClusterCheck, "cube clustering on seeded point sets"},
  };
  for (auto& v : verbs) {
    v.cmd = app.add_subcommand(solvlab::cli::kind_name(v.kind), v.help);
    v.cmd->add_option("--config", config, "experiment document (JSON)")->required()->check(CLI::ExistingFile);
    v.cmd->add_option("--out", out, "output directory");
    v.cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    v.cmd->add_option("--seed", seed, "override the document seed");
    v.cmd->add_flag("--paper-convention", paper, "H^-1 kernel 1/|x-y| instead of 1/(4 pi |x-y|)");
  }
  CLI11_PARSE(app, argc, argv);

  solvlab::cli::RunOptions options;
  options.out_dir = out;
  options.threads = threads;
  options.paper_convention = paper;
  for (auto& v : verbs) {
    if (!v.cmd->parsed()) continue;
    if (v.cmd->count("--seed")) options.seed = seed;
    return execute(v.kind, config, options);
  }
  return 1;
}
