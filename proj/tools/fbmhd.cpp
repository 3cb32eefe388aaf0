#include "commands.hpp"

#include "fbmhd/config.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace fbmhd::cli;
  CLI::App app{"Free-boundary resistive MHD with surface tension"};
  app.set_version_flag("--version", std::string(fbmhd::version_string()));
  app.require_subcommand(1);

  CommonArgs sim_args, modes_args, lemma_args;
  auto common = [](CLI::App* c, CommonArgs& a) {
    c->add_option("--config", a.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    c->add_option("--out", a.out, "Output directory (overrides the config)");
    c->add_option("--seed", a.seed, "Override init.seed");
  };

  std::string resume;
  CLI::App* sim = app.add_subcommand("simulate", "Run the time stepper and record diagnostics");
  common(sim, sim_args);
  sim->add_option("--resume", resume, "Continue from a checkpoint")->check(CLI::ExistingFile);

  std::optional<int> k_max;
  CLI::App* modes = app.add_subcommand("modes", "Linearized spectrum per wavenumber");
  common(modes, modes_args);
  modes->add_option("--k-max", k_max, "Largest wavenumber (default from config)");

  CLI::App* lemmas = app.add_subcommand("lemmas", "Randomized checks of the functional inequalities");
  common(lemmas, lemma_args);

  std::string series, audit_out;
  double tol = 1e-4;
  CLI::App* audit = app.add_subcommand("energy-audit", "Check the energy identity on a recorded series");
  audit->add_option("--series", series, "series.csv from simulate")->required()->check(CLI::ExistingFile);
  audit->add_option("--out", audit_out, "Directory for energy_audit.json");
  audit->add_option("--tol", tol, "Largest accepted normalized residual");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  if (*sim) return cmd_simulate(sim_args, resume);
  if (*modes) return cmd_modes(modes_args, k_max);
  if (*lemmas) return cmd_lemmas(lemma_args);
  if (*audit) return cmd_energy_audit(series, audit_out, tol);
  return kUsage;
}
