#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "aclab/runner.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> suites;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "experiment config file (JSON)")
      ->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory (overrides the config)");
  sub->add_option("--workers", f.workers,
                  "worker threads (beats ACLAB_WORKERS, which beats the config)");
  sub->add_option("--seed", f.seed, "master seed (overrides the config)");
  sub->add_option("--suite", f.suites,
                  "named check suite, repeatable (verify; replaces the config list)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice laboratory for the diffusively rescaled stochastic "
               "Allen-Cahn flow"};
  app.require_subcommand(1);

  Flags f;
  CLI::App* sim =
      app.add_subcommand("simulate", "run one trajectory and store snapshots");
  CLI::App* ens = app.add_subcommand(
      "ensemble", "run a replica ensemble and store merged statistics");
  CLI::App* ver = app.add_subcommand("verify", "run named acceptance suites");
  CLI::App* rep = app.add_subcommand(
      "report", "turn a finished results directory into plot-ready tables");
  for (CLI::App* sub : {sim, ens, ver, rep}) add_common(sub, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage problems are config errors
  }

  aclab::CliOverrides overrides;
  overrides.out_dir = f.out;
  overrides.workers = f.workers;
  overrides.seed = f.seed;
  overrides.suites = f.suites;

  aclab::RunConfig config;
  try {
    if (!f.config_path.empty()) config = aclab::parse_config_file(f.config_path);
    config = aclab::apply_overrides(config, overrides);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  if (sim->parsed()) return aclab::cmd_simulate(config, std::cout, std::cerr);
  if (ens->parsed()) return aclab::cmd_ensemble(config, std::cout, std::cerr);
  if (ver->parsed()) return aclab::cmd_verify(config, std::cout, std::cerr);
  if (rep->parsed()) return aclab::cmd_report(config.out_dir, std::cout, std::cerr);
  return 2;
}
