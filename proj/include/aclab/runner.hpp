#pragma once

// Declarative experiment plumbing: strict config parsing with defaults for
// every field, the four batch commands, and manifest/report emission. The
// commands return process exit codes and never throw.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "aclab/stats.hpp"

namespace aclab {

struct EnsembleConfig {
  long n_replicas = 256;
  std::uint64_t seed = 20260822;
  int n_batches = 32;
  int workers = 1;
};

struct SimConfig {
  int d = 3;
  int n = 32;
  double L = 4.0;
  std::vector<double> lambdas{1.0};
  bool lambda_is_ladder = false;  // written back as "lambda_ladder" when true
  std::vector<double> epses{0.25};
  bool eps_is_ladder = false;
  double base_width = 1.0;
  double dt = 0.01;
  std::vector<double> t_list{0.25, 0.5};
  int s_max = 0;
};

struct RunConfig {
  std::string experiment = "experiment";
  SimConfig sim;
  EnsembleConfig ensemble;
  std::vector<std::string> suites;
  std::string out_dir = "results";

  SimParams params(double lambda, double eps) const;
};

// Strict: unknown keys, wrong types, or malformed JSON raise ConfigError.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Canonical form; parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const RunConfig& config);

struct CliOverrides {
  std::optional<std::string> out_dir;
  std::optional<int> workers;  // flag beats ACLAB_WORKERS beats config
  std::optional<std::uint64_t> seed;
  std::vector<std::string> suites;  // replaces the config list when non-empty
};

// Applies flag and environment overrides (ConfigError on a bad env value).
RunConfig apply_overrides(RunConfig config, const CliOverrides& o);

const std::vector<std::string>& known_suites();

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_ensemble(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const std::string& results_dir, std::ostream& out, std::ostream& err);

}  // namespace aclab
