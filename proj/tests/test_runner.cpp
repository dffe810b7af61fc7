#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"

#include "aclab/acceptance.hpp"
#include "aclab/errors.hpp"
#include "aclab/io.hpp"
#include "aclab/runner.hpp"

using namespace aclab;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const char* tag) {
  static int counter = 0;
  const fs::path p = fs::temp_directory_path() /
                     (std::string("aclab_runner_") + tag + "_" +
                      std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::create_directories(p);
  return p.string();
}

RunConfig tiny_config(const std::string& out_dir, double lambda = 0.0) {
  RunConfig c;
  c.experiment = "tiny";
  c.sim.d = 1;
  c.sim.n = 64;
  c.sim.L = 8.0;
  c.sim.lambdas = {lambda};
  c.sim.lambda_is_ladder = false;
  c.sim.epses = {0.5};
  c.sim.eps_is_ladder = false;
  c.sim.base_width = 1.0;
  c.sim.dt = 0.01;
  c.sim.t_list = {0.25};
  c.sim.s_max = 0;
  c.ensemble.n_replicas = 64;
  c.ensemble.seed = 42;
  c.ensemble.n_batches = 32;
  c.ensemble.workers = 2;
  c.out_dir = out_dir;
  return c;
}

int run_simulate(const RunConfig& c, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = cmd_simulate(c, out, err);
  if (err_text) *err_text = err.str();
  return rc;
}

struct EnvGuard {
  explicit EnvGuard(const char* name) : name_(name) {
    const char* old = std::getenv(name);
    if (old) saved_ = old;
    had_ = old != nullptr;
  }
  ~EnvGuard() {
    if (had_)
      ::setenv(name_, saved_.c_str(), 1);
    else
      ::unsetenv(name_);
  }
  const char* name_;
  std::string saved_;
  bool had_ = false;
};

}  // namespace

TEST_CASE("config serialization round-trips exactly") {
  const RunConfig def;
  const std::string text = serialize_config(def);
  const RunConfig back = parse_config_text(text);
  CHECK(serialize_config(back) == text);

  RunConfig ladder;
  ladder.sim.lambdas = {0.0, 0.5, 2.0};
  ladder.sim.lambda_is_ladder = true;
  ladder.sim.epses = {0.5, 0.25};
  ladder.sim.eps_is_ladder = true;
  ladder.suites = {"deterministic", "clt-desk"};
  const std::string ltext = serialize_config(ladder);
  const RunConfig lback = parse_config_text(ltext);
  CHECK(lback.sim.lambda_is_ladder);
  CHECK(lback.sim.lambdas == ladder.sim.lambdas);
  CHECK(lback.sim.eps_is_ladder);
  CHECK(lback.suites == ladder.suites);
  CHECK(serialize_config(lback) == ltext);
}

TEST_CASE("strict parsing rejects unknown keys, bad types, and bad ranges") {
  CHECK_THROWS_AS(parse_config_text("not json at all"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[1,2]"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"experimet": "x"})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sim": {"dq": 1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sim": {"n": "32"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sim": {"n": 31.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"ensemble": {"seed": -4}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sim": {"eps": 1.5}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sim": {"eps": 0.0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sim": {"lambda": -1.0}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sim": {"t_list": []}})"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sim": {"lambda": 1, "lambda_ladder": [1]}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"sim": {"eps": 0.5, "eps_ladder": [0.5]}})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config_text(R"({"ensemble": {"n_batches": 1}})"), ConfigError);
  CHECK_NOTHROW(parse_config_text(R"({"sim": {"lambda_ladder": [0, 1, 2]}})"));
  CHECK_THROWS_AS(parse_config_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("override precedence: flag beats environment beats config") {
  EnvGuard guard("ACLAB_WORKERS");
  RunConfig base;
  base.ensemble.workers = 2;

  ::unsetenv("ACLAB_WORKERS");
  CliOverrides none;
  CHECK(apply_overrides(base, none).ensemble.workers == 2);

  ::setenv("ACLAB_WORKERS", "7", 1);
  CHECK(apply_overrides(base, none).ensemble.workers == 7);

  CliOverrides flag;
  flag.workers = 3;
  CHECK(apply_overrides(base, flag).ensemble.workers == 3);

  ::setenv("ACLAB_WORKERS", "abc", 1);
  CHECK_THROWS_AS(apply_overrides(base, none), ConfigError);
  ::setenv("ACLAB_WORKERS", "0", 1);
  CHECK_THROWS_AS(apply_overrides(base, none), ConfigError);
  ::setenv("ACLAB_WORKERS", "12e", 1);
  CHECK_THROWS_AS(apply_overrides(base, none), ConfigError);

  ::unsetenv("ACLAB_WORKERS");
  CliOverrides rest;
  rest.out_dir = "elsewhere";
  rest.seed = 777;
  rest.suites = {"deterministic"};
  const RunConfig over = apply_overrides(base, rest);
  CHECK(over.out_dir == "elsewhere");
  CHECK(over.ensemble.seed == 777);
  CHECK(over.suites == std::vector<std::string>{"deterministic"});
}

TEST_CASE("desk-scale worker resolution honors the same precedence") {
  EnvGuard guard("ACLAB_WORKERS");
  DeskScale s;
  s.workers = 3;
  CHECK(s.resolve_workers() == 3);
  s.workers = 0;
  ::setenv("ACLAB_WORKERS", "5", 1);
  CHECK(s.resolve_workers() == 5);
  ::setenv("ACLAB_WORKERS", "junk", 1);
  CHECK_THROWS_AS(s.resolve_workers(), ConfigError);
  ::unsetenv("ACLAB_WORKERS");
  const int hw = s.resolve_workers();
  CHECK(hw >= 1);
  CHECK(hw <= 8);
}

TEST_CASE("simulate writes snapshots, verdicts, and a manifest last") {
  const std::string dir = temp_dir("sim");
  const RunConfig c = tiny_config(dir);
  std::ostringstream out, err;
  CHECK(cmd_simulate(c, out, err) == 0);
  CHECK(fs::exists(dir + "/manifest.json"));
  CHECK(fs::exists(dir + "/report.json"));
  CHECK(fs::exists(dir + "/stats.csv"));
  CHECK(fs::exists(dir + "/snapshot_000.field"));
  CHECK(fs::exists(dir + "/snapshot_001.field"));

  const std::string manifest = read_text_file(dir + "/manifest.json");
  CHECK(manifest.find("\"config_digest\"") != std::string::npos);
  CHECK(manifest.find("\"files\"") != std::string::npos);
  CHECK(manifest.find("stats.csv") != std::string::npos);
  const std::string report = read_text_file(dir + "/report.json");
  CHECK(report.find("pure-heat-match") != std::string::npos);
  CHECK(report.find("\"pass\": true") != std::string::npos);
  CHECK(out.str().find("pure-heat-match") != std::string::npos);
}

TEST_CASE("simulate output bytes are a pure function of config and seed") {
  const std::string d1 = temp_dir("repro1");
  const std::string d2 = temp_dir("repro2");
  RunConfig c1 = tiny_config(d1, 1.0);
  RunConfig c2 = tiny_config(d2, 1.0);
  CHECK(run_simulate(c1) == 0);
  CHECK(run_simulate(c2) == 0);
  CHECK(read_text_file(d1 + "/stats.csv") == read_text_file(d2 + "/stats.csv"));
  CHECK(read_text_file(d1 + "/report.json") == read_text_file(d2 + "/report.json"));
  const auto bytes = [](const std::string& p) {
    return read_text_file(p);  // binary-safe: reads the raw stream
  };
  CHECK(bytes(d1 + "/snapshot_001.field") == bytes(d2 + "/snapshot_001.field"));

  // a different seed must change the snapshot payload
  RunConfig c3 = tiny_config(temp_dir("repro3"), 1.0);
  c3.ensemble.seed = 43;
  CHECK(run_simulate(c3) == 0);
  CHECK(bytes(c3.out_dir + "/snapshot_001.field") != bytes(d1 + "/snapshot_001.field"));
}

TEST_CASE("simulate refuses ladder configs with exit code 2") {
  RunConfig c = tiny_config(temp_dir("ladder"));
  c.sim.lambdas = {0.0, 1.0};
  c.sim.lambda_is_ladder = true;
  std::string err;
  CHECK(run_simulate(c, &err) == 2);
  CHECK(err.find("config error") != std::string::npos);
}

TEST_CASE("simulate maps validation failures to exit code 2") {
  RunConfig c = tiny_config(temp_dir("unres"));
  c.sim.epses = {0.03};  // scaled width under two cells
  CHECK(run_simulate(c) == 2);
}

TEST_CASE("ensemble persists merged statistics independent of worker count") {
  const std::string d1 = temp_dir("ens1");
  const std::string d2 = temp_dir("ens2");
  RunConfig c1 = tiny_config(d1, 1.0);
  RunConfig c2 = tiny_config(d2, 1.0);
  c1.ensemble.workers = 1;
  c2.ensemble.workers = 4;
  std::ostringstream out, err;
  CHECK(cmd_ensemble(c1, out, err) == 0);
  CHECK(cmd_ensemble(c2, out, err) == 0);
  CHECK(read_text_file(d1 + "/stats.csv") == read_text_file(d2 + "/stats.csv"));
  CHECK(read_text_file(d1 + "/report.json") == read_text_file(d2 + "/report.json"));
  CHECK(fs::exists(d1 + "/accumulator_l1_e0.5.csv"));
  CHECK(read_text_file(d1 + "/accumulator_l1_e0.5.csv") ==
        read_text_file(d2 + "/accumulator_l1_e0.5.csv"));
  const std::string report = read_text_file(d1 + "/report.json");
  CHECK(report.find("\"moments\"") != std::string::npos);
}

TEST_CASE("ensemble sweeps ladders and reports every combination") {
  const std::string dir = temp_dir("ladder_sweep");
  RunConfig c = tiny_config(dir, 0.0);
  c.sim.lambdas = {0.0, 1.0};
  c.sim.lambda_is_ladder = true;
  std::ostringstream out, err;
  CHECK(cmd_ensemble(c, out, err) == 0);
  const std::string stats = read_text_file(dir + "/stats.csv");
  CHECK(stats.find("\n0,0.5,0.25,") != std::string::npos);
  CHECK(stats.find("\n1,0.5,0.25,") != std::string::npos);
  CHECK(fs::exists(dir + "/accumulator_l0_e0.5.csv"));
  CHECK(fs::exists(dir + "/accumulator_l1_e0.5.csv"));
}

TEST_CASE("ensemble rejects undersized runs as config errors") {
  RunConfig c = tiny_config(temp_dir("small"), 0.0);
  c.ensemble.n_replicas = 16;
  std::ostringstream out, err;
  CHECK(cmd_ensemble(c, out, err) == 2);
}

TEST_CASE("verify rejects unknown suites with the list of known ones") {
  RunConfig c = tiny_config(temp_dir("vsuite"));
  c.suites = {"nope"};
  std::ostringstream out, err;
  CHECK(cmd_verify(c, out, err) == 2);
  CHECK(err.str().find("unknown suite 'nope'") != std::string::npos);
  CHECK(err.str().find("deterministic") != std::string::npos);
  CHECK(err.str().find("clt-desk") != std::string::npos);
  CHECK(known_suites().size() == 4);
}

TEST_CASE("report demands a manifest before it reads anything") {
  std::ostringstream out, err;
  CHECK(cmd_report(temp_dir("empty"), out, err) == 2);
  CHECK(err.str().find("manifest") != std::string::npos);
  CHECK(cmd_report("/nonexistent/results", out, err) == 2);
}

TEST_CASE("report emits per-statistic plot tables and is idempotent") {
  const std::string dir = temp_dir("rep");
  const RunConfig c = tiny_config(dir, 1.0);
  std::ostringstream out, err;
  REQUIRE(cmd_ensemble(c, out, err) == 0);
  REQUIRE(cmd_report(dir, out, err) == 0);
  CHECK(fs::exists(dir + "/summary.txt"));
  CHECK(fs::exists(dir + "/plot_phi_mean.csv"));
  CHECK(fs::exists(dir + "/plot_avg_sq.csv"));
  const std::string summary1 = read_text_file(dir + "/summary.txt");
  const std::string plot1 = read_text_file(dir + "/plot_phi_mean.csv");
  CHECK(summary1.find("statistics:") != std::string::npos);
  CHECK(plot1.rfind("lambda,epsilon,t,value,se\n", 0) == 0);

  REQUIRE(cmd_report(dir, out, err) == 0);
  CHECK(read_text_file(dir + "/summary.txt") == summary1);
  CHECK(read_text_file(dir + "/plot_phi_mean.csv") == plot1);
}
