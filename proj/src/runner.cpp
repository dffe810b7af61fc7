#include "aclab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "aclab/acceptance.hpp"
#include "aclab/errors.hpp"
#include "aclab/estimators.hpp"
#include "aclab/io.hpp"

namespace aclab {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kArtifactVersion = "aclab 1.0.0";
constexpr double kPhiWidthFraction = 0.125;  // observation profile width / L

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

void check_keys(const json& j, const char* where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(std::string(where) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) bad("unknown key '" + it.key() + "' in " + where);
  }
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where + " must be a number");
  return j.get<double>();
}

long integer(const json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    bad(where + " must be an integer");
  return j.get<long>();
}

std::vector<double> num_list(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where + " must be a non-empty array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) bad(where + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::string obs_name(const char* prefix, double t) {
  std::ostringstream os;
  os << prefix << "@" << t;
  return os.str();
}

// Collects written files so the manifest can inventory them; the manifest
// itself is always the last byte written into the directory.
class OutputDir {
 public:
  explicit OutputDir(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::string& dir() const { return dir_; }
  std::string path(const std::string& rel) const { return dir_ + "/" + rel; }

  void write(const std::string& rel, const std::string& content) {
    write_text_file(path(rel), content);
    files_.push_back(
        {rel, hex64(fnv1a64(content.data(), content.size())), content.size()});
  }

  // For binary writers that stream straight to disk.
  void record(const std::string& rel) {
    const std::string full = path(rel);
    files_.push_back({rel, hex64(fnv1a64_file(full)),
                      static_cast<std::uint64_t>(std::filesystem::file_size(full))});
  }

  json inventory() const {
    json files = json::array();
    for (const auto& f : files_) {
      json e;
      e["path"] = f.rel;
      e["bytes"] = f.bytes;
      e["digest"] = f.digest;
      files.push_back(e);
    }
    return files;
  }

 private:
  struct Entry {
    std::string rel;
    std::string digest;
    std::uint64_t bytes;
  };
  std::string dir_;
  std::vector<Entry> files_;
};

json manifest_skeleton(const RunConfig& config, const char* command) {
  const std::string canon = serialize_config(config);
  json m;
  m["artifact"] = kArtifactVersion;
  m["command"] = command;
  m["experiment"] = config.experiment;
  m["config_digest"] = hex64(fnv1a64(canon.data(), canon.size()));
  m["config"] = parse_json(canon, "canonical config");
  return m;
}

void finish_manifest(json& m, const OutputDir& out, double wall_seconds,
                     long replicas) {
  m["files"] = out.inventory();
  json timing;
  timing["wall_seconds"] = wall_seconds;
  timing["replicas"] = replicas;
  timing["seconds_per_replica"] =
      replicas > 0 ? wall_seconds / static_cast<double>(replicas) : 0.0;
  m["timing"] = timing;
  write_text_file(out.path("manifest.json"), m.dump(2) + "\n");
}

int run_guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const MissingManifest& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ReplicaFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

ObservableRegistry ensemble_registry(const SimParams& p) {
  ObservableRegistry reg;
  auto profile = std::make_shared<TestFunction>(
      make_test_function(p.grid, TestFunction::Kind::gaussian, {0.0, 0.0, 0.0},
                         kPhiWidthFraction * p.grid.L));
  for (double t : p.t_list) {
    reg.add(obs_name("phi", t), [profile, t](const RescaledRun& run, SpectralWorkspace&) {
      return observable(run.traj, t, *profile);
    });
    reg.add(obs_name("avg", t), [t](const RescaledRun& run, SpectralWorkspace&) {
      return scaled_spatial_average(run.traj.at_time(t));
    });
    reg.add(obs_name("msq", t), [t](const RescaledRun& run, SpectralWorkspace&) {
      const ScalarField& f = run.traj.at_time(t);
      double ss = 0.0;
      for (long i = 0; i < f.size(); ++i) ss += f[i] * f[i];
      return ss / static_cast<double>(f.size());
    });
  }
  return reg;
}

void append_stats_rows(std::vector<StatRow>& rows, const EnsembleAccumulator& acc,
                       double lambda, double eps, const std::vector<double>& t_list) {
  for (double t : t_list) {
    const int i_phi = acc.index_of(obs_name("phi", t));
    const int i_avg = acc.index_of(obs_name("avg", t));
    const int i_msq = acc.index_of(obs_name("msq", t));
    const auto push = [&](const char* stat, const Estimate& e) {
      rows.push_back({lambda, eps, t, stat, e.value, e.se});
    };
    push("phi.mean", acc.mean_est(i_phi));
    push("phi.sq", acc.second_moment_est(i_phi));
    push("phi.kurtosis", acc.standardized_moment_est(i_phi, 4));
    push("avg.sq", acc.second_moment_est(i_avg));
    push("msq.mean", acc.mean_est(i_msq));
  }
}

std::string accumulator_csv(const EnsembleAccumulator& acc) {
  std::string out = "batch,observable,power,sum\n";
  for (int b = 0; b < acc.n_batches(); ++b) {
    for (int oi = 0; oi < acc.n_observables(); ++oi) {
      for (int p = 1; p <= EnsembleAccumulator::kMaxPower; ++p) {
        out += std::to_string(b);
        out += ',';
        out += acc.names()[oi];
        out += ',';
        out += std::to_string(p);
        out += ',';
        out += format_double(acc.batch_sum(b, oi, p));
        out += '\n';
      }
    }
  }
  return out;
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out;
}

}  // namespace

SimParams RunConfig::params(double lambda, double eps) const {
  SimParams p;
  p.grid = GridSpec(sim.d, sim.n, sim.L);
  p.lambda = lambda;
  p.eps = eps;
  p.base_width = sim.base_width;
  p.scheme.dt = sim.dt;
  p.t_list = sim.t_list;
  p.s_max = sim.s_max;
  return p;
}

RunConfig parse_config_text(const std::string& text) {
  const json j = parse_json(text, "config");
  check_keys(j, "config", {"experiment", "sim", "ensemble", "suites", "out_dir"});
  RunConfig c;
  if (j.contains("experiment")) {
    if (!j["experiment"].is_string()) bad("experiment must be a string");
    c.experiment = j["experiment"].get<std::string>();
  }
  if (j.contains("out_dir")) {
    if (!j["out_dir"].is_string()) bad("out_dir must be a string");
    c.out_dir = j["out_dir"].get<std::string>();
  }
  if (j.contains("suites")) {
    if (!j["suites"].is_array()) bad("suites must be an array of strings");
    c.suites.clear();
    for (const auto& s : j["suites"]) {
      if (!s.is_string()) bad("suites must be an array of strings");
      c.suites.push_back(s.get<std::string>());
    }
  }
  if (j.contains("sim")) {
    const json& s = j["sim"];
    check_keys(s, "sim",
               {"d", "n", "L", "lambda", "lambda_ladder", "eps", "eps_ladder",
                "base_width", "dt", "t_list", "s_max"});
    if (s.contains("d")) c.sim.d = static_cast<int>(integer(s["d"], "sim.d"));
    if (s.contains("n")) c.sim.n = static_cast<int>(integer(s["n"], "sim.n"));
    if (s.contains("L")) c.sim.L = num(s["L"], "sim.L");
    if (s.contains("lambda") && s.contains("lambda_ladder"))
      bad("give sim.lambda or sim.lambda_ladder, not both");
    if (s.contains("lambda")) {
      c.sim.lambdas = {num(s["lambda"], "sim.lambda")};
      c.sim.lambda_is_ladder = false;
    }
    if (s.contains("lambda_ladder")) {
      c.sim.lambdas = num_list(s["lambda_ladder"], "sim.lambda_ladder");
      c.sim.lambda_is_ladder = true;
    }
    if (s.contains("eps") && s.contains("eps_ladder"))
      bad("give sim.eps or sim.eps_ladder, not both");
    if (s.contains("eps")) {
      c.sim.epses = {num(s["eps"], "sim.eps")};
      c.sim.eps_is_ladder = false;
    }
    if (s.contains("eps_ladder")) {
      c.sim.epses = num_list(s["eps_ladder"], "sim.eps_ladder");
      c.sim.eps_is_ladder = true;
    }
    if (s.contains("base_width")) c.sim.base_width = num(s["base_width"], "sim.base_width");
    if (s.contains("dt")) c.sim.dt = num(s["dt"], "sim.dt");
    if (s.contains("t_list")) c.sim.t_list = num_list(s["t_list"], "sim.t_list");
    if (s.contains("s_max"))
      c.sim.s_max = static_cast<int>(integer(s["s_max"], "sim.s_max"));
  }
  if (j.contains("ensemble")) {
    const json& e = j["ensemble"];
    check_keys(e, "ensemble", {"n_replicas", "seed", "n_batches", "workers"});
    if (e.contains("n_replicas"))
      c.ensemble.n_replicas = integer(e["n_replicas"], "ensemble.n_replicas");
    if (e.contains("seed")) {
      const json& v = e["seed"];
      if (!v.is_number_integer() && !v.is_number_unsigned())
        bad("ensemble.seed must be a nonnegative integer");
      if (v.is_number_integer() && v.get<long long>() < 0)
        bad("ensemble.seed must be a nonnegative integer");
      c.ensemble.seed = v.get<std::uint64_t>();
    }
    if (e.contains("n_batches"))
      c.ensemble.n_batches = static_cast<int>(integer(e["n_batches"], "ensemble.n_batches"));
    if (e.contains("workers"))
      c.ensemble.workers = static_cast<int>(integer(e["workers"], "ensemble.workers"));
  }

  if (c.sim.d < 1 || c.sim.d > 3) bad("sim.d must be 1, 2, or 3");
  if (c.sim.n < 2) bad("sim.n must be at least 2");
  if (!(c.sim.L > 0.0)) bad("sim.L must be positive");
  if (!(c.sim.base_width > 0.0)) bad("sim.base_width must be positive");
  if (!(c.sim.dt > 0.0)) bad("sim.dt must be positive");
  if (c.sim.s_max < 0) bad("sim.s_max must be >= 0");
  for (double l : c.sim.lambdas)
    if (l < 0.0) bad("couplings must be >= 0");
  for (double e : c.sim.epses)
    if (!(e > 0.0 && e <= 1.0)) bad("eps values must lie in (0, 1]");
  if (c.ensemble.n_replicas < 1) bad("ensemble.n_replicas must be >= 1");
  if (c.ensemble.n_batches < 2) bad("ensemble.n_batches must be >= 2");
  if (c.ensemble.workers < 1) bad("ensemble.workers must be >= 1");
  return c;
}

RunConfig parse_config_file(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return parse_config_text(text);
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  json s;
  s["d"] = c.sim.d;
  s["n"] = c.sim.n;
  s["L"] = c.sim.L;
  if (c.sim.lambda_is_ladder)
    s["lambda_ladder"] = c.sim.lambdas;
  else
    s["lambda"] = c.sim.lambdas.front();
  if (c.sim.eps_is_ladder)
    s["eps_ladder"] = c.sim.epses;
  else
    s["eps"] = c.sim.epses.front();
  s["base_width"] = c.sim.base_width;
  s["dt"] = c.sim.dt;
  s["t_list"] = c.sim.t_list;
  s["s_max"] = c.sim.s_max;
  j["sim"] = s;
  json e;
  e["n_replicas"] = c.ensemble.n_replicas;
  e["seed"] = c.ensemble.seed;
  e["n_batches"] = c.ensemble.n_batches;
  e["workers"] = c.ensemble.workers;
  j["ensemble"] = e;
  j["suites"] = c.suites;
  j["out_dir"] = c.out_dir;
  return j.dump(2) + "\n";
}

RunConfig apply_overrides(RunConfig config, const CliOverrides& o) {
  if (o.out_dir) config.out_dir = *o.out_dir;
  if (o.seed) config.ensemble.seed = *o.seed;
  if (o.workers) {
    if (*o.workers < 1) bad("--workers must be >= 1");
    config.ensemble.workers = *o.workers;
  } else if (const char* env = std::getenv("ACLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 512)
      bad("ACLAB_WORKERS must be an integer in [1, 512]");
    config.ensemble.workers = static_cast<int>(v);
  }
  if (!o.suites.empty()) config.suites = o.suites;
  return config;
}

const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> s{"deterministic", "free-field", "gaussianity",
                                          "clt-desk"};
  return s;
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const auto t0 = Clock::now();
    if (config.sim.lambdas.size() != 1 || config.sim.epses.size() != 1)
      bad("simulate needs a single (lambda, eps); ladders belong to the ensemble command");
    const double lambda = config.sim.lambdas.front();
    const double eps = config.sim.epses.front();
    const SimParams p = config.params(lambda, eps);
    p.validate();

    OutputDir dir(config.out_dir);
    SpectralWorkspace& ws = workspace_for(p.grid);
    RngStream rng(config.ensemble.seed, 0);
    const RescaledRun run = simulate_rescaled(ws, p, rng);

    json snapshots = json::array();
    std::vector<StatRow> rows;
    for (std::size_t i = 0; i < run.traj.times.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "snapshot_%03zu.field", i);
      write_field(dir.path(name), run.traj.snaps[i]);
      dir.record(name);
      json s;
      s["index"] = i;
      s["time"] = run.traj.times[i];
      s["file"] = name;
      snapshots.push_back(s);
      const ScalarField& f = run.traj.snaps[i];
      double ss = 0.0;
      for (long k = 0; k < f.size(); ++k) ss += f[k] * f[k];
      const double t = run.traj.times[i];
      rows.push_back({lambda, eps, t, "state.max_abs", max_abs(f), 0.0});
      rows.push_back({lambda, eps, t, "state.mean_square",
                      ss / static_cast<double>(f.size()), 0.0});
      rows.push_back({lambda, eps, t, "state.scaled_avg", scaled_spatial_average(f), 0.0});
    }
    dir.write("stats.csv", stats_csv(rows));

    json verdicts = json::array();
    if (lambda == 0.0) {
      double dev = 0.0;
      for (double t : p.t_list) {
        ScalarField pure = ws.heat(run.init, t);
        axpy(pure, -1.0, run.traj.at_time(t));
        dev = std::max(dev, max_abs(pure));
      }
      json v;
      v["name"] = "pure-heat-match";
      v["pass"] = dev <= 1e-10;
      v["details"] = "max deviation " + format_double(dev);
      verdicts.push_back(v);
      out << (dev <= 1e-10 ? "[PASS] " : "[FAIL] ") << "pure-heat-match: max deviation "
          << format_double(dev) << "\n";
    }
    json report;
    report["experiment"] = config.experiment;
    report["command"] = "simulate";
    report["verdicts"] = verdicts;
    dir.write("report.json", report.dump(2) + "\n");

    json m = manifest_skeleton(config, "simulate");
    m["snapshots"] = snapshots;
    m["verdicts"] = verdicts;
    finish_manifest(m, dir, std::chrono::duration<double>(Clock::now() - t0).count(), 1);
    out << "simulate: wrote " << run.traj.times.size() << " snapshots to "
        << config.out_dir << "\n";
    return 0;
  });
}

int cmd_ensemble(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const auto t0 = Clock::now();
    OutputDir dir(config.out_dir);

    std::vector<StatRow> rows;
    json moments = json::array();
    long total_replicas = 0;
    for (double lambda : config.sim.lambdas) {
      for (double eps : config.sim.epses) {
        const SimParams p = config.params(lambda, eps);
        p.validate();
        EnsembleOptions opts;
        opts.workers = config.ensemble.workers;
        opts.n_batches = config.ensemble.n_batches;
        const EnsembleResult res = ensemble_run(p, config.ensemble.n_replicas,
                                                ensemble_registry(p),
                                                config.ensemble.seed, opts);
        total_replicas += config.ensemble.n_replicas;
        append_stats_rows(rows, res.acc, lambda, eps, p.t_list);

        char accname[96];
        std::snprintf(accname, sizeof accname, "accumulator_l%s_e%s.csv",
                      format_double(lambda).c_str(), format_double(eps).c_str());
        dir.write(accname, accumulator_csv(res.acc));

        for (double t : p.t_list) {
          const MomentReport rep = gaussianity_report(
              res.acc, res.acc.index_of(obs_name("phi", t)), 4.0);
          json entry;
          entry["lambda"] = lambda;
          entry["eps"] = eps;
          entry["t"] = t;
          json orders = json::array();
          for (const MomentVerdict& mv : rep.moments) {
            json o;
            o["order"] = mv.order;
            o["target"] = mv.target;
            o["value"] = mv.value.value;
            o["se"] = mv.value.se;
            o["z"] = mv.z;
            o["pass"] = mv.pass;
            orders.push_back(o);
          }
          entry["orders"] = orders;
          entry["all_pass"] = rep.all_pass;
          moments.push_back(entry);
        }
      }
    }
    dir.write("stats.csv", stats_csv(rows));
    json report;
    report["experiment"] = config.experiment;
    report["command"] = "ensemble";
    report["moments"] = moments;
    dir.write("report.json", report.dump(2) + "\n");

    json m = manifest_skeleton(config, "ensemble");
    finish_manifest(m, dir, std::chrono::duration<double>(Clock::now() - t0).count(),
                    total_replicas);
    out << "ensemble: " << total_replicas << " replicas across "
        << config.sim.lambdas.size() * config.sim.epses.size() << " parameter points\n";
    return 0;
  });
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<std::string> suites = config.suites;
  if (suites.empty()) suites = {"clt-desk"};
  for (const std::string& s : suites) {
    const auto& known = known_suites();
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      err << "unknown suite '" << s << "'; known suites:";
      for (const std::string& k : known) err << " " << k;
      err << "\n";
      return 2;
    }
  }
  return run_guarded(err, [&]() -> int {
    const auto t0 = Clock::now();
    bool want_spotcheck = false;
    std::set<int> ids;
    for (const std::string& s : suites) {
      if (s == "deterministic") {
        want_spotcheck = true;
        ids.insert(1);
      } else if (s == "free-field") {
        ids.insert(3);
      } else if (s == "gaussianity") {
        ids.insert(4);
      } else if (s == "clt-desk") {
        for (int i = 1; i <= 12; ++i) ids.insert(i);
      }
    }

    DeskScale scale;
    scale.seed = config.ensemble.seed;
    scale.workers = config.ensemble.workers;
    DeskLab lab(scale);

    std::vector<CriterionResult> results;
    if (want_spotcheck) {
      results.push_back(oracle_spotcheck());
      out << verdict_line(results.back()) << std::endl;
    }
    const std::vector<CriterionResult> crit =
        run_criteria(lab, {ids.begin(), ids.end()}, &out);
    results.insert(results.end(), crit.begin(), crit.end());

    OutputDir dir(config.out_dir);
    json checks = json::array();
    bool all_pass = true;
    for (const CriterionResult& r : results) {
      json c;
      c["id"] = r.id;
      c["name"] = r.name;
      c["pass"] = r.pass;
      c["details"] = r.details;
      checks.push_back(c);
      all_pass = all_pass && r.pass;
    }
    json report;
    report["experiment"] = config.experiment;
    report["command"] = "verify";
    report["suites"] = suites;
    report["checks"] = checks;
    report["all_pass"] = all_pass;
    dir.write("report.json", report.dump(2) + "\n");

    json m = manifest_skeleton(config, "verify");
    m["verdicts"] = checks;
    finish_manifest(m, dir, std::chrono::duration<double>(Clock::now() - t0).count(), 0);
    out << (all_pass ? "verify: all checks passed\n" : "verify: some checks FAILED\n");
    return all_pass ? 0 : 1;
  });
}

int cmd_report(const std::string& results_dir, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const std::string manifest_path = results_dir + "/manifest.json";
    if (!std::filesystem::exists(manifest_path))
      throw MissingManifest("no manifest in '" + results_dir +
                            "': directory is incomplete or not a results directory");
    const json manifest = parse_json(read_text_file(manifest_path), "manifest");

    std::vector<StatRow> rows;
    const std::string stats_path = results_dir + "/stats.csv";
    bool has_stats = false;
    if (manifest.contains("files")) {
      for (const auto& f : manifest["files"])
        if (f.contains("path") && f["path"] == "stats.csv") has_stats = true;
    }
    if (has_stats) {
      if (!std::filesystem::exists(stats_path))
        bad("stats.csv listed in manifest but missing from the directory");
      std::istringstream is(read_text_file(stats_path));
      std::string line;
      std::getline(is, line);  // header
      while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        StatRow r;
        std::string field;
        std::getline(ls, field, ',');
        r.lambda = std::strtod(field.c_str(), nullptr);
        std::getline(ls, field, ',');
        r.eps = std::strtod(field.c_str(), nullptr);
        std::getline(ls, field, ',');
        r.t = std::strtod(field.c_str(), nullptr);
        std::getline(ls, r.statistic, ',');
        std::getline(ls, field, ',');
        r.value = std::strtod(field.c_str(), nullptr);
        std::getline(ls, field, ',');
        r.se = std::strtod(field.c_str(), nullptr);
        rows.push_back(r);
      }
    }

    // One tidy plot file per statistic, rows in stats.csv order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<const StatRow*>> by_stat;
    for (const StatRow& r : rows) {
      if (by_stat.find(r.statistic) == by_stat.end()) order.push_back(r.statistic);
      by_stat[r.statistic].push_back(&r);
    }
    for (const std::string& stat : order) {
      std::string csv = "lambda,epsilon,t,value,se\n";
      for (const StatRow* r : by_stat[stat]) {
        csv += format_double(r->lambda) + "," + format_double(r->eps) + "," +
               format_double(r->t) + "," + format_double(r->value) + "," +
               format_double(r->se) + "\n";
      }
      write_text_file(results_dir + "/plot_" + sanitize(stat) + ".csv", csv);
    }

    std::string summary;
    summary += "experiment: " +
               (manifest.contains("experiment")
                    ? manifest["experiment"].get<std::string>()
                    : std::string("?")) +
               "\n";
    summary += "command: " +
               (manifest.contains("command") ? manifest["command"].get<std::string>()
                                             : std::string("?")) +
               "\n";
    summary += "statistics: " + std::to_string(order.size()) + "\n";
    for (const std::string& stat : order) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (const StatRow* r : by_stat[stat]) {
        lo = std::min(lo, r->value);
        hi = std::max(hi, r->value);
      }
      summary += stat + ": rows=" + std::to_string(by_stat[stat].size()) + " range=[" +
                 format_double(lo) + "," + format_double(hi) + "]\n";
    }
    write_text_file(results_dir + "/summary.txt", summary);
    out << "report: " << order.size() << " plot files written to " << results_dir
        << "\n";
    return 0;
  });
}

}  // namespace aclab
