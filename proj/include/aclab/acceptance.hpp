#pragma once

// Desk-scale acceptance laboratory: one pinned configuration, lazily built
// shared ensembles, and twelve verdict functions, each printing a single
// pass/fail line. Every tolerance and scale lives in DeskScale or in the
// criterion bodies, never in the callers.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "aclab/clt_oracle.hpp"

namespace aclab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string details;
};

std::string verdict_line(const CriterionResult& r);

// Scales adapted so the full statistical battery fits a small machine: the
// torus is L = 4 with n = 32 per axis (spacing 1/8), the mollifier-width
// ladder is {1, 1/2, 1/4} (8, 4, 2 cells), and "smallest epsilon" below
// always means the last ladder rung. The third-chaos quadrature runs on a
// finer n = 64 lattice where the node-spacing precondition is satisfiable.
struct DeskScale {
  // main lattice
  int d = 3;
  int n = 32;
  double L = 4.0;
  double base_width = 1.0;
  double dt = 0.01;
  std::vector<double> eps_ladder{1.0, 0.5, 0.25};  // descending
  std::vector<double> t_list{0.25, 0.5};
  double t_dec = 0.1;     // decorrelation time: 6 sqrt(t) must fit in L/2
  double gauss_t = 0.25;  // moment-test observation time
  double phi_width = 0.5;

  // replica counts (powers chosen so 32 batches stay balanced)
  long ladder_replicas = 2048;
  long sigma_replicas = 1024;
  long tail_replicas = 256;
  long noise_replicas = 2048;
  long free_replicas = 2048;
  long chaos_mc_replicas = 256;
  int n_batches = 32;

  // coupling ladders
  std::vector<double> sigma_lambdas{0.0, 0.5, 2.0, 8.0, 32.0};
  std::vector<double> tail_lambdas{1.0, 4.0, 16.0};
  double noise_lambda = 0.25;
  int sigma_s_max = 8;

  // third-chaos lattices and quadrature. The deterministic ladder runs on a
  // finer noise-free grid so its smallest mollifier still spans 4 lattice
  // spacings; the Monte-Carlo cross-check keeps the coarser grid affordable.
  int chaos_n = 64;         // Monte-Carlo grid
  int chaos_ladder_n = 128; // deterministic-ladder grid
  double chaos_L = 4.0;
  std::vector<double> chaos_eps{0.4, 0.25, 0.125};
  double chaos_t = 1.0;
  // Scale-covariant time quadrature: the integrand has a boundary layer of
  // width eps^2, so each rung uses dt = eps^2 / chaos_nodes_per_eps2 and the
  // relative discretization error is the same on every rung.
  double chaos_nodes_per_eps2 = 8.0;
  int chaos_mc_nodes = 65;  // shared by the MC run and its comparator
  double chaos_mc_eps = 0.25;

  // synthetic one-dimensional moment test
  int clt_n = 8192;
  double clt_L = 1024.0;
  double clt_moll_width = 1.0;
  double clt_lambda = 1.0;
  std::vector<double> clt_eps{0.25, 0.125, 0.0625};
  int clt_k_max = 4;
  long clt_replicas = 4096;
  double clt_phi_width = 1.0;

  std::uint64_t seed = 20260822;
  double z_moment = 4.0;
  int workers = 0;  // 0: ACLAB_WORKERS env var, else hardware, clamped to 8

  int resolve_workers() const;
};

// Owns the shared ensembles so criteria that read the same runs (moments,
// variance band, decorrelation) never recompute them within one process.
class DeskLab {
 public:
  explicit DeskLab(DeskScale scale = {});

  const DeskScale& scale() const { return scale_; }
  int workers() const { return workers_; }
  const GridSpec& grid() const { return grid_; }
  double smallest_eps() const { return scale_.eps_ladder.back(); }

  SimParams rung_params(std::size_t rung) const;      // lambda = 1 ladder
  SimParams sigma_params(double lambda) const;        // smallest eps, s-ladder
  SimParams tail_params(double lambda) const;         // large-coupling decay
  SimParams noise_params() const;                     // lambda = 1/4 pairing
  SimParams free_params() const;                      // lambda = 0 calibration

  const EnsembleResult& rung_ensemble(std::size_t rung);
  const EnsembleResult& sigma_ensemble(std::size_t lambda_index);
  const EnsembleResult& tail_ensemble(std::size_t lambda_index);
  const EnsembleResult& free_ensemble();
  const EnsembleResult& noise_ensemble();

  const TestFunction& phi();  // shared nonnegative observation profile

  // Decorrelation design: axis offsets in lattice steps for the slope fit
  // plus two far offsets at separation >= 6 sqrt(t_dec).
  static const std::vector<int>& fit_offsets();

  static std::string phi_name(double t);        // "phi@t"
  static std::string msq_name(double t);        // "msq@t"
  static std::string prod_name(int offset);     // "prod@k"

 private:
  ObservableRegistry rung_registry();
  ObservableRegistry sigma_registry(const SimParams& params) const;
  ObservableRegistry tail_registry() const;
  ObservableRegistry noise_registry() const;
  ObservableRegistry free_registry();

  EnsembleResult run(const SimParams& params, long n_replicas,
                     const ObservableRegistry& registry);

  DeskScale scale_;
  int workers_ = 1;
  GridSpec grid_;
  std::shared_ptr<TestFunction> phi_;
  std::map<std::size_t, EnsembleResult> rungs_;
  std::map<std::size_t, EnsembleResult> sigmas_;
  std::map<std::size_t, EnsembleResult> tails_;
  std::unique_ptr<EnsembleResult> free_;
  std::unique_ptr<EnsembleResult> noise_;
};

CriterionResult criterion_deterministic(DeskLab& lab);   // 1
CriterionResult criterion_comparison(DeskLab& lab);      // 2
CriterionResult criterion_free_field(DeskLab& lab);      // 3
CriterionResult criterion_gaussianity(DeskLab& lab);     // 4
CriterionResult criterion_variance_band(DeskLab& lab);   // 5
CriterionResult criterion_coming_down(DeskLab& lab);     // 6
CriterionResult criterion_sigma_ladder(DeskLab& lab);    // 7
CriterionResult criterion_noise_creation(DeskLab& lab);  // 8
CriterionResult criterion_third_chaos(DeskLab& lab);     // 9
CriterionResult criterion_decorrelation(DeskLab& lab);   // 10
CriterionResult criterion_moment_oracle(DeskLab& lab);   // 11
CriterionResult criterion_reproducibility(DeskLab& lab); // 12

// Ensemble-free spot check of the combinatorial and quadrature oracles,
// used by the fast verification suite.
CriterionResult oracle_spotcheck();

// Runs the named criteria in ascending id order, printing each verdict line
// to `progress` (if given) as soon as it is known.
std::vector<CriterionResult> run_criteria(DeskLab& lab, const std::vector<int>& ids,
                                          std::ostream* progress = nullptr);

}  // namespace aclab
