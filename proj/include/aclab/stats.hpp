#pragma once

// Ensemble machinery: mergeable moment accumulators with batch-means standard
// errors, an observable registry evaluated per replica, and a deterministic
// multi-worker ensemble driver.

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "aclab/rescale.hpp"

namespace aclab {

struct Estimate {
  double value = 0.0;
  double se = 0.0;
  double z(double target = 0.0) const { return (value - target) / se; }
};

class EnsembleAccumulator {
 public:
  static constexpr int kMaxPower = 8;
  static constexpr int kMinBatchesForSE = 16;

  EnsembleAccumulator() = default;
  EnsembleAccumulator(std::vector<std::string> names, long planned_replicas,
                      int n_batches = 32,
                      std::vector<std::pair<int, int>> pairs = {});

  void record(long replica_index, const std::vector<double>& values);
  void merge(const EnsembleAccumulator& other);

  long count() const { return count_; }
  int n_batches() const { return n_batches_; }
  int n_observables() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }
  int index_of(const std::string& name) const;  // MissingSnapshot if absent

  // Point estimates from the pooled sums.
  double mean(int obs) const;
  double raw_moment(int obs, int p) const;
  double central_moment(int obs, int p) const;
  double variance(int obs) const;  // unbiased (N-1) normalization
  double standardized_moment(int obs, int p) const;
  double pair_raw_mean(int pi) const;  // E[x*y] for registered pair pi
  double covariance(int pi) const;
  double correlation(int pi) const;

  // Batch-means standard errors: the statistic is recomputed on each batch
  // and the spread of batch values gives the SE of the pooled estimate.
  Estimate mean_est(int obs) const;
  Estimate raw_moment_est(int obs, int p) const;
  Estimate second_moment_est(int obs) const;
  Estimate variance_est(int obs) const;
  Estimate standardized_moment_est(int obs, int p) const;
  Estimate pair_raw_mean_est(int pi) const;
  Estimate covariance_est(int pi) const;
  Estimate correlation_est(int pi) const;

  // Paired difference E[a^2] - E[b^2] for ensembles run with common random
  // numbers: the SE comes from per-batch differences, batch by batch.
  static Estimate second_moment_diff_est(const EnsembleAccumulator& a, int obs_a,
                                         const EnsembleAccumulator& b, int obs_b);

  int pair_index(int i, int j) const;  // -1 if the pair was not registered

  // Batch access for custom estimators.
  int batch_of_replica(long replica_index) const;
  long batch_count(int b) const { return batch_count_[b]; }
  double batch_sum(int b, int obs, int p) const;       // sum of x^p in batch b
  double batch_pair_sum(int b, int pi) const;

 private:
  void check_compatible(const EnsembleAccumulator& other) const;
  Estimate batch_statistic(const std::function<double(int)>& per_batch,
                           double pooled) const;

  std::vector<std::string> names_;
  std::vector<std::pair<int, int>> pairs_;
  long planned_ = 0;
  long batch_size_ = 0;
  int n_batches_ = 0;
  long count_ = 0;
  std::vector<long> batch_count_;
  // sums_[b * n_obs * 8 + obs * 8 + (p-1)]
  std::vector<double> sums_;
  // pair_sums_[b * n_pairs + pi]
  std::vector<double> pair_sums_;
};

struct ObservableRegistry {
  struct Def {
    std::string name;
    std::function<double(const RescaledRun&, SpectralWorkspace&)> eval;
  };
  std::vector<Def> defs;
  std::vector<std::pair<int, int>> pairs;
  // Observables whose first-chaos kernel against the driving noise should be
  // accumulated as a field (used by the chaos decomposition).
  std::vector<int> kernel_targets;

  int add(const std::string& name,
          std::function<double(const RescaledRun&, SpectralWorkspace&)> eval);
  int add_pair(int i, int j);
  int index_of(const std::string& name) const;
  std::vector<std::string> names() const;
};

// Per-batch field sums of F * noise for one target observable.
struct NoiseKernelAccumulator {
  int target = -1;
  std::vector<ScalarField> batch_sums;
  std::vector<long> batch_counts;
};

struct EnsembleResult {
  EnsembleAccumulator acc;
  std::vector<NoiseKernelAccumulator> kernels;
};

struct EnsembleOptions {
  int workers = 1;
  int n_batches = 32;
};

// Runs n_replicas independent trajectories (counter-based streams keyed by
// replica index) and evaluates the registry on each. Bitwise deterministic for
// any fixed (params, seed) regardless of worker count: worker boundaries land
// on batch boundaries, so each batch is filled by one worker in ascending
// replica order, and merging worker shares in worker order reproduces the
// single-worker sums exactly. Any replica failure aborts the whole run and
// reports the failing replica index and seed.
EnsembleResult ensemble_run(const SimParams& params, long n_replicas,
                            const ObservableRegistry& registry,
                            std::uint64_t master_seed,
                            const EnsembleOptions& opts = {});

// Same partition/merge discipline for samplers that do not need the full
// simulation pipeline (free fields, synthetic fields). The sampler fills one
// value per name for its replica.
EnsembleAccumulator ensemble_map(
    const GridSpec& grid, long n_replicas, const std::vector<std::string>& names,
    const std::vector<std::pair<int, int>>& pairs, std::uint64_t master_seed,
    const EnsembleOptions& opts,
    const std::function<void(long, RngStream&, SpectralWorkspace&,
                             std::vector<double>&)>& sampler);

}  // namespace aclab
