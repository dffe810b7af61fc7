#include "aclab/stats.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "aclab/errors.hpp"

namespace aclab {

namespace {

long binomial(int n, int k) {
  long b = 1;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

}  // namespace

EnsembleAccumulator::EnsembleAccumulator(std::vector<std::string> names,
                                         long planned_replicas, int n_batches,
                                         std::vector<std::pair<int, int>> pairs)
    : names_(std::move(names)), pairs_(std::move(pairs)),
      planned_(planned_replicas), n_batches_(n_batches) {
  if (names_.empty()) throw std::invalid_argument("accumulator needs at least one observable");
  if (planned_ < 1) throw std::invalid_argument("planned replica count must be positive");
  if (n_batches_ < 1) throw std::invalid_argument("batch count must be positive");
  const int n_obs = static_cast<int>(names_.size());
  for (const auto& [i, j] : pairs_) {
    if (i < 0 || i >= n_obs || j < 0 || j >= n_obs)
      throw std::invalid_argument("pair index out of range");
  }
  batch_size_ = (planned_ + n_batches_ - 1) / n_batches_;
  batch_count_.assign(n_batches_, 0);
  sums_.assign(static_cast<std::size_t>(n_batches_) * n_obs * kMaxPower, 0.0);
  pair_sums_.assign(static_cast<std::size_t>(n_batches_) * pairs_.size(), 0.0);
}

int EnsembleAccumulator::batch_of_replica(long replica_index) const {
  if (replica_index < 0 || replica_index >= planned_)
    throw std::invalid_argument("replica index outside the planned range");
  return static_cast<int>(replica_index / batch_size_);
}

void EnsembleAccumulator::record(long replica_index, const std::vector<double>& values) {
  const int n_obs = n_observables();
  if (static_cast<int>(values.size()) != n_obs)
    throw std::invalid_argument("observable vector has the wrong length");
  for (double v : values) {
    if (!std::isfinite(v)) throw NonFiniteInput("non-finite observable value recorded");
  }
  const int b = batch_of_replica(replica_index);
  double* s = &sums_[(static_cast<std::size_t>(b) * n_obs) * kMaxPower];
  for (int i = 0; i < n_obs; ++i) {
    double pw = 1.0;
    for (int p = 0; p < kMaxPower; ++p) {
      pw *= values[i];
      s[i * kMaxPower + p] += pw;
    }
  }
  for (std::size_t pi = 0; pi < pairs_.size(); ++pi) {
    pair_sums_[static_cast<std::size_t>(b) * pairs_.size() + pi] +=
        values[pairs_[pi].first] * values[pairs_[pi].second];
  }
  batch_count_[b] += 1;
  count_ += 1;
}

void EnsembleAccumulator::check_compatible(const EnsembleAccumulator& other) const {
  if (names_ != other.names_ || pairs_ != other.pairs_ || planned_ != other.planned_ ||
      n_batches_ != other.n_batches_ || batch_size_ != other.batch_size_)
    throw std::invalid_argument("cannot merge accumulators with different structure");
}

void EnsembleAccumulator::merge(const EnsembleAccumulator& other) {
  check_compatible(other);
  for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += other.sums_[i];
  for (std::size_t i = 0; i < pair_sums_.size(); ++i) pair_sums_[i] += other.pair_sums_[i];
  for (int b = 0; b < n_batches_; ++b) batch_count_[b] += other.batch_count_[b];
  count_ += other.count_;
}

int EnsembleAccumulator::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  throw MissingSnapshot("no observable named '" + name + "' in this ensemble");
}

int EnsembleAccumulator::pair_index(int i, int j) const {
  for (std::size_t pi = 0; pi < pairs_.size(); ++pi) {
    if ((pairs_[pi].first == i && pairs_[pi].second == j) ||
        (pairs_[pi].first == j && pairs_[pi].second == i))
      return static_cast<int>(pi);
  }
  return -1;
}

double EnsembleAccumulator::batch_sum(int b, int obs, int p) const {
  if (b < 0 || b >= n_batches_) throw std::invalid_argument("batch index out of range");
  if (obs < 0 || obs >= n_observables()) throw std::invalid_argument("observable index out of range");
  if (p < 1 || p > kMaxPower) throw std::invalid_argument("power outside accumulated range");
  return sums_[(static_cast<std::size_t>(b) * n_observables() + obs) * kMaxPower + (p - 1)];
}

double EnsembleAccumulator::batch_pair_sum(int b, int pi) const {
  if (b < 0 || b >= n_batches_) throw std::invalid_argument("batch index out of range");
  if (pi < 0 || pi >= static_cast<int>(pairs_.size()))
    throw std::invalid_argument("pair index out of range");
  return pair_sums_[static_cast<std::size_t>(b) * pairs_.size() + pi];
}

namespace {

// Central moments from raw power sums: mu_p = sum_j C(p,j) E[x^j] (-m)^(p-j).
double central_from_raw(const double* raw, long n, int p) {
  const double m = raw[0] / n;
  double acc = std::pow(-m, p);  // j = 0 term
  double mp = 1.0;
  for (int j = 1; j <= p; ++j) {
    mp = (j == p) ? 1.0 : std::pow(-m, p - j);
    acc += binomial(p, j) * (raw[j - 1] / n) * mp;
  }
  return acc;
}

}  // namespace

double EnsembleAccumulator::raw_moment(int obs, int p) const {
  if (count_ == 0) throw std::logic_error("empty ensemble");
  double total = 0.0;
  for (int b = 0; b < n_batches_; ++b) total += batch_sum(b, obs, p);
  return total / count_;
}

double EnsembleAccumulator::mean(int obs) const { return raw_moment(obs, 1); }

double EnsembleAccumulator::central_moment(int obs, int p) const {
  if (p < 1 || p > kMaxPower) throw std::invalid_argument("power outside accumulated range");
  std::vector<double> raw(p);
  for (int j = 1; j <= p; ++j) raw[j - 1] = raw_moment(obs, j) * count_;
  return central_from_raw(raw.data(), count_, p);
}

double EnsembleAccumulator::variance(int obs) const {
  if (count_ < 2) throw std::logic_error("variance needs at least two replicas");
  return central_moment(obs, 2) * count_ / (count_ - 1);
}

double EnsembleAccumulator::standardized_moment(int obs, int p) const {
  const double mu2 = central_moment(obs, 2);
  if (mu2 <= 0.0) throw std::logic_error("degenerate distribution in standardized moment");
  return central_moment(obs, p) / std::pow(mu2, 0.5 * p);
}

double EnsembleAccumulator::pair_raw_mean(int pi) const {
  if (count_ == 0) throw std::logic_error("empty ensemble");
  double total = 0.0;
  for (int b = 0; b < n_batches_; ++b) total += batch_pair_sum(b, pi);
  return total / count_;
}

double EnsembleAccumulator::covariance(int pi) const {
  const auto& [i, j] = pairs_.at(pi);
  return pair_raw_mean(pi) - mean(i) * mean(j);
}

double EnsembleAccumulator::correlation(int pi) const {
  const auto& [i, j] = pairs_.at(pi);
  const double denom = std::sqrt(central_moment(i, 2) * central_moment(j, 2));
  if (denom <= 0.0) throw std::logic_error("degenerate distribution in correlation");
  return covariance(pi) / denom;
}

Estimate EnsembleAccumulator::batch_statistic(const std::function<double(int)>& per_batch,
                                              double pooled) const {
  std::vector<double> vals;
  vals.reserve(n_batches_);
  for (int b = 0; b < n_batches_; ++b) {
    if (batch_count_[b] > 0) vals.push_back(per_batch(b));
  }
  const int nb = static_cast<int>(vals.size());
  if (nb < kMinBatchesForSE)
    throw std::logic_error("standard error requested with fewer than 16 populated batches");
  double m = 0.0;
  for (double v : vals) m += v;
  m /= nb;
  double ss = 0.0;
  for (double v : vals) ss += (v - m) * (v - m);
  return {pooled, std::sqrt(ss / (static_cast<double>(nb) * (nb - 1)))};
}

Estimate EnsembleAccumulator::mean_est(int obs) const {
  return batch_statistic(
      [&](int b) { return batch_sum(b, obs, 1) / batch_count_[b]; }, mean(obs));
}

Estimate EnsembleAccumulator::raw_moment_est(int obs, int p) const {
  return batch_statistic(
      [&](int b) { return batch_sum(b, obs, p) / batch_count_[b]; }, raw_moment(obs, p));
}

Estimate EnsembleAccumulator::second_moment_est(int obs) const {
  return batch_statistic(
      [&](int b) { return batch_sum(b, obs, 2) / batch_count_[b]; }, raw_moment(obs, 2));
}

Estimate EnsembleAccumulator::variance_est(int obs) const {
  return batch_statistic(
      [&](int b) {
        const long c = batch_count_[b];
        if (c < 2) throw std::logic_error("batch too small for a variance estimate");
        const double m = batch_sum(b, obs, 1) / c;
        return (batch_sum(b, obs, 2) / c - m * m) * c / (c - 1);
      },
      variance(obs));
}

Estimate EnsembleAccumulator::standardized_moment_est(int obs, int p) const {
  return batch_statistic(
      [&](int b) {
        const long c = batch_count_[b];
        if (c < 2) throw std::logic_error("batch too small for a moment estimate");
        std::vector<double> raw(p);
        for (int j = 1; j <= p; ++j) raw[j - 1] = batch_sum(b, obs, j);
        const double mu2 = central_from_raw(raw.data(), c, 2);
        if (mu2 <= 0.0) throw std::logic_error("degenerate batch in standardized moment");
        return central_from_raw(raw.data(), c, p) / std::pow(mu2, 0.5 * p);
      },
      standardized_moment(obs, p));
}

Estimate EnsembleAccumulator::pair_raw_mean_est(int pi) const {
  return batch_statistic(
      [&](int b) { return batch_pair_sum(b, pi) / batch_count_[b]; }, pair_raw_mean(pi));
}

Estimate EnsembleAccumulator::covariance_est(int pi) const {
  const auto& [i, j] = pairs_.at(pi);
  return batch_statistic(
      [&](int b) {
        const long c = batch_count_[b];
        return batch_pair_sum(b, pi) / c -
               (batch_sum(b, i, 1) / c) * (batch_sum(b, j, 1) / c);
      },
      covariance(pi));
}

Estimate EnsembleAccumulator::correlation_est(int pi) const {
  const auto& [i, j] = pairs_.at(pi);
  return batch_statistic(
      [&](int b) {
        const long c = batch_count_[b];
        const double mi = batch_sum(b, i, 1) / c;
        const double mj = batch_sum(b, j, 1) / c;
        const double vi = batch_sum(b, i, 2) / c - mi * mi;
        const double vj = batch_sum(b, j, 2) / c - mj * mj;
        if (vi <= 0.0 || vj <= 0.0)
          throw std::logic_error("degenerate batch in correlation estimate");
        return (batch_pair_sum(b, pi) / c - mi * mj) / std::sqrt(vi * vj);
      },
      correlation(pi));
}

Estimate EnsembleAccumulator::second_moment_diff_est(const EnsembleAccumulator& a, int obs_a,
                                                     const EnsembleAccumulator& b, int obs_b) {
  if (a.n_batches_ != b.n_batches_)
    throw std::invalid_argument("paired difference needs matching batch structure");
  std::vector<double> vals;
  for (int k = 0; k < a.n_batches_; ++k) {
    if (a.batch_count_[k] != b.batch_count_[k])
      throw std::invalid_argument("paired difference needs matching batch counts");
    if (a.batch_count_[k] == 0) continue;
    vals.push_back(a.batch_sum(k, obs_a, 2) / a.batch_count_[k] -
                   b.batch_sum(k, obs_b, 2) / b.batch_count_[k]);
  }
  const int nb = static_cast<int>(vals.size());
  if (nb < kMinBatchesForSE)
    throw std::logic_error("standard error requested with fewer than 16 populated batches");
  double m = 0.0;
  for (double v : vals) m += v;
  m /= nb;
  double ss = 0.0;
  for (double v : vals) ss += (v - m) * (v - m);
  return {a.raw_moment(obs_a, 2) - b.raw_moment(obs_b, 2),
          std::sqrt(ss / (static_cast<double>(nb) * (nb - 1)))};
}

int ObservableRegistry::add(const std::string& name,
                            std::function<double(const RescaledRun&, SpectralWorkspace&)> eval) {
  defs.push_back({name, std::move(eval)});
  return static_cast<int>(defs.size()) - 1;
}

int ObservableRegistry::add_pair(int i, int j) {
  const int n = static_cast<int>(defs.size());
  if (i < 0 || i >= n || j < 0 || j >= n)
    throw std::invalid_argument("pair index out of range");
  pairs.emplace_back(i, j);
  return static_cast<int>(pairs.size()) - 1;
}

int ObservableRegistry::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (defs[i].name == name) return static_cast<int>(i);
  }
  throw MissingSnapshot("no observable named '" + name + "' registered");
}

std::vector<std::string> ObservableRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(defs.size());
  for (const auto& d : defs) out.push_back(d.name);
  return out;
}

namespace {

// Batch-aligned worker partition with first-failure bookkeeping. Worker
// boundaries land on batch boundaries, so every batch is filled by exactly one
// worker in ascending replica order; merging worker shares then reproduces the
// single-worker sums bit for bit. The body runs for each replica on its
// worker's thread; a throwing replica aborts every worker and surfaces as
// ReplicaFailure.
template <class Body>
void run_partitioned(const GridSpec& grid, long n_replicas, int n_batches,
                     int workers, std::uint64_t master_seed, Body&& body) {
  if (n_replicas < 32)
    throw std::invalid_argument("ensemble sizes below 32 give meaningless statistics; refused");
  if (workers < 1) throw std::invalid_argument("worker count must be positive");
  if (n_batches < 1) throw std::invalid_argument("batch count must be positive");
  const int nw = static_cast<int>(
      std::min<long>(std::min<long>(workers, n_replicas), n_batches));
  const long batch_size = (n_replicas + n_batches - 1) / n_batches;

  std::atomic<bool> abort{false};
  std::mutex fail_mutex;
  std::optional<std::pair<long, std::string>> failure;

  auto work = [&](int w) {
    const long lo = std::min<long>(batch_size * (n_batches * static_cast<long>(w) / nw),
                                   n_replicas);
    const long hi = std::min<long>(batch_size * (n_batches * static_cast<long>(w + 1) / nw),
                                   n_replicas);
    SpectralWorkspace ws(grid);
    for (long r = lo; r < hi; ++r) {
      if (abort.load(std::memory_order_relaxed)) return;
      try {
        body(w, r, ws);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(fail_mutex);
        if (!failure) failure = {r, e.what()};
        abort.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  if (nw == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int w = 0; w < nw; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  if (failure) {
    std::ostringstream msg;
    msg << "replica " << failure->first << " failed: " << failure->second;
    throw ReplicaFailure(msg.str(), failure->first,
                         mix3(master_seed, static_cast<std::uint64_t>(failure->first), 0));
  }
}

}  // namespace

EnsembleResult ensemble_run(const SimParams& params, long n_replicas,
                            const ObservableRegistry& registry,
                            std::uint64_t master_seed, const EnsembleOptions& opts) {
  params.validate();
  if (registry.defs.empty())
    throw std::invalid_argument("ensemble run needs at least one observable");
  const int n_obs = static_cast<int>(registry.defs.size());
  for (int kt : registry.kernel_targets) {
    if (kt < 0 || kt >= n_obs)
      throw std::invalid_argument("kernel target index out of range");
  }

  struct WorkerShare {
    EnsembleAccumulator acc;
    std::vector<NoiseKernelAccumulator> kernels;
    std::vector<double> vals;
  };
  const int nw = static_cast<int>(std::min<long>(
      std::min<long>(std::max(opts.workers, 1), n_replicas), opts.n_batches));
  std::vector<WorkerShare> shares;
  shares.reserve(nw);
  for (int w = 0; w < nw; ++w) {
    WorkerShare sh{EnsembleAccumulator(registry.names(), n_replicas, opts.n_batches,
                                       registry.pairs),
                   {},
                   std::vector<double>(n_obs)};
    for (int kt : registry.kernel_targets) {
      NoiseKernelAccumulator ka;
      ka.target = kt;
      ka.batch_counts.assign(opts.n_batches, 0);
      for (int b = 0; b < opts.n_batches; ++b)
        ka.batch_sums.emplace_back(params.grid, 0.0);
      sh.kernels.push_back(std::move(ka));
    }
    shares.push_back(std::move(sh));
  }

  run_partitioned(params.grid, n_replicas, opts.n_batches, opts.workers, master_seed,
                  [&](int w, long r, SpectralWorkspace& ws) {
                    WorkerShare& sh = shares[w];
                    RngStream rng(master_seed, static_cast<std::uint64_t>(r));
                    RescaledRun run = simulate_rescaled(ws, params, rng);
                    for (int i = 0; i < n_obs; ++i)
                      sh.vals[i] = registry.defs[i].eval(run, ws);
                    sh.acc.record(r, sh.vals);
                    const int b = sh.acc.batch_of_replica(r);
                    for (auto& ka : sh.kernels) {
                      axpy(ka.batch_sums[b], sh.vals[ka.target], run.noise);
                      ka.batch_counts[b] += 1;
                    }
                  });

  EnsembleResult out{std::move(shares[0].acc), std::move(shares[0].kernels)};
  for (int w = 1; w < nw; ++w) {
    out.acc.merge(shares[w].acc);
    for (std::size_t k = 0; k < out.kernels.size(); ++k) {
      for (int b = 0; b < opts.n_batches; ++b) {
        axpy(out.kernels[k].batch_sums[b], 1.0, shares[w].kernels[k].batch_sums[b]);
        out.kernels[k].batch_counts[b] += shares[w].kernels[k].batch_counts[b];
      }
    }
  }
  return out;
}

EnsembleAccumulator ensemble_map(
    const GridSpec& grid, long n_replicas, const std::vector<std::string>& names,
    const std::vector<std::pair<int, int>>& pairs, std::uint64_t master_seed,
    const EnsembleOptions& opts,
    const std::function<void(long, RngStream&, SpectralWorkspace&,
                             std::vector<double>&)>& sampler) {
  const int nw = static_cast<int>(std::min<long>(
      std::min<long>(std::max(opts.workers, 1), n_replicas), opts.n_batches));
  std::vector<EnsembleAccumulator> shares(
      nw, EnsembleAccumulator(names, n_replicas, opts.n_batches, pairs));
  std::vector<std::vector<double>> vals(nw, std::vector<double>(names.size()));

  run_partitioned(grid, n_replicas, opts.n_batches, opts.workers, master_seed,
                  [&](int w, long r, SpectralWorkspace& ws) {
                    RngStream rng(master_seed, static_cast<std::uint64_t>(r));
                    sampler(r, rng, ws, vals[w]);
                    shares[w].record(r, vals[w]);
                  });

  EnsembleAccumulator out = std::move(shares[0]);
  for (int w = 1; w < nw; ++w) out.merge(shares[w]);
  return out;
}

}  // namespace aclab
