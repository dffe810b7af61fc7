#include "aclab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "aclab/errors.hpp"

namespace aclab {

namespace {

double spread_se(const std::vector<double>& vals) {
  const int n = static_cast<int>(vals.size());
  if (n < EnsembleAccumulator::kMinBatchesForSE)
    throw std::logic_error("standard error requested with fewer than 16 populated batches");
  double m = 0.0;
  for (double v : vals) m += v;
  m /= n;
  double ss = 0.0;
  for (double v : vals) ss += (v - m) * (v - m);
  return std::sqrt(ss / (static_cast<double>(n) * (n - 1)));
}

std::vector<double> trapezoid_weights(int n_nodes, double dt) {
  std::vector<double> w(n_nodes, dt);
  w.front() = 0.5 * dt;
  w.back() = 0.5 * dt;
  return w;
}

}  // namespace

double smoothed_reference_norm_sq(SpectralWorkspace& ws, const SimParams& params,
                                  const TestFunction& phi, double t) {
  const ScalarField rho = make_mollifier(params.scaled_mollifier(), params.grid);
  ScalarField g = ws.convolve(rho, phi.field);
  g = ws.heat(g, t);
  return l2_norm_sq(g);
}

double heat_kernel_norm_sq(SpectralWorkspace& ws, const SimParams& params, double t) {
  const ScalarField rho = make_mollifier(params.scaled_mollifier(), params.grid);
  const ScalarField g = ws.heat(rho, t);
  return l2_norm_sq(g);
}

VarianceRatio variance_two_sided(SpectralWorkspace& ws, const EnsembleAccumulator& acc,
                                 int obs, const SimParams& params,
                                 const TestFunction& phi, double t) {
  if (min_value(phi.field) < 0.0)
    throw NegativeTestFunction("two-sided variance bound needs a nonnegative test function");
  VarianceRatio out;
  out.reference = smoothed_reference_norm_sq(ws, params, phi, t);
  out.observed = acc.second_moment_est(obs);
  out.ratio = out.observed.value / out.reference;
  out.ratio_se = out.observed.se / out.reference;
  out.lower_edge = std::max(out.ratio - 3.0 * out.ratio_se, 0.0);
  return out;
}

std::vector<SigmaPoint> sigma_ladder(const EnsembleAccumulator& acc, int s_max) {
  std::vector<SigmaPoint> out;
  out.reserve(s_max + 1);
  for (int s = 0; s <= s_max; ++s) {
    const int obs = acc.index_of("avg_s" + std::to_string(s));
    out.push_back({s, acc.second_moment_est(obs)});
  }
  return out;
}

ComingDownCheck coming_down_check(const EnsembleAccumulator& acc, int obs,
                                  double lambda_eps, double t) {
  if (t <= 0.0) throw std::invalid_argument("coming-down bound needs t > 0");
  ComingDownCheck out;
  out.t = t;
  out.bound = lambda_eps > 0.0 ? 1.0 / (2.0 * lambda_eps * t)
                               : std::numeric_limits<double>::infinity();
  out.mean_sq = acc.mean_est(obs);
  out.within = out.mean_sq.value <= out.bound + 3.0 * out.mean_sq.se;
  return out;
}

DecorrelationReport decorrelation_test(const EnsembleAccumulator& acc,
                                       const std::vector<int>& obs_ids,
                                       const std::vector<double>& separations,
                                       int far_obs, double far_separation, double t) {
  if (obs_ids.size() != separations.size() || obs_ids.empty())
    throw std::invalid_argument("decorrelation needs one observable per separation");
  DecorrelationReport out;
  out.t = t;
  for (std::size_t i = 0; i < obs_ids.size(); ++i)
    out.points.push_back({separations[i], acc.mean_est(obs_ids[i])});

  // Weighted least squares of log(cov) on squared separation.
  std::vector<double> x, y, w;
  for (const auto& p : out.points) {
    if (p.cov.value <= 0.0) continue;
    x.push_back(p.separation * p.separation);
    y.push_back(std::log(p.cov.value));
    w.push_back(1.0 / ((p.cov.se / p.cov.value) * (p.cov.se / p.cov.value)));
  }
  if (x.size() < 2)
    throw std::invalid_argument("decorrelation fit needs at least two positive covariances");
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - xbar) * (x[i] - xbar);
    sxy += w[i] * (x[i] - xbar) * (y[i] - ybar);
  }
  if (sxx <= 0.0) throw std::invalid_argument("degenerate separation design in decorrelation fit");
  out.slope = sxy / sxx;
  out.slope_se = std::sqrt(1.0 / sxx);
  out.decay_constant = out.slope < 0.0 ? -1.0 / (out.slope * t)
                                       : std::numeric_limits<double>::infinity();
  out.far = {far_separation, acc.mean_est(far_obs)};
  out.far_z = out.far.cov.value / out.far.cov.se;
  return out;
}

MomentReport gaussianity_report(const EnsembleAccumulator& acc, int obs,
                                double z_threshold) {
  static constexpr double kTargets[6] = {0.0, 3.0, 0.0, 15.0, 0.0, 105.0};
  MomentReport out;
  out.z_threshold = z_threshold;
  out.all_pass = true;
  for (int p = 3; p <= 8; ++p) {
    MomentVerdict v;
    v.order = p;
    v.target = kTargets[p - 3];
    v.value = acc.standardized_moment_est(obs, p);
    v.z = (v.value.value - v.target) / v.value.se;
    v.pass = std::abs(v.z) <= z_threshold;
    out.all_pass = out.all_pass && v.pass;
    out.moments.push_back(v);
  }
  return out;
}

CrossCorrelation cross_correlation(const EnsembleAccumulator& acc, int pair_id) {
  return {acc.correlation_est(pair_id), acc.covariance_est(pair_id)};
}

ChaosProjection chaos_project(const EnsembleResult& res, int obs_f, int obs_w,
                              int pair_fw) {
  const NoiseKernelAccumulator* kernel = nullptr;
  for (const auto& k : res.kernels) {
    if (k.target == obs_f) kernel = &k;
  }
  if (!kernel)
    throw NoiseNotStored("chaos projection needs the noise kernel of the target observable");
  const EnsembleAccumulator& acc = res.acc;
  const int nb = acc.n_batches();

  ChaosProjection out;
  out.total_variance = acc.variance_est(obs_f);

  // First chaos: kernel means from even / odd batches, cross product summed.
  const GridSpec grid = kernel->batch_sums.front().grid;
  ScalarField sum_even(grid), sum_odd(grid);
  long n_even = 0, n_odd = 0;
  for (int b = 0; b < nb; ++b) {
    if (kernel->batch_counts[b] == 0) continue;
    if (b % 2 == 0) {
      axpy(sum_even, 1.0, kernel->batch_sums[b]);
      n_even += kernel->batch_counts[b];
    } else {
      axpy(sum_odd, 1.0, kernel->batch_sums[b]);
      n_odd += kernel->batch_counts[b];
    }
  }
  if (n_even == 0 || n_odd == 0)
    throw std::logic_error("split-half chaos estimate needs both batch parities populated");
  const double e1 = inner_product(sum_even, sum_odd) /
                    (static_cast<double>(n_even) * static_cast<double>(n_odd));
  // Delete-one-batch jackknife.
  std::vector<double> jk;
  for (int b = 0; b < nb; ++b) {
    const long cb = kernel->batch_counts[b];
    if (cb == 0) continue;
    ScalarField even = sum_even, odd = sum_odd;
    long ne = n_even, no = n_odd;
    if (b % 2 == 0) {
      axpy(even, -1.0, kernel->batch_sums[b]);
      ne -= cb;
    } else {
      axpy(odd, -1.0, kernel->batch_sums[b]);
      no -= cb;
    }
    if (ne == 0 || no == 0) continue;
    jk.push_back(inner_product(even, odd) /
                 (static_cast<double>(ne) * static_cast<double>(no)));
  }
  const int nj = static_cast<int>(jk.size());
  if (nj < 2) throw std::logic_error("too few batches for a jackknife error bar");
  double jm = 0.0;
  for (double v : jk) jm += v;
  jm /= nj;
  double jss = 0.0;
  for (double v : jk) jss += (v - jm) * (v - jm);
  out.chaos1 = {e1, std::sqrt(jss * (nj - 1) / static_cast<double>(nj))};

  // Third chaos: squared projection of F onto the Wick-cube statistic.
  const double cov_fw = acc.covariance(pair_fw);
  const double var_w = acc.variance(obs_w);
  if (var_w <= 0.0) throw std::logic_error("degenerate Wick statistic in chaos projection");
  const double e3 = cov_fw * cov_fw / var_w;
  std::vector<double> batch_e3;
  for (int b = 0; b < nb; ++b) {
    const long c = acc.batch_count(b);
    if (c < 2) continue;
    const double mf = acc.batch_sum(b, obs_f, 1) / c;
    const double mw = acc.batch_sum(b, obs_w, 1) / c;
    const double cb = acc.batch_pair_sum(b, pair_fw) / c - mf * mw;
    const double vw = acc.batch_sum(b, obs_w, 2) / c - mw * mw;
    if (vw <= 0.0) continue;
    batch_e3.push_back(cb * cb / vw);
  }
  out.chaos3 = {e3, spread_se(batch_e3)};

  out.residual.value = out.total_variance.value - out.chaos1.value - out.chaos3.value;
  out.residual.se = std::sqrt(out.total_variance.se * out.total_variance.se +
                              out.chaos1.se * out.chaos1.se +
                              out.chaos3.se * out.chaos3.se);
  return out;
}

std::vector<double> free_field_variances(SpectralWorkspace& ws, const SimParams& params,
                                         double t, int n_nodes) {
  if (n_nodes < 2) throw std::invalid_argument("node grid needs at least two nodes");
  const ScalarField cov = initial_covariance_field(ws, params.scaled_mollifier());
  const double dt = t / (n_nodes - 1);
  std::vector<double> out(n_nodes);
  for (int j = 0; j < n_nodes; ++j) out[j] = ws.heat(cov, 2.0 * dt * j)[0];
  return out;
}

namespace {

// eps^(d-2) * trapezoid_s p_{t-s} * (X_s^3 - 3 c_s X_s) with X_s = p_s * init.
ScalarField wick_picard_field(SpectralWorkspace& ws, const ScalarField& init,
                              double eps, int d, double t, int n_nodes,
                              const std::vector<double>& c_nodes) {
  if (n_nodes < 2) throw std::invalid_argument("node grid needs at least two nodes");
  if (static_cast<int>(c_nodes.size()) != n_nodes)
    throw std::invalid_argument("free-field variance table does not match the node grid");
  const double dt = t / (n_nodes - 1);
  const std::vector<double> w = trapezoid_weights(n_nodes, dt);
  ScalarField acc(init.grid, t);
  for (int j = 0; j < n_nodes; ++j) {
    const double s = dt * j;
    ScalarField x = ws.heat(init, s);
    for (long i = 0; i < x.size(); ++i) {
      const double v = x[i];
      x[i] = v * v * v - 3.0 * c_nodes[j] * v;
    }
    x = ws.heat(x, t - s);
    axpy(acc, w[j], x);
  }
  const double pre = std::pow(eps, d - 2);
  for (long i = 0; i < acc.size(); ++i) acc[i] *= pre;
  return acc;
}

}  // namespace

double wick_picard_observable(SpectralWorkspace& ws, const RescaledRun& run,
                              double t, int n_nodes,
                              const std::vector<double>& c_nodes,
                              const TestFunction& phi) {
  const ScalarField f = wick_picard_field(ws, run.init, run.params.eps,
                                          run.params.grid.d, t, n_nodes, c_nodes);
  return inner_product(f, phi.field);
}

double pi3_lower_bound(SpectralWorkspace& ws, const MollifierSpec& moll, double eps,
                       double t, int n_nodes) {
  if (t <= 0.0) throw std::invalid_argument("third-chaos bound needs t > 0");
  if (n_nodes < 2) throw std::invalid_argument("node grid needs at least two nodes");
  const double dt = t / (n_nodes - 1);
  if (dt > 0.5 * eps * eps + 1e-12) {
    std::ostringstream msg;
    msg << "time quadrature spacing " << dt << " exceeds eps^2/2 = " << 0.5 * eps * eps;
    throw QuadratureUnderResolved(msg.str());
  }
  const int d = ws.grid().d;
  const ScalarField cov = initial_covariance_field(ws, moll);
  const std::vector<double> w = trapezoid_weights(n_nodes, dt);
  // Group (j, k) node pairs by their sum; f depends only on s_j + s_k.
  std::vector<double> pair_weight(2 * n_nodes - 1, 0.0);
  for (int j = 0; j < n_nodes; ++j)
    for (int k = 0; k < n_nodes; ++k) pair_weight[j + k] += w[j] * w[k];
  double total = 0.0;
  for (int m = 0; m < 2 * n_nodes - 1; ++m) {
    const double tau = dt * m;
    ScalarField g = ws.heat(cov, tau);
    for (long i = 0; i < g.size(); ++i) g[i] = g[i] * g[i] * g[i];
    total += pair_weight[m] * ws.heat(g, 2.0 * t - tau)[0];
  }
  return 6.0 * std::pow(eps, 2 * d - 4) * total;
}

Estimate pi3_monte_carlo(const GridSpec& grid, const MollifierSpec& moll, double eps,
                         double t, int n_nodes, long n_replicas,
                         std::uint64_t master_seed, int workers) {
  const double dt = t / (n_nodes - 1);
  if (dt > 0.5 * eps * eps + 1e-12) {
    std::ostringstream msg;
    msg << "time quadrature spacing " << dt << " exceeds eps^2/2 = " << 0.5 * eps * eps;
    throw QuadratureUnderResolved(msg.str());
  }

  std::vector<double> c_nodes(n_nodes);
  {
    SpectralWorkspace ws(grid);
    const ScalarField cov = initial_covariance_field(ws, moll);
    for (int j = 0; j < n_nodes; ++j) c_nodes[j] = ws.heat(cov, 2.0 * dt * j)[0];
  }
  const ScalarField rho = make_mollifier(moll, grid);

  EnsembleOptions opts;
  opts.workers = workers;
  EnsembleAccumulator acc = ensemble_map(
      grid, n_replicas, {"pi3"}, {}, master_seed, opts,
      [&](long, RngStream& rng, SpectralWorkspace& ws, std::vector<double>& out) {
        const ScalarField noise = sample_white_noise(grid, rng);
        const ScalarField init = ws.convolve(rho, noise);
        const ScalarField f =
            wick_picard_field(ws, init, eps, grid.d, t, n_nodes, c_nodes);
        double ss = 0.0;
        for (long i = 0; i < f.size(); ++i) ss += f[i] * f[i];
        out[0] = ss / f.size();
      });
  return acc.mean_est(0);
}

MonotonicityVerdict lambda_monotonicity(
    const std::vector<const EnsembleAccumulator*>& accs, int obs,
    const std::vector<double>& lambdas, const std::vector<double>& predictor,
    double z_threshold) {
  if (accs.size() != lambdas.size() || accs.size() != predictor.size() || accs.size() < 2)
    throw std::invalid_argument("ladder comparison needs matching lambda/ensemble lists");
  MonotonicityVerdict out;
  out.lambdas = lambdas;
  out.predictor = predictor;
  for (const auto* a : accs) out.sigma_sq.push_back(a->second_moment_est(obs));
  out.strictly_decreasing = true;
  out.predictor_same_order = true;
  for (std::size_t i = 0; i + 1 < accs.size(); ++i) {
    LadderGap gap;
    gap.lambda_lo = lambdas[i];
    gap.lambda_hi = lambdas[i + 1];
    gap.decrease = EnsembleAccumulator::second_moment_diff_est(*accs[i], obs,
                                                               *accs[i + 1], obs);
    gap.significant = gap.decrease.value > z_threshold * gap.decrease.se;
    out.strictly_decreasing = out.strictly_decreasing && gap.significant;
    const bool emp_down = out.sigma_sq[i].value > out.sigma_sq[i + 1].value;
    const bool pred_down = predictor[i] > predictor[i + 1];
    out.predictor_same_order = out.predictor_same_order && (emp_down == pred_down);
    out.gaps.push_back(gap);
  }
  out.halved_at_top = out.sigma_sq.back().value < 0.5 * out.sigma_sq[1].value;
  return out;
}

}  // namespace aclab
