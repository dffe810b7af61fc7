#pragma once

// Statistical verdict machinery on top of the ensemble accumulator: variance
// ratios against deterministic references, decay-profile fits, chaos
// projections, and the deterministic third-chaos quadrature.

#include <vector>

#include "aclab/stats.hpp"

namespace aclab {

// Lattice L2 norm squared of p_t * rho_eps * phi, the linear-regime reference
// for Var<u(t), phi>.
double smoothed_reference_norm_sq(SpectralWorkspace& ws, const SimParams& params,
                                  const TestFunction& phi, double t);

// ||p_t * rho_eps||^2 = (p_{2t} * rho * rho~)(0) on the lattice.
double heat_kernel_norm_sq(SpectralWorkspace& ws, const SimParams& params, double t);

struct VarianceRatio {
  double reference = 0.0;  // deterministic denominator
  Estimate observed;       // Ê[<u,phi>^2]
  double ratio = 0.0;
  double ratio_se = 0.0;
  double lower_edge = 0.0;  // ratio - 3 * ratio_se, floored at 0
};

// Ratio of the empirical second moment of the registered pairing observable
// to the deterministic reference. Throws NegativeTestFunction if phi dips
// below zero (the two-sided bound assumes a nonnegative test function).
VarianceRatio variance_two_sided(SpectralWorkspace& ws, const EnsembleAccumulator& acc,
                                 int obs, const SimParams& params,
                                 const TestFunction& phi, double t);

struct SigmaPoint {
  int s = 0;          // microscopic time index (snapshot at s * eps^2)
  Estimate var;       // Var(A_s) = integrated covariance
};

// Var of the scaled spatial average across the microscopic s-ladder; the
// plateau value estimates the limiting integrated covariance.
std::vector<SigmaPoint> sigma_ladder(const EnsembleAccumulator& acc, int s_max);

struct ComingDownCheck {
  double t = 0.0;
  double bound = 0.0;  // 1 / (2 lambda_eps t)
  Estimate mean_sq;    // site-averaged Ê[u(t,x)^2]
  bool within = false;
};

ComingDownCheck coming_down_check(const EnsembleAccumulator& acc, int obs,
                                  double lambda_eps, double t);

struct DecayPoint {
  double separation = 0.0;
  Estimate cov;  // site-averaged product covariance
};

struct DecorrelationReport {
  double t = 0.0;
  std::vector<DecayPoint> points;  // ascending separations, first is 0
  double slope = 0.0;              // d log(cov) / d(separation^2), fitted
  double slope_se = 0.0;
  double decay_constant = 0.0;     // C in slope = -1/(C*t)
  DecayPoint far;                  // separation >= 6 sqrt(t)
  double far_z = 0.0;
};

// Fits log covariance against squared separation (weighted least squares,
// weights from the per-point SEs) and tests the far offset against zero.
// Offsets with non-positive covariance estimates are excluded from the fit;
// at least two positive points are required.
DecorrelationReport decorrelation_test(const EnsembleAccumulator& acc,
                                       const std::vector<int>& obs_ids,
                                       const std::vector<double>& separations,
                                       int far_obs, double far_separation, double t);

struct MomentVerdict {
  int order = 0;
  double target = 0.0;
  Estimate value;  // standardized moment
  double z = 0.0;
  bool pass = false;
};

struct MomentReport {
  std::vector<MomentVerdict> moments;  // orders 3..8
  double z_threshold = 4.0;
  bool all_pass = false;
};

// Standardized moments 3..8 of one observable against the Gaussian targets
// 0, 3, 0, 15, 0, 105.
MomentReport gaussianity_report(const EnsembleAccumulator& acc, int obs,
                                double z_threshold);

struct CrossCorrelation {
  Estimate correlation;
  Estimate covariance;
};

CrossCorrelation cross_correlation(const EnsembleAccumulator& acc, int pair_id);

struct ChaosProjection {
  Estimate total_variance;
  Estimate chaos1;    // split-half kernel product estimate, jackknife SE
  Estimate chaos3;    // squared regression of F onto the Wick-cube statistic
  Estimate residual;  // total - chaos1 - chaos3, SEs combined in quadrature
};

// Chaos-energy decomposition of observable obs_f using the stored noise
// kernels and the registered Wick-cube statistic obs_w. pair_fw must be the
// registered (obs_f, obs_w) pair. Throws NoiseNotStored when the ensemble
// kept no kernel for obs_f.
ChaosProjection chaos_project(const EnsembleResult& res, int obs_f, int obs_w,
                              int pair_fw);

// Per-node variances c_s = E[X(s,x)^2] = (p_{2s} * C_eps)(0) of the free
// field, one entry per node of the uniform grid {0, dt_q, ..., t}.
std::vector<double> free_field_variances(SpectralWorkspace& ws, const SimParams& params,
                                         double t, int n_nodes);

// <Wick-cubed first Picard iterate, phi>: the pure third-chaos statistic
// built from this replica's free field X(s) = p_s * u(0) on the uniform
// node grid, with X^3 replaced by X^3 - 3 c_s X before the time quadrature.
double wick_picard_observable(SpectralWorkspace& ws, const RescaledRun& run,
                              double t, int n_nodes,
                              const std::vector<double>& c_nodes,
                              const TestFunction& phi);

// Deterministic second moment of the Wick-cubed first Picard iterate at a
// point: 6 eps^(2d-4) double-trapezoid over (s, s') of
// p_{2t-s-s'} * (p_{s+s'} * C_eps)^3 evaluated at the origin, on the uniform
// n_nodes grid. Throws QuadratureUnderResolved when the node spacing exceeds
// eps^2 / 2.
double pi3_lower_bound(SpectralWorkspace& ws, const MollifierSpec& moll, double eps,
                       double t, int n_nodes);

// Monte Carlo partner of pi3_lower_bound: replicas of the site-averaged
// square of the Wick-cubed Picard field on the same node grid. Unbiased for
// the deterministic tensor-trapezoid value.
Estimate pi3_monte_carlo(const GridSpec& grid, const MollifierSpec& moll, double eps,
                         double t, int n_nodes, long n_replicas,
                         std::uint64_t master_seed, int workers);

struct LadderGap {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  Estimate decrease;  // sigma^2(lo) - sigma^2(hi), paired batches
  bool significant = false;
};

struct MonotonicityVerdict {
  std::vector<double> lambdas;
  std::vector<Estimate> sigma_sq;
  std::vector<LadderGap> gaps;
  bool strictly_decreasing = false;
  bool halved_at_top = false;        // sigma^2(last) < sigma^2(second)/2
  std::vector<double> predictor;     // ODE-layer E[Phi_lambda(Z)^2] values
  bool predictor_same_order = false;
};

// Common-random-number ladder comparison: each accumulator holds the same
// observable (index obs) run at lambdas[i] with identical noise, so the
// paired per-batch differences resolve the decrease.
MonotonicityVerdict lambda_monotonicity(
    const std::vector<const EnsembleAccumulator*>& accs, int obs,
    const std::vector<double>& lambdas, const std::vector<double>& predictor,
    double z_threshold);

}  // namespace aclab
