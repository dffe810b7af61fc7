#pragma once

// Self-contained moment-method CLT check on synthetic short-range fields with
// known answers, plus pairing combinatorics, Gauss-Hermite quadrature of the
// reaction-layer map, and the proximity-clustering bookkeeping.

#include <array>
#include <functional>

#include "aclab/estimators.hpp"

namespace aclab {

// (2k-1)!! = (2k)! / (2^k k!), the number of perfect pairings of 2k items.
// Exact for 1 <= k <= 12; PairingOverflow beyond.
long pairing_count(int k);

// Independent oracle: backtracking enumeration of all pairings of 2k items,
// counting leaves. Practical for k <= 6.
long pairing_count_by_enumeration(int k);

struct GaussHermiteRule {
  std::vector<double> nodes;    // abscissae for Z ~ N(0,1)
  std::vector<double> weights;  // sum to 1
};

// n-point Gauss rule for standard normal expectations, built from the
// orthonormal Hermite recurrence (sign-scan bracketing + Newton polish).
GaussHermiteRule gauss_hermite(int n);

struct OdeLayerMatrix {
  double zz = 0.0;      // E[Z^2]
  double zphi = 0.0;    // E[Z Phi_lambda(Z)]
  double phiphi = 0.0;  // E[Phi_lambda(Z)^2]

  double correlation() const;
};

// Quadrature of the unit-time reaction-flow covariance for Z ~ N(0, v0),
// Phi_lambda(u) = u / sqrt(1 + 2 lambda u^2). Trapezoidal Gaussian quadrature
// whose step tracks the analyticity strip of the flow map (half-width
// 1/sqrt(2 lambda)), with a step-halving consistency check at 1e-10.
OdeLayerMatrix ode_layer_predictor(double lambda, double v0);

struct SyntheticFieldSpec {
  GridSpec grid;  // one-dimensional torus
  MollifierSpec moll;
  enum class Transform { identity, ode_flow, cubic_damped } transform =
      Transform::identity;
  double lambda = 1.0;

  SyntheticFieldSpec(const GridSpec& g, const MollifierSpec& m)
      : grid(g), moll(m) {}
};

// Pointwise odd map selected by spec.transform.
double apply_transform(const SyntheticFieldSpec& spec, double u);

// eta = transform(kernel * xi): stationary, centered, short-range.
ScalarField synthetic_field(SpectralWorkspace& ws, const SyntheticFieldSpec& spec,
                            const ScalarField& noise);

// Integrated covariance of the synthetic field via the scaled spatial
// average (Var of L^{d/2} * mean).
Estimate sigma_sq_field(const SyntheticFieldSpec& spec, long n_replicas,
                        std::uint64_t master_seed, int workers = 1);

struct CltMomentRow {
  double eps = 0.0;
  int order = 0;
  double target = 0.0;  // 0 for odd orders, (2k-1)!! (sigma^2 |phi|^2)^k for 2k
  Estimate value;       // raw moment of <eta_eps, phi>
  double z = 0.0;
  bool pass = false;
};

struct CltVerdictTable {
  Estimate sigma_sq;
  double phi_norm_sq = 0.0;
  std::vector<CltMomentRow> rows;
  bool all_pass_smallest = false;  // every order passes at the smallest eps
};

// Rescaled pairings <eta_eps, phi> = eps^{d/2} h^d sum_y eta(y) phi(eps x_y)
// across the eps ladder, with one common noise per replica so the trend
// across eps is paired. phi is a real-line profile with known L2 norm^2.
// Moment orders 1..2k_max are tested: odd against 0, even order 2k against
// pairing_count(k) * (sigma^2 * phi_norm_sq)^k with sigma^2 uncertainty
// folded into the z-score.
CltVerdictTable clt_moment_test(const SyntheticFieldSpec& spec,
                                const std::function<double(double)>& phi,
                                double phi_norm_sq,
                                const std::vector<double>& eps_ladder, int k_max,
                                long n_replicas, std::uint64_t master_seed,
                                int workers, double z_threshold);

// Transitive closure of the proximity relation |x_i - x_j| <= cutoff
// (union-find); returns one block label per point, numbered by first
// appearance.
std::vector<int> cluster_partition(const std::vector<std::array<double, 3>>& points,
                                   double cutoff);

}  // namespace aclab
