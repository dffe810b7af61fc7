#pragma once

// Macroscopic-frame simulation: the equation is run on a fixed torus with the
// eps-narrowed mollifier and the weakened coupling lambda * eps^(d-2), so one
// trajectory is a sample of the rescaled field at scale eps.

#include <array>
#include <optional>
#include <vector>

#include "aclab/mollifier.hpp"
#include "aclab/propagators.hpp"

namespace aclab {

double effective_coupling(double lambda, double eps, int d);

struct SimParams {
  GridSpec grid;
  double lambda = 1.0;
  double eps = 1.0;
  double base_width = 1.0;  // mollifier support radius at eps = 1
  StepScheme scheme;
  std::vector<double> t_list;   // macroscopic observation times, > 0
  int s_max = 16;               // microscopic snapshots at k*eps^2, k <= s_max

  void validate() const;        // EpsilonUnresolvable etc.
  double lambda_eps() const;    // cached effective coupling
  double scaled_width() const { return eps * base_width; }
  MollifierSpec scaled_mollifier() const { return MollifierSpec(scaled_width()); }

  // {0} + t_list + microscopic ladder, sorted, de-duplicated.
  std::vector<double> snapshot_times() const;

 private:
  mutable double lambda_eps_cache_ = -1.0;
};

struct RescaledRun {
  SimParams params;
  ScalarField noise;  // driving white-noise realization
  ScalarField init;   // mollified noise, the state at time 0
  Trajectory traj;
};

RescaledRun simulate_rescaled(SpectralWorkspace& ws, const SimParams& params,
                              RngStream& rng);

struct TestFunction {
  enum class Kind { gaussian, bump };
  Kind kind = Kind::gaussian;
  std::array<double, 3> center{0, 0, 0};
  double width = 1.0;
  ScalarField field;
  double norm_sq = 0.0;  // cached lattice L2 norm squared
};

// Gaussian: exp(-|x-c|^2 / (2 width^2)) with periodic minimal-image distance.
// Bump: the compact kernel shape, unnormalized (peak 1).
TestFunction make_test_function(const GridSpec& grid, TestFunction::Kind kind,
                                const std::array<double, 3>& center, double width);

// Pairing <u(t), phi> of a stored snapshot against a test function.
double observable(const Trajectory& traj, double t, const TestFunction& phi);

// Heat flow of the initial state to time t (the interaction-free evolution).
ScalarField picard_x(SpectralWorkspace& ws, const RescaledRun& run, double t);
inline ScalarField heat_of_initial(SpectralWorkspace& ws, const RescaledRun& run,
                                   double t) {
  return picard_x(ws, run, t);
}

// eps^(d-2) * integral_0^t p_{t-s} * (f g h)(s) ds by trapezoid over the
// shared snapshot grid of the three trajectories. SnapshotMismatch if the
// grids differ; InsufficientSnapshots if fewer than two nodes reach t.
ScalarField picard_n(SpectralWorkspace& ws, const Trajectory& f, const Trajectory& g,
                     const Trajectory& h, double t, double eps, int d);

// L^{d/2} * lattice mean: variance of this equals the torus-integrated
// covariance of a stationary field.
double scaled_spatial_average(const ScalarField& f);

}  // namespace aclab
