#pragma once

// Time integration of d_t u = Lap u - lambda u^3 by symmetric splitting:
// exact spectral heat half-step, exact pointwise cubic flow, heat half-step.
// Both sub-flows are closed-form, so dt only controls the splitting error.

#include <optional>
#include <vector>

#include "aclab/spectral.hpp"

namespace aclab {

struct StepScheme {
  double dt = 0.01;
  // Optional diagnostic clamp: the cubic damping coefficient is evaluated
  // with u^2 capped at this value. Absent in normal runs.
  std::optional<double> truncation;
};

struct Trajectory {
  double lambda = 0.0;
  StepScheme scheme;
  std::vector<double> times;        // ascending, first entry 0
  std::vector<ScalarField> snaps;   // matching states

  const ScalarField& at_time(double t) const;  // TimeNotInTrajectory if absent
  bool has_time(double t) const;
  static constexpr double kTimeTol = 1e-9;
};

// Exact flow of d_t u = -lambda u^3 over duration t: u / sqrt(1 + 2 lambda t u^2).
ScalarField cubic_flow(const ScalarField& f, double lambda, double t);

// One symmetric step: heat(dt/2) then cubic(dt) then heat(dt/2).
ScalarField strang_step(SpectralWorkspace& ws, const ScalarField& f, double lambda,
                        double dt, std::optional<double> truncation = std::nullopt);

// Integrate from f0 (time 0) and record states at the requested times.
// Times must be nonnegative and strictly increasing; 0 is always recorded.
// Each inter-snapshot interval is covered by ceil(interval/dt) equal steps.
Trajectory solve(SpectralWorkspace& ws, const ScalarField& f0, double lambda,
                 const StepScheme& scheme, const std::vector<double>& obs_times);

// Derivative-equation replay along a stored trajectory:
// d_t v = Lap v - 3 lambda u^2 v, damping factor exp(-3 lambda u^2 dt) with u
// frozen at each interval's start. The trajectory must be sampled at least
// every scheme.dt (TrajectoryTooCoarse otherwise).
Trajectory linearized_solve(SpectralWorkspace& ws, const Trajectory& u_traj,
                            const ScalarField& v0, double lambda,
                            const StepScheme& scheme);

// Sup-norm defect of the integral (Duhamel) form between stored times t < T:
// u(T) - p_{T-t}*u(t) + lambda * trapezoid_s p_{T-s}*u(s)^3.
// Requires >= 3 uniformly spaced snapshots spanning [t, T].
double mild_residual(SpectralWorkspace& ws, const Trajectory& traj, double t, double T);

}  // namespace aclab
