#include "aclab/propagators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace aclab {

namespace {

void cubic_flow_inplace(ScalarField& f, double lambda, double t,
                        std::optional<double> truncation) {
  if (lambda == 0.0 || t == 0.0) {
    f.time += t;
    return;
  }
  const double a = 2.0 * lambda * t;
  const long n = f.size();
  if (truncation) {
    const double cap = *truncation;
    for (long i = 0; i < n; ++i) {
      double u = f.v[i];
      double u2 = std::min(u * u, cap);
      f.v[i] = u / std::sqrt(1.0 + a * u2);
    }
  } else {
    for (long i = 0; i < n; ++i) {
      double u = f.v[i];
      f.v[i] = u / std::sqrt(1.0 + a * u * u);
    }
  }
  f.time += t;
}

void check_state(const ScalarField& f, int step_index) {
  double mx = 0.0;
  for (double x : f.v) {
    if (!std::isfinite(x))
      throw NonFiniteState("solve: non-finite state at step " + std::to_string(step_index),
                           step_index, mx);
    mx = std::max(mx, std::fabs(x));
  }
}

void validate_times(const std::vector<double>& ts) {
  double prev = -1.0;
  for (double t : ts) {
    if (!(t >= 0.0) || !std::isfinite(t))
      throw std::invalid_argument("solve: observation times must be finite and >= 0");
    if (t <= prev)
      throw std::invalid_argument("solve: observation times must be strictly increasing");
    prev = t;
  }
}

}  // namespace

const ScalarField& Trajectory::at_time(double t) const {
  for (size_t i = 0; i < times.size(); ++i)
    if (std::fabs(times[i] - t) <= kTimeTol) return snaps[i];
  throw TimeNotInTrajectory("no snapshot stored at t = " + std::to_string(t));
}

bool Trajectory::has_time(double t) const {
  for (double s : times)
    if (std::fabs(s - t) <= kTimeTol) return true;
  return false;
}

ScalarField cubic_flow(const ScalarField& f, double lambda, double t) {
  if (lambda < 0.0) throw std::invalid_argument("cubic_flow: lambda must be >= 0");
  if (t < 0.0) throw std::invalid_argument("cubic_flow: duration must be >= 0");
  ScalarField out = f;
  cubic_flow_inplace(out, lambda, t, std::nullopt);
  return out;
}

ScalarField strang_step(SpectralWorkspace& ws, const ScalarField& f, double lambda,
                        double dt, std::optional<double> truncation) {
  if (!(dt > 0.0)) throw std::invalid_argument("strang_step: dt must be positive");
  ScalarField s = ws.heat(f, 0.5 * dt);
  cubic_flow_inplace(s, lambda, dt, truncation);
  s.time -= dt;  // cubic flow does not advance physical time beyond the step
  ScalarField out = ws.heat(s, 0.5 * dt);
  out.time = f.time + dt;
  return out;
}

Trajectory solve(SpectralWorkspace& ws, const ScalarField& f0, double lambda,
                 const StepScheme& scheme, const std::vector<double>& obs_times) {
  require_same_grid(f0.grid, ws.grid(), "solve");
  if (lambda < 0.0) throw std::invalid_argument("solve: lambda must be >= 0");
  if (!(scheme.dt > 0.0)) throw std::invalid_argument("solve: dt must be positive");
  if (!all_finite(f0)) throw NonFiniteInput("solve: initial state has non-finite values");
  validate_times(obs_times);

  Trajectory traj;
  traj.lambda = lambda;
  traj.scheme = scheme;

  std::vector<double> targets = obs_times;
  if (targets.empty() || targets.front() != 0.0) targets.insert(targets.begin(), 0.0);

  ScalarField state = f0;
  state.time = 0.0;
  traj.times.push_back(0.0);
  traj.snaps.push_back(state);

  int step_index = 0;
  double t_now = 0.0;
  for (size_t seg = 1; seg < targets.size(); ++seg) {
    const double t_end = targets[seg];
    const double span = t_end - t_now;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / scheme.dt - 1e-12)));
    const double dt = span / steps;

    // Half-steps between consecutive cubic flows merge into full heat steps.
    state = ws.heat(state, 0.5 * dt);
    for (int k = 0; k < steps; ++k) {
      cubic_flow_inplace(state, lambda, dt, scheme.truncation);
      state.time -= dt;
      state = ws.heat(state, k + 1 < steps ? dt : 0.5 * dt);
      state.time = t_now + (k + 1) * dt;
      ++step_index;
      check_state(state, step_index);
    }
    t_now = t_end;
    state.time = t_end;
    traj.times.push_back(t_end);
    traj.snaps.push_back(state);
  }
  return traj;
}

Trajectory linearized_solve(SpectralWorkspace& ws, const Trajectory& u_traj,
                            const ScalarField& v0, double lambda,
                            const StepScheme& scheme) {
  require_same_grid(v0.grid, ws.grid(), "linearized_solve");
  if (u_traj.times.size() < 2)
    throw TrajectoryTooCoarse("linearized_solve: trajectory has no intervals");
  if (!all_finite(v0))
    throw NonFiniteInput("linearized_solve: initial state has non-finite values");

  Trajectory out;
  out.lambda = lambda;
  out.scheme = scheme;
  out.times.push_back(u_traj.times.front());
  out.snaps.push_back(v0);
  out.snaps.back().time = u_traj.times.front();

  ScalarField v = v0;
  int step_index = 0;
  for (size_t j = 0; j + 1 < u_traj.times.size(); ++j) {
    const double dt = u_traj.times[j + 1] - u_traj.times[j];
    if (dt > scheme.dt * (1.0 + 1e-9))
      throw TrajectoryTooCoarse(
          "linearized_solve: trajectory spacing " + std::to_string(dt) +
          " exceeds scheme dt " + std::to_string(scheme.dt));
    const ScalarField& u = u_traj.snaps[j];
    v = ws.heat(v, 0.5 * dt);
    const double a = -3.0 * lambda * dt;
    const long n = v.size();
    for (long i = 0; i < n; ++i) v.v[i] *= std::exp(a * u.v[i] * u.v[i]);
    v = ws.heat(v, 0.5 * dt);
    v.time = u_traj.times[j + 1];
    ++step_index;
    check_state(v, step_index);
    out.times.push_back(v.time);
    out.snaps.push_back(v);
  }
  return out;
}

double mild_residual(SpectralWorkspace& ws, const Trajectory& traj, double t, double T) {
  if (!(t < T)) throw std::invalid_argument("mild_residual: need t < T");

  // Collect the stored snapshots spanning [t, T].
  std::vector<size_t> idx;
  for (size_t i = 0; i < traj.times.size(); ++i)
    if (traj.times[i] >= t - Trajectory::kTimeTol && traj.times[i] <= T + Trajectory::kTimeTol)
      idx.push_back(i);
  if (idx.size() < 3)
    throw InsufficientSnapshots("mild_residual: need at least 3 snapshots in [t, T]");
  if (std::fabs(traj.times[idx.front()] - t) > Trajectory::kTimeTol ||
      std::fabs(traj.times[idx.back()] - T) > Trajectory::kTimeTol)
    throw InsufficientSnapshots("mild_residual: endpoints not stored");
  const double ds = traj.times[idx[1]] - traj.times[idx[0]];
  for (size_t j = 0; j + 1 < idx.size(); ++j) {
    double gap = traj.times[idx[j + 1]] - traj.times[idx[j]];
    if (std::fabs(gap - ds) > 1e-9)
      throw InsufficientSnapshots("mild_residual: snapshots not uniformly spaced");
  }

  ScalarField res = traj.snaps[idx.back()] - ws.heat(traj.snaps[idx.front()], T - t);
  res.time = T;

  // trapezoid over s of p_{T-s} * u(s)^3
  for (size_t j = 0; j < idx.size(); ++j) {
    const double s = traj.times[idx[j]];
    const double w = (j == 0 || j + 1 == idx.size()) ? 0.5 * ds : ds;
    ScalarField cube = traj.snaps[idx[j]];
    for (double& x : cube.v) x = x * x * x;
    ScalarField prop = (T - s > 0.0) ? ws.heat(cube, T - s) : cube;
    axpy(res, traj.lambda * w, prop);
  }
  return max_abs(res);
}

}  // namespace aclab
