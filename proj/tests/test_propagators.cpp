#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "aclab/errors.hpp"
#include "aclab/field.hpp"
#include "aclab/propagators.hpp"
#include "aclab/rng.hpp"
#include "aclab/spectral.hpp"

using namespace aclab;

namespace {

ScalarField random_field(const GridSpec& g, std::uint64_t seed, double amp = 1.0) {
  RngStream rng(seed, 0);
  ScalarField f(g);
  for (long i = 0; i < f.size(); ++i) f[i] = amp * rng.normal();
  return f;
}

ScalarField smooth_field(const GridSpec& g) {
  ScalarField f(g);
  for (long i = 0; i < f.size(); ++i) {
    const double x = g.coords(i)[0] * g.h * 2.0 * std::numbers::pi / g.L;
    f[i] = std::sin(x) + 0.3 * std::cos(2.0 * x);
  }
  return f;
}

// Spectral Laplacian through the public transform API, for the RK4 oracle.
ScalarField laplacian(SpectralWorkspace& ws, const ScalarField& f) {
  Spectrum s = ws.to_spectrum(f);
  for (long i = 0; i < ws.mode_count(); ++i) s.c[i] *= -ws.k_squared()[i];
  return ws.to_field(s, f.time);
}

// Classical RK4 for d_t u = Lap u - lambda u^3, an integrator wholly
// independent of the splitting scheme under test.
ScalarField rk4_reference(SpectralWorkspace& ws, ScalarField u, double lambda,
                          double T, double dt) {
  const auto rhs = [&](const ScalarField& f) {
    ScalarField r = laplacian(ws, f);
    for (long i = 0; i < r.size(); ++i) r[i] -= lambda * f[i] * f[i] * f[i];
    return r;
  };
  const long steps = static_cast<long>(std::llround(T / dt));
  for (long s = 0; s < steps; ++s) {
    const ScalarField k1 = rhs(u);
    ScalarField u2 = u;
    axpy(u2, 0.5 * dt, k1);
    const ScalarField k2 = rhs(u2);
    ScalarField u3 = u;
    axpy(u3, 0.5 * dt, k2);
    const ScalarField k3 = rhs(u3);
    ScalarField u4 = u;
    axpy(u4, dt, k3);
    const ScalarField k4 = rhs(u4);
    axpy(u, dt / 6.0, k1);
    axpy(u, dt / 3.0, k2);
    axpy(u, dt / 3.0, k3);
    axpy(u, dt / 6.0, k4);
  }
  return u;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double dev = 0.0;
  for (long i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
  return dev;
}

double l2_diff(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (long i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("cubic flow matches the closed form and an RK4 scalar oracle") {
  const GridSpec g(1, 64, 4.0);
  const ScalarField f = random_field(g, 17, 2.0);
  const double lambda = 1.7;
  const double t = 0.8;
  const ScalarField out = cubic_flow(f, lambda, t);
  for (long i = 0; i < f.size(); ++i) {
    const double expect = f[i] / std::sqrt(1.0 + 2.0 * lambda * t * f[i] * f[i]);
    CHECK(out[i] == doctest::Approx(expect).epsilon(1e-14));
  }

  // RK4 on the scalar ODE du/ds = -lambda u^3 as an independent oracle
  for (double u0 : {-2.5, -0.3, 0.0, 0.7, 3.1}) {
    double u = u0;
    const double dt = 1e-4;
    const auto rhs = [&](double v) { return -lambda * v * v * v; };
    for (int s = 0; s < 8000; ++s) {
      const double k1 = rhs(u);
      const double k2 = rhs(u + 0.5 * dt * k1);
      const double k3 = rhs(u + 0.5 * dt * k2);
      const double k4 = rhs(u + dt * k3);
      u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    const double closed = u0 / std::sqrt(1.0 + 2.0 * lambda * t * u0 * u0);
    CHECK(u == doctest::Approx(closed).epsilon(1e-10));
  }
}

TEST_CASE("cubic flow with zero coupling or zero duration is the identity") {
  const GridSpec g(1, 16, 2.0);
  const ScalarField f = random_field(g, 3);
  const ScalarField a = cubic_flow(f, 0.0, 0.9);
  const ScalarField b = cubic_flow(f, 2.0, 0.0);
  for (long i = 0; i < f.size(); ++i) {
    CHECK(a[i] == f[i]);
    CHECK(b[i] == f[i]);
  }
}

TEST_CASE("solver with zero coupling reduces to the exact heat flow") {
  const GridSpec g(1, 64, 4.0);
  SpectralWorkspace ws(g);
  const ScalarField f0 = ws.heat(random_field(g, 8), 0.005);
  StepScheme scheme;
  scheme.dt = 0.01;
  const Trajectory traj = solve(ws, f0, 0.0, scheme, {0.1, 0.3});
  for (double t : {0.1, 0.3}) {
    const ScalarField ref = ws.heat(f0, t);
    CHECK(sup_diff(traj.at_time(t), ref) < 1e-12 * max_abs(f0));
  }
}

TEST_CASE("splitting solution converges to an RK4 method-of-lines reference") {
  const GridSpec g(1, 32, 2.0 * std::numbers::pi);
  SpectralWorkspace ws(g);
  const ScalarField f0 = smooth_field(g);
  const double lambda = 1.0;
  const double T = 0.2;
  StepScheme scheme;
  scheme.dt = 5e-4;
  const Trajectory traj = solve(ws, f0, lambda, scheme, {T});
  const ScalarField ref = rk4_reference(ws, f0, lambda, T, 5e-4);
  CHECK(sup_diff(traj.at_time(T), ref) < 1e-5);
}

TEST_CASE("splitting error shrinks at second order under dt halving") {
  const GridSpec g(1, 64, 4.0);
  SpectralWorkspace ws(g);
  // the horizon is an exact multiple of every rung of the dt ladder, so the
  // solver never rounds the step size and the Richardson ratio is clean
  const ScalarField f0 = ws.heat(random_field(g, 23, 1.5), 0.05);
  const double T = 0.24;
  const auto at = [&](double dt) {
    StepScheme s;
    s.dt = dt;
    return solve(ws, f0, 1.0, s, {T}).at_time(T);
  };
  const ScalarField u1 = at(0.012);
  const ScalarField u2 = at(0.006);
  const ScalarField u3 = at(0.003);
  const double ratio = l2_diff(u1, u2) / l2_diff(u2, u3);
  CHECK(ratio > 3.5);
  CHECK(ratio < 4.5);
}

TEST_CASE("trajectory records time zero and the requested times exactly") {
  const GridSpec g(1, 16, 2.0);
  SpectralWorkspace ws(g);
  StepScheme scheme;
  scheme.dt = 0.01;
  const Trajectory traj = solve(ws, random_field(g, 2), 0.5, scheme, {0.07, 0.3});
  REQUIRE(traj.times.size() == 3);
  CHECK(traj.times[0] == 0.0);
  CHECK(traj.times[1] == doctest::Approx(0.07));
  CHECK(traj.times[2] == doctest::Approx(0.3));
  CHECK(traj.has_time(0.07));
  CHECK_FALSE(traj.has_time(0.21));
  CHECK_THROWS_AS(traj.at_time(0.21), TimeNotInTrajectory);

  CHECK_THROWS_AS(solve(ws, random_field(g, 2), 0.5, scheme, {0.3, 0.07}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve(ws, random_field(g, 2), 0.5, scheme, {-0.1}),
                  std::invalid_argument);
}

TEST_CASE("a zero truncation clamp freezes the cubic sub-flow") {
  const GridSpec g(1, 32, 2.0);
  SpectralWorkspace ws(g);
  const ScalarField f = random_field(g, 29, 2.0);
  const ScalarField stepped = strang_step(ws, f, 5.0, 0.02, 0.0);
  const ScalarField pure = ws.heat(f, 0.02);
  CHECK(sup_diff(stepped, pure) < 1e-12 * max_abs(f));
}

TEST_CASE("linearized replay with zero coupling is the heat flow") {
  const GridSpec g(1, 64, 4.0);
  SpectralWorkspace ws(g);
  StepScheme scheme;
  scheme.dt = 0.01;
  const ScalarField f0 = ws.heat(random_field(g, 4), 0.01);
  std::vector<double> dense;
  for (int k = 1; k <= 25; ++k) dense.push_back(0.01 * k);
  const Trajectory traj = solve(ws, f0, 0.0, scheme, dense);
  const ScalarField v0 = ws.heat(random_field(g, 5), 0.02);
  const Trajectory v = linearized_solve(ws, traj, v0, 0.0, scheme);
  const ScalarField ref = ws.heat(v0, 0.25);
  CHECK(sup_diff(v.at_time(0.25), ref) < 1e-10 * max_abs(v0));
}

TEST_CASE("linearized replay is damped: nonnegative data stay under the heat flow") {
  const GridSpec g(1, 128, 8.0);
  SpectralWorkspace ws(g);
  StepScheme scheme;
  scheme.dt = 0.01;
  const ScalarField f0 = ws.heat(random_field(g, 41, 1.2), 0.02);
  std::vector<double> dense;
  for (int k = 1; k <= 30; ++k) dense.push_back(0.01 * k);
  const double lambda = 2.0;
  const Trajectory traj = solve(ws, f0, lambda, scheme, dense);

  ScalarField v0(g);
  for (long i = 0; i < v0.size(); ++i) {
    const double x = g.min_image(i * g.h);
    v0[i] = std::exp(-x * x);
  }
  const Trajectory v = linearized_solve(ws, traj, v0, lambda, scheme);
  const double t = 0.3;
  const ScalarField upper = ws.heat(v0, t);
  const ScalarField& vt = v.at_time(t);
  double worst_lower = 0.0, worst_upper = 0.0;
  for (long i = 0; i < vt.size(); ++i) {
    worst_lower = std::min(worst_lower, vt[i]);
    worst_upper = std::max(worst_upper, vt[i] - upper[i]);
  }
  CHECK(worst_lower >= -1e-10);
  CHECK(worst_upper <= 1e-10);
}

TEST_CASE("linearized replay refuses a trajectory sampled coarser than dt") {
  const GridSpec g(1, 32, 2.0);
  SpectralWorkspace ws(g);
  StepScheme coarse;
  coarse.dt = 0.05;
  const Trajectory traj = solve(ws, random_field(g, 6), 1.0, coarse, {0.1, 0.2});
  StepScheme fine;
  fine.dt = 0.01;
  CHECK_THROWS_AS(linearized_solve(ws, traj, random_field(g, 7), 1.0, fine),
                  TrajectoryTooCoarse);
}

TEST_CASE("integral-form residual vanishes at second order in dt") {
  const GridSpec g(1, 64, 4.0);
  SpectralWorkspace ws(g);
  const ScalarField f0 = ws.heat(random_field(g, 50, 1.5), 0.01);
  const double T = 0.2;
  const auto residual_at = [&](double dt) {
    StepScheme s;
    s.dt = dt;
    std::vector<double> times;
    const long steps = static_cast<long>(std::llround(T / dt));
    for (long k = 1; k <= steps; ++k) times.push_back(dt * static_cast<double>(k));
    const Trajectory traj = solve(ws, f0, 1.0, s, times);
    return mild_residual(ws, traj, 0.0, T);
  };
  const double r1 = residual_at(0.02);
  const double r2 = residual_at(0.01);
  CHECK(r1 < 5e-3);
  const double ratio = r1 / r2;
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("integral-form residual needs at least three snapshots") {
  const GridSpec g(1, 32, 2.0);
  SpectralWorkspace ws(g);
  StepScheme scheme;
  scheme.dt = 0.05;
  const Trajectory traj = solve(ws, random_field(g, 60), 1.0, scheme, {0.1});
  CHECK_THROWS_AS(mild_residual(ws, traj, 0.0, 0.1), InsufficientSnapshots);
}
