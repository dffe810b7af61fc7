#include <cmath>
#include <vector>

#include "doctest.h"

#include "aclab/errors.hpp"
#include "aclab/mollifier.hpp"
#include "aclab/rescale.hpp"
#include "aclab/rng.hpp"
#include "aclab/spectral.hpp"

using namespace aclab;

namespace {

SimParams small_params() {
  SimParams p;
  p.grid = GridSpec(1, 128, 8.0);
  p.lambda = 0.0;
  p.eps = 0.5;
  p.base_width = 1.0;
  p.scheme.dt = 0.01;
  p.t_list = {0.25};
  p.s_max = 0;
  return p;
}

double sup_diff(const ScalarField& a, const ScalarField& b) {
  double dev = 0.0;
  for (long i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
  return dev;
}

}  // namespace

TEST_CASE("effective coupling carries the eps^(d-2) weakening") {
  CHECK(effective_coupling(2.0, 0.5, 3) == doctest::Approx(1.0));
  CHECK(effective_coupling(2.0, 0.5, 2) == doctest::Approx(2.0));
  CHECK(effective_coupling(2.0, 0.5, 1) == doctest::Approx(4.0));
  CHECK(effective_coupling(0.0, 0.25, 3) == 0.0);
  CHECK_THROWS_AS(effective_coupling(-1.0, 0.5, 3), std::invalid_argument);
}

TEST_CASE("parameter validation polices eps and resolvability") {
  SimParams p = small_params();
  CHECK_NOTHROW(p.validate());

  p.eps = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.eps = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  // scaled width below two lattice cells cannot be resolved
  p = small_params();
  p.eps = 0.1;  // width 0.1 vs h = 1/16
  CHECK_THROWS_AS(p.validate(), EpsilonUnresolvable);

  p = small_params();
  p.lambda = -0.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = small_params();
  p.scheme.dt = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = small_params();
  p.t_list = {};
  CHECK_NOTHROW(p.validate());  // purely microscopic runs are legal
}

TEST_CASE("snapshot plan merges observation times with the microscopic ladder") {
  SimParams p = small_params();
  p.t_list = {0.25, 0.5};
  p.s_max = 2;  // eps^2 = 0.25: micro times {0.25, 0.5} coincide with t_list
  const std::vector<double> times = p.snapshot_times();
  REQUIRE(times.size() == 3);
  CHECK(times[0] == 0.0);
  CHECK(times[1] == doctest::Approx(0.25));
  CHECK(times[2] == doctest::Approx(0.5));

  p.s_max = 3;
  const std::vector<double> more = p.snapshot_times();
  REQUIRE(more.size() == 4);
  CHECK(more[3] == doctest::Approx(0.75));
}

TEST_CASE("scaled mollifier narrows with eps") {
  SimParams p = small_params();
  CHECK(p.scaled_width() == doctest::Approx(0.5));
  CHECK(p.scaled_mollifier().width == doctest::Approx(0.5));
  CHECK(p.lambda_eps() == doctest::Approx(effective_coupling(p.lambda, p.eps, p.grid.d)));
}

TEST_CASE("a rescaled run starts from kernel-smoothed noise") {
  const SimParams p = small_params();
  SpectralWorkspace ws(p.grid);
  RngStream rng(7, 0);
  const RescaledRun run = simulate_rescaled(ws, p, rng);

  const ScalarField kernel = make_mollifier(p.scaled_mollifier(), p.grid);
  const ScalarField expect = ws.convolve(run.noise, kernel);
  CHECK(sup_diff(run.init, expect) < 1e-10 * max_abs(run.init));
  CHECK(run.traj.times.front() == 0.0);
  CHECK(sup_diff(run.traj.snaps.front(), run.init) == 0.0);
}

TEST_CASE("zero-coupling rescaled run matches the pure heat flow") {
  const SimParams p = small_params();
  SpectralWorkspace ws(p.grid);
  RngStream rng(11, 0);
  const RescaledRun run = simulate_rescaled(ws, p, rng);
  const ScalarField ref = ws.heat(run.init, 0.25);
  CHECK(sup_diff(run.traj.at_time(0.25), ref) < 1e-10);

  // the interaction-free comparator equals the same heat flow
  const ScalarField px = picard_x(ws, run, 0.25);
  CHECK(sup_diff(px, ref) < 1e-12);
}

TEST_CASE("test functions expose their lattice norm and pair against snapshots") {
  const SimParams p = small_params();
  SpectralWorkspace ws(p.grid);
  const TestFunction phi =
      make_test_function(p.grid, TestFunction::Kind::gaussian, {0.0, 0.0, 0.0}, 0.7);
  CHECK(phi.field.v[0] == doctest::Approx(1.0));  // peak at the center
  CHECK(phi.norm_sq == doctest::Approx(l2_norm_sq(phi.field)).epsilon(1e-13));

  RngStream rng(13, 0);
  const RescaledRun run = simulate_rescaled(ws, p, rng);
  const double direct = inner_product(run.traj.at_time(0.25), phi.field);
  CHECK(observable(run.traj, 0.25, phi) == doctest::Approx(direct).epsilon(1e-14));

  const TestFunction bump =
      make_test_function(p.grid, TestFunction::Kind::bump, {1.0, 0.0, 0.0}, 0.5);
  for (long i = 0; i < bump.field.size(); ++i) {
    const double x = p.grid.min_image(i * p.grid.h - 1.0);
    if (std::abs(x) > 0.5) CHECK(bump.field[i] == 0.0);
  }
}

TEST_CASE("scaled spatial average carries the L^(d/2) weight") {
  const GridSpec g(1, 128, 8.0);
  ScalarField f(g);
  for (long i = 0; i < f.size(); ++i) f[i] = 2.0;
  CHECK(scaled_spatial_average(f) == doctest::Approx(std::sqrt(8.0) * 2.0).epsilon(1e-14));
}

TEST_CASE("cubic Duhamel term is exact for constant snapshots") {
  const GridSpec g(1, 32, 4.0);
  SpectralWorkspace ws(g);
  const double c = 0.7;
  Trajectory traj;
  traj.lambda = 1.0;
  for (int k = 0; k <= 5; ++k) {
    traj.times.push_back(0.1 * k);
    ScalarField f(g, 0.1 * k);
    for (long i = 0; i < f.size(); ++i) f[i] = c;
    traj.snaps.push_back(f);
  }
  const double eps = 0.5;
  // heat of a constant is itself, so the integral is t * c^3 and the
  // prefactor eps^(d-2) = 1/eps in one dimension
  const ScalarField n3 = picard_n(ws, traj, traj, traj, 0.5, eps, 1);
  for (long i = 0; i < n3.size(); ++i)
    CHECK(n3[i] == doctest::Approx(0.5 * c * c * c / eps).epsilon(1e-12));
}

TEST_CASE("cubic Duhamel term rejects mismatched or short snapshot grids") {
  const GridSpec g(1, 32, 4.0);
  SpectralWorkspace ws(g);
  Trajectory a, b;
  for (int k = 0; k <= 3; ++k) {
    a.times.push_back(0.1 * k);
    a.snaps.emplace_back(g, 0.1 * k);
  }
  for (int k = 0; k <= 3; ++k) {
    b.times.push_back(0.15 * k);
    b.snaps.emplace_back(g, 0.15 * k);
  }
  CHECK_THROWS_AS(picard_n(ws, a, a, b, 0.3, 0.5, 1), SnapshotMismatch);
  CHECK_THROWS_AS(picard_n(ws, a, a, a, 0.05, 0.5, 1), InsufficientSnapshots);
}
