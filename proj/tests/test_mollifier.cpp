#include <array>
#include <cmath>

#include "doctest.h"

#include "aclab/errors.hpp"
#include "aclab/mollifier.hpp"
#include "aclab/rng.hpp"
#include "aclab/spectral.hpp"

using namespace aclab;

TEST_CASE("mollifier has unit lattice mass and compact support") {
  const GridSpec g(1, 256, 8.0);  // h = 1/32
  const MollifierSpec spec(1.0);
  const ScalarField k = make_mollifier(spec, g);
  double mass = 0.0;
  for (long i = 0; i < k.size(); ++i) mass += k[i];
  mass *= g.h;
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));

  // zero outside the support radius, positive strictly inside
  for (long i = 0; i < k.size(); ++i) {
    const double x = std::abs(g.min_image(i * g.h));
    if (x > spec.width) CHECK(k[i] == 0.0);
    if (x < 0.8 * spec.width) CHECK(k[i] > 0.0);
  }
  // even symmetry about the origin site
  for (int i = 1; i < 128; ++i)
    CHECK(k.v[i] == doctest::Approx(k.v[256 - i]).epsilon(1e-13));
}

TEST_CASE("unresolvable widths are rejected") {
  const GridSpec g(1, 32, 32.0);  // h = 1
  CHECK_THROWS_AS(make_mollifier(MollifierSpec(1.0), g), WidthUnresolvable);
  CHECK_NOTHROW(make_mollifier(MollifierSpec(2.5), g));
}

TEST_CASE("initial covariance equals the kernel autocorrelation") {
  const GridSpec g(1, 256, 8.0);
  SpectralWorkspace ws(g);
  const MollifierSpec spec(1.0);
  const ScalarField k = make_mollifier(spec, g);

  // C(0) is the squared lattice L2 norm of the kernel
  const double c0 = initial_covariance(spec, g, {0.0, 0.0, 0.0});
  CHECK(c0 == doctest::Approx(l2_norm_sq(k)).epsilon(1e-12));

  // agrees with the spectral autocorrelation field at several offsets
  const ScalarField cov = initial_covariance_field(ws, spec);
  for (int off : {0, 3, 11, 29, 61}) {
    const double direct = initial_covariance(spec, g, {off * g.h, 0.0, 0.0});
    CHECK(direct == doctest::Approx(cov.v[off]).epsilon(1e-10));
  }

  // exactly zero once the supports are disjoint
  CHECK(initial_covariance(spec, g, {2.5, 0.0, 0.0}) == 0.0);
}

TEST_CASE("smoothed noise realizes the kernel covariance") {
  const GridSpec g(1, 512, 16.0);
  SpectralWorkspace ws(g);
  const MollifierSpec spec(1.0);
  const double c0 = initial_covariance(spec, g, {0.0, 0.0, 0.0});

  const int reps = 256;
  double sum = 0.0, sum_sq = 0.0;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(314, r);
    const ScalarField u0 = initial_condition(ws, spec, rng);
    double site_avg = 0.0;
    for (long i = 0; i < u0.size(); ++i) site_avg += u0[i] * u0[i];
    site_avg /= static_cast<double>(u0.size());
    sum += site_avg;
    sum_sq += site_avg * site_avg;
  }
  const double mean = sum / reps;
  const double var = sum_sq / reps - mean * mean;
  const double se = std::sqrt(var / reps);
  CHECK(std::abs(mean - c0) < 4.5 * se);
}

TEST_CASE("smoothed noise equals kernel convolved with the same noise") {
  const GridSpec g(1, 128, 8.0);
  SpectralWorkspace ws(g);
  const MollifierSpec spec(1.0);
  RngStream rng_a(99, 0);
  RngStream rng_b(99, 0);
  const ScalarField u0 = initial_condition(ws, spec, rng_a);
  const ScalarField xi = sample_white_noise(g, rng_b);
  const ScalarField k = make_mollifier(spec, g);
  const ScalarField conv = ws.convolve(xi, k);
  double dev = 0.0;
  for (long i = 0; i < u0.size(); ++i) dev = std::max(dev, std::abs(u0[i] - conv[i]));
  CHECK(dev < 1e-10 * max_abs(u0));
}
