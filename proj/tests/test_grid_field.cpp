#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"

#include "aclab/errors.hpp"
#include "aclab/field.hpp"
#include "aclab/grid.hpp"
#include "aclab/rng.hpp"

using namespace aclab;

TEST_CASE("grid constructor validates its arguments") {
  CHECK_THROWS_AS(GridSpec(0, 32, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(4, 32, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(2, 48, 1.0), std::invalid_argument);  // not a power of two
  CHECK_THROWS_AS(GridSpec(2, 32, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(2, 32, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(3, 1024, 1.0), std::invalid_argument);  // over the site cap

  const GridSpec g(3, 16, 2.0);
  CHECK(g.site_count() == 16L * 16 * 16);
  CHECK(g.h == doctest::Approx(0.125).epsilon(1e-15));
}

TEST_CASE("site index and coords are inverse bijections") {
  const GridSpec g(3, 8, 4.0);
  std::set<long> seen;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k) {
        const long idx = g.index({i, j, k});
        CHECK(idx >= 0);
        CHECK(idx < g.site_count());
        seen.insert(idx);
        const auto c = g.coords(idx);
        CHECK(c[0] == i);
        CHECK(c[1] == j);
        CHECK(c[2] == k);
      }
  CHECK(static_cast<long>(seen.size()) == g.site_count());
}

TEST_CASE("index wraps periodic coordinates") {
  const GridSpec g(2, 8, 4.0);
  CHECK(g.wrap(-1) == 7);
  CHECK(g.wrap(8) == 0);
  CHECK(g.wrap(17) == 1);
  CHECK(g.index({-1, 3, 0}) == g.index({7, 3, 0}));
  CHECK(g.index({9, -8, 0}) == g.index({1, 0, 0}));
}

TEST_CASE("minimal image maps differences into (-L/2, L/2]") {
  const GridSpec g(1, 8, 4.0);
  CHECK(g.min_image(3.0) == doctest::Approx(-1.0));
  CHECK(g.min_image(-3.0) == doctest::Approx(1.0));
  CHECK(g.min_image(0.5) == doctest::Approx(0.5));
  CHECK(g.min_image(2.0) == doctest::Approx(2.0));   // boundary stays +L/2
  CHECK(g.min_image(-2.0) == doctest::Approx(2.0));  // -L/2 folds to +L/2
}

TEST_CASE("site distance agrees with a brute-force search over images") {
  const GridSpec g(3, 4, 2.0);
  RngStream rng(11, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const long a = static_cast<long>(rng.uniform() * g.site_count());
    const long b = static_cast<long>(rng.uniform() * g.site_count());
    const auto ca = g.coords(a);
    const auto cb = g.coords(b);
    double best = 1e300;
    for (int ix = -1; ix <= 1; ++ix)
      for (int iy = -1; iy <= 1; ++iy)
        for (int iz = -1; iz <= 1; ++iz) {
          const double dx = (ca[0] - cb[0]) * g.h + ix * g.L;
          const double dy = (ca[1] - cb[1]) * g.h + iy * g.L;
          const double dz = (ca[2] - cb[2]) * g.h + iz * g.L;
          best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
        }
    CHECK(g.site_distance(a, b) == doctest::Approx(best).epsilon(1e-12));
    CHECK(g.site_distance(a, b) == doctest::Approx(g.site_distance(b, a)));
  }
}

TEST_CASE("require_same_grid rejects mismatches") {
  const GridSpec a(2, 8, 4.0);
  const GridSpec b(2, 8, 2.0);
  CHECK_NOTHROW(require_same_grid(a, a, "test"));
  CHECK_THROWS_AS(require_same_grid(a, b, "test"), GridMismatch);
}

TEST_CASE("field reductions and inner product carry the lattice measure") {
  const GridSpec g(1, 8, 4.0);  // h = 0.5
  ScalarField f(g), q(g);
  for (long i = 0; i < f.size(); ++i) {
    f[i] = static_cast<double>(i + 1);
    q[i] = 2.0;
  }
  CHECK(mean_value(f) == doctest::Approx(4.5));
  CHECK(max_abs(f) == doctest::Approx(8.0));
  CHECK(min_value(f) == doctest::Approx(1.0));
  CHECK(max_value(f) == doctest::Approx(8.0));
  // h * sum f*q = 0.5 * 2 * 36 = 36
  CHECK(inner_product(f, q) == doctest::Approx(36.0).epsilon(1e-14));
  CHECK(l2_norm_sq(q) == doctest::Approx(0.5 * 4.0 * 8).epsilon(1e-14));

  ScalarField other(GridSpec(1, 16, 4.0));
  CHECK_THROWS_AS(inner_product(f, other), GridMismatch);
}

TEST_CASE("axpy and arithmetic operators") {
  const GridSpec g(1, 4, 1.0);
  ScalarField a(g), b(g);
  for (long i = 0; i < 4; ++i) {
    a[i] = i;
    b[i] = 10.0 + i;
  }
  ScalarField s = a + b;
  ScalarField d = a - b;
  ScalarField m = 3.0 * a;
  for (long i = 0; i < 4; ++i) {
    CHECK(s[i] == doctest::Approx(2.0 * i + 10.0));
    CHECK(d[i] == doctest::Approx(-10.0));
    CHECK(m[i] == doctest::Approx(3.0 * i));
  }
  axpy(a, -2.0, b);  // a <- a - 2b
  for (long i = 0; i < 4; ++i) CHECK(a[i] == doctest::Approx(i - 2.0 * (10.0 + i)));
}

TEST_CASE("all_finite flags poisoned fields") {
  ScalarField f(GridSpec(1, 4, 1.0));
  CHECK(all_finite(f));
  f[2] = std::nan("");
  CHECK_FALSE(all_finite(f));
}

TEST_CASE("white noise has per-site variance 1/h^d") {
  const GridSpec g(1, 4096, 8.0);  // h = 1/512, variance 512
  RngStream rng(77, 0);
  const ScalarField xi = sample_white_noise(g, rng);
  const double n = static_cast<double>(xi.size());
  double m1 = 0.0, m2 = 0.0;
  for (long i = 0; i < xi.size(); ++i) {
    m1 += xi[i];
    m2 += xi[i] * xi[i];
  }
  m1 /= n;
  m2 /= n;
  const double var_site = 512.0;
  // mean of n iid values: SE = sqrt(var/n)
  CHECK(std::abs(m1) < 4.5 * std::sqrt(var_site / n));
  // sample second moment: SE = var * sqrt(2/n)
  CHECK(std::abs(m2 - var_site) < 4.5 * var_site * std::sqrt(2.0 / n));
}

TEST_CASE("rng streams are replayable pure functions of their key") {
  RngStream a(123, 7);
  RngStream b(123, 7);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());

  // replay after reset
  std::vector<double> first;
  RngStream c(5, 1);
  for (int i = 0; i < 16; ++i) first.push_back(c.normal());
  c.reset();
  for (int i = 0; i < 16; ++i) CHECK(c.normal() == first[i]);

  // distinct replicas decorrelate
  RngStream d(123, 8);
  int coincidences = 0;
  RngStream a2(123, 7);
  for (int i = 0; i < 100; ++i)
    if (a2.normal() == d.normal()) ++coincidences;
  CHECK(coincidences == 0);
}

TEST_CASE("fill_normals matches repeated single draws") {
  RngStream a(9, 3);
  RngStream b(9, 3);
  std::vector<double> buf(33);
  a.fill_normals(buf.data(), 33);
  for (int i = 0; i < 33; ++i) CHECK(buf[i] == b.normal());
}

TEST_CASE("uniforms live strictly inside (0,1) and normals pass moment checks") {
  RngStream rng(2024, 0);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  const long n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (long i = 0; i < n; ++i) {
    const double z = rng.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 4.5 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(m2 - 1.0) < 4.5 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 4.5 * std::sqrt(96.0 / n));
}

TEST_CASE("mix3 responds to every key word") {
  const std::uint64_t base = mix3(1, 2, 3);
  CHECK(base != mix3(2, 2, 3));
  CHECK(base != mix3(1, 3, 3));
  CHECK(base != mix3(1, 2, 4));
  CHECK(mix3(1, 2, 3) == base);  // pure function
}
