#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"

#include "aclab/clt_oracle.hpp"
#include "aclab/errors.hpp"
#include "aclab/rng.hpp"

using namespace aclab;

TEST_CASE("pairing counts: closed form, enumeration oracle, and overflow guard") {
  const long expect[6] = {1, 1, 3, 15, 105, 945};  // k = 0 unused
  for (int k = 1; k <= 5; ++k) CHECK(pairing_count(k) == expect[k]);
  for (int k = 1; k <= 6; ++k)
    CHECK(pairing_count(k) == pairing_count_by_enumeration(k));
  CHECK(pairing_count(12) > 0);
  CHECK_THROWS_AS(pairing_count(13), PairingOverflow);
  CHECK_THROWS_AS(pairing_count(0), std::invalid_argument);
}

TEST_CASE("gaussian quadrature reproduces normal moments") {
  const GaussHermiteRule rule = gauss_hermite(64);
  REQUIRE(rule.nodes.size() == 64);
  REQUIRE(rule.weights.size() == 64);
  double w_sum = 0, m1 = 0, m2 = 0, m4 = 0, m6 = 0;
  for (int i = 0; i < 64; ++i) {
    const double x = rule.nodes[i];
    const double w = rule.weights[i];
    w_sum += w;
    m1 += w * x;
    m2 += w * x * x;
    m4 += w * x * x * x * x;
    m6 += w * x * x * x * x * x * x;
  }
  CHECK(std::abs(w_sum - 1.0) < 1e-12);
  CHECK(std::abs(m1) < 1e-12);
  CHECK(std::abs(m2 - 1.0) < 1e-10);
  CHECK(std::abs(m4 - 3.0) < 1e-8);
  CHECK(std::abs(m6 - 15.0) < 1e-6);
}

TEST_CASE("transform map is odd and contracting") {
  const GridSpec g(1, 64, 8.0);
  SyntheticFieldSpec spec(g, MollifierSpec(1.0));
  spec.transform = SyntheticFieldSpec::Transform::ode_flow;
  spec.lambda = 1.0;
  for (double u : {-3.0, -0.7, 0.0, 0.4, 2.2}) {
    const double v = apply_transform(spec, u);
    CHECK(apply_transform(spec, -u) == doctest::Approx(-v).epsilon(1e-14));
    CHECK(std::abs(v) <= std::abs(u) + 1e-15);
    if (u != 0.0) CHECK(v * u > 0.0);  // sign preserved
  }
  SyntheticFieldSpec ident(g, MollifierSpec(1.0));
  for (double u : {-1.5, 0.3}) CHECK(apply_transform(ident, u) == u);
}

TEST_CASE("synthetic fields are centered with the planted integrated covariance") {
  // identity transform: integrated covariance = (kernel mass)^2 = 1
  const GridSpec g(1, 1024, 128.0);
  SyntheticFieldSpec spec(g, MollifierSpec(1.0));
  const Estimate s2 = sigma_sq_field(spec, 1024, 515, 2);
  CHECK(std::abs(s2.value - 1.0) < 4.5 * s2.se);
  CHECK(s2.se < 0.2);

  // the transformed field has strictly smaller integrated covariance
  SyntheticFieldSpec damped(g, MollifierSpec(1.0));
  damped.transform = SyntheticFieldSpec::Transform::ode_flow;
  damped.lambda = 4.0;
  const Estimate d2 = sigma_sq_field(damped, 1024, 515, 2);
  CHECK(d2.value < s2.value);
}

TEST_CASE("synthetic field realizations are stationary and short-range") {
  const GridSpec g(1, 512, 64.0);
  SpectralWorkspace ws(g);
  SyntheticFieldSpec spec(g, MollifierSpec(1.0));
  RngStream rng(808, 0);
  const ScalarField xi = sample_white_noise(g, rng);
  const ScalarField eta = synthetic_field(ws, spec, xi);
  CHECK(eta.size() == g.site_count());
  CHECK(all_finite(eta));
  // identity transform: eta = kernel * xi exactly
  const ScalarField direct = ws.convolve(xi, make_mollifier(spec.moll, g));
  double dev = 0.0;
  for (long i = 0; i < eta.size(); ++i) dev = std::max(dev, std::abs(eta[i] - direct[i]));
  CHECK(dev < 1e-10 * max_abs(eta));
}

TEST_CASE("moment-method table passes for a synthetic short-range field") {
  const GridSpec g(1, 1024, 128.0);
  SyntheticFieldSpec spec(g, MollifierSpec(1.0));
  const double w = 1.0;
  const auto phi = [w](double x) { return std::exp(-x * x / (2.0 * w * w)); };
  const double phi_norm_sq = w * std::sqrt(std::numbers::pi);
  const std::vector<double> ladder{0.5, 0.25};
  const CltVerdictTable table =
      clt_moment_test(spec, phi, phi_norm_sq, ladder, 2, 1024, 27182, 2, 4.0);

  CHECK(std::abs(table.sigma_sq.value - 1.0) < 4.5 * table.sigma_sq.se);
  CHECK(table.phi_norm_sq == doctest::Approx(phi_norm_sq));
  REQUIRE(table.rows.size() == 8);  // orders 1..4 at two rungs
  for (const CltMomentRow& row : table.rows) {
    if (row.order % 2 == 1) {
      CHECK(row.target == 0.0);
    } else {
      const int k = row.order / 2;
      const double expect = static_cast<double>(pairing_count(k)) *
                            std::pow(table.sigma_sq.value * phi_norm_sq, k);
      CHECK(row.target == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(row.value.se > 0.0);
  }
  CHECK(table.all_pass_smallest);
}

TEST_CASE("proximity clustering matches a brute-force transitive closure") {
  // fixed example: a chain of reachable points plus one outlier
  const std::vector<std::array<double, 3>> chain{
      {0.0, 0.0, 0.0}, {0.9, 0.0, 0.0}, {1.8, 0.0, 0.0}, {5.0, 5.0, 5.0}};
  const std::vector<int> labels = cluster_partition(chain, 1.0);
  CHECK(labels == std::vector<int>{0, 0, 0, 1});

  // randomized cross-check against an O(n^3) closure
  RngStream rng(4242, 0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i < 40; ++i)
      pts.push_back({2.0 * rng.uniform(), 2.0 * rng.uniform(), 2.0 * rng.uniform()});
    const double cutoff = 0.4;

    const int n = static_cast<int>(pts.size());
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double d2 = 0;
        for (int a = 0; a < 3; ++a) {
          const double d = pts[i][a] - pts[j][a];
          d2 += d * d;
        }
        reach[i][j] = d2 <= cutoff * cutoff;
      }
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (reach[i][k] && reach[k][j]) reach[i][j] = true;

    std::vector<int> expect(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
      if (expect[i] >= 0) continue;
      expect[i] = next;
      for (int j = i + 1; j < n; ++j)
        if (reach[i][j]) expect[j] = next;
      ++next;
    }
    CHECK(cluster_partition(pts, cutoff) == expect);
  }
}
