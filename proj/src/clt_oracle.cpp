#include "aclab/clt_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aclab/errors.hpp"

namespace aclab {

long pairing_count(int k) {
  if (k < 1) throw std::invalid_argument("pairing count needs k >= 1");
  if (k > 12) throw PairingOverflow("pairing count exact only up to k = 12");
  long v = 1;
  for (int m = 3; m <= 2 * k - 1; m += 2) v *= m;
  return v;
}

namespace {

long enumerate_pairings(std::vector<bool>& used) {
  const int n = static_cast<int>(used.size());
  int first = -1;
  for (int i = 0; i < n; ++i) {
    if (!used[i]) {
      first = i;
      break;
    }
  }
  if (first < 0) return 1;
  used[first] = true;
  long total = 0;
  for (int j = first + 1; j < n; ++j) {
    if (used[j]) continue;
    used[j] = true;
    total += enumerate_pairings(used);
    used[j] = false;
  }
  used[first] = false;
  return total;
}

}  // namespace

long pairing_count_by_enumeration(int k) {
  if (k < 1 || k > 8)
    throw std::invalid_argument("enumeration oracle supports 1 <= k <= 8");
  std::vector<bool> used(2 * k, false);
  return enumerate_pairings(used);
}

namespace {

// Orthonormal Hermite polynomials for the standard normal weight:
// p0 = 1, p1 = x, p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1).
// Returns p_n(x); prev receives p_{n-1}(x).
double hermite_pn(int n, double x, double* prev) {
  double pkm1 = 0.0, pk = 1.0;
  for (int k = 0; k < n; ++k) {
    const double pkp1 = (x * pk - std::sqrt(static_cast<double>(k)) * pkm1) /
                        std::sqrt(static_cast<double>(k + 1));
    pkm1 = pk;
    pk = pkp1;
  }
  if (prev) *prev = pkm1;
  return pk;
}

}  // namespace

GaussHermiteRule gauss_hermite(int n) {
  if (n < 2) throw std::invalid_argument("quadrature needs at least two nodes");
  const double edge = 2.0 * std::sqrt(static_cast<double>(n)) + 1.0;
  const int scan = 50 * n;
  GaussHermiteRule rule;
  rule.nodes.reserve(n);
  rule.weights.reserve(n);

  double x_prev = -edge;
  double f_prev = hermite_pn(n, x_prev, nullptr);
  for (int i = 1; i <= scan; ++i) {
    const double x_next = -edge + 2.0 * edge * i / scan;
    const double f_next = hermite_pn(n, x_next, nullptr);
    if (f_prev == 0.0 || f_prev * f_next < 0.0) {
      // Safeguarded Newton inside the bracket.
      double lo = x_prev, hi = x_next, flo = f_prev;
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 80; ++it) {
        double pm1 = 0.0;
        const double f = hermite_pn(n, x, &pm1);
        const double df = std::sqrt(static_cast<double>(n)) * pm1;
        if (f == 0.0) break;
        if ((flo < 0.0) == (f < 0.0)) {
          lo = x;
          flo = f;
        } else {
          hi = x;
        }
        double step = df != 0.0 ? f / df : 0.0;
        double xn = x - step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) < 1e-15 * (1.0 + std::abs(x))) {
          x = xn;
          break;
        }
        x = xn;
      }
      rule.nodes.push_back(x);
    }
    x_prev = x_next;
    f_prev = f_next;
  }
  if (static_cast<int>(rule.nodes.size()) != n)
    throw std::logic_error("quadrature root scan missed nodes");
  for (double x : rule.nodes) {
    double csum = 0.0;
    double pkm1 = 0.0, pk = 1.0;
    csum += pk * pk;
    for (int k = 0; k < n - 1; ++k) {
      const double pkp1 = (x * pk - std::sqrt(static_cast<double>(k)) * pkm1) /
                          std::sqrt(static_cast<double>(k + 1));
      pkm1 = pk;
      pk = pkp1;
      csum += pk * pk;
    }
    rule.weights.push_back(1.0 / csum);
  }
  return rule;
}

double OdeLayerMatrix::correlation() const {
  const double denom = std::sqrt(zz * phiphi);
  if (denom <= 0.0) throw std::logic_error("degenerate reaction-layer covariance");
  return zphi / denom;
}

namespace {

// Trapezoidal Gaussian expectation of the layer integrands, normalized by the
// discrete mass so constants integrate exactly. The flow map has complex poles
// at distance 1/sqrt(2 lambda) from the real axis, so the step size tracks
// that strip half-width; the trapezoid rule on a Gaussian-weighted analytic
// integrand is then geometrically accurate, and stays robust for strong
// couplings where fixed-order Gauss-Hermite rules stall.
OdeLayerMatrix ode_layer_with_step(double lambda, double v0, double h) {
  const double radius = 12.0 * std::sqrt(v0);
  const long half = static_cast<long>(std::ceil(radius / h));
  double mass = 0.0;
  OdeLayerMatrix m;
  for (long k = -half; k <= half; ++k) {
    const double z = h * static_cast<double>(k);
    const double w = std::exp(-0.5 * z * z / v0);
    const double phi = z / std::sqrt(1.0 + 2.0 * lambda * z * z);
    mass += w;
    m.zz += w * z * z;
    m.zphi += w * z * phi;
    m.phiphi += w * phi * phi;
  }
  m.zz /= mass;
  m.zphi /= mass;
  m.phiphi /= mass;
  return m;
}

}  // namespace

OdeLayerMatrix ode_layer_predictor(double lambda, double v0) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("coupling must be finite and nonnegative");
  if (!(v0 > 0.0) || !std::isfinite(v0))
    throw std::invalid_argument("initial variance must be positive and finite");
  const double sd = std::sqrt(v0);
  const double strip = lambda > 0.0 ? 1.0 / std::sqrt(2.0 * lambda) : sd;
  const double h = M_PI * std::min(strip, sd) / 16.0;
  const OdeLayerMatrix a = ode_layer_with_step(lambda, v0, h);
  const OdeLayerMatrix b = ode_layer_with_step(lambda, v0, 0.5 * h);
  const double scale = std::max(1.0, std::abs(b.phiphi));
  if (std::abs(a.zz - b.zz) > 1e-10 * std::max(1.0, std::abs(b.zz)) ||
      std::abs(a.zphi - b.zphi) > 1e-10 * std::max(1.0, std::abs(b.zphi)) ||
      std::abs(a.phiphi - b.phiphi) > 1e-10 * scale)
    throw std::logic_error("step halving moved the reaction-layer quadrature");
  return b;
}

double apply_transform(const SyntheticFieldSpec& spec, double u) {
  switch (spec.transform) {
    case SyntheticFieldSpec::Transform::identity:
      return u;
    case SyntheticFieldSpec::Transform::ode_flow:
      return u / std::sqrt(1.0 + 2.0 * spec.lambda * u * u);
    case SyntheticFieldSpec::Transform::cubic_damped:
      return u / (1.0 + spec.lambda * u * u);
  }
  throw std::logic_error("unknown transform");
}

ScalarField synthetic_field(SpectralWorkspace& ws, const SyntheticFieldSpec& spec,
                            const ScalarField& noise) {
  const ScalarField rho = make_mollifier(spec.moll, spec.grid);
  ScalarField eta = ws.convolve(rho, noise);
  for (long i = 0; i < eta.size(); ++i) eta[i] = apply_transform(spec, eta[i]);
  return eta;
}

Estimate sigma_sq_field(const SyntheticFieldSpec& spec, long n_replicas,
                        std::uint64_t master_seed, int workers) {
  EnsembleOptions opts;
  opts.workers = workers;
  EnsembleAccumulator acc = ensemble_map(
      spec.grid, n_replicas, {"avg"}, {}, master_seed, opts,
      [&](long, RngStream& rng, SpectralWorkspace& ws, std::vector<double>& out) {
        const ScalarField noise = sample_white_noise(spec.grid, rng);
        out[0] = scaled_spatial_average(synthetic_field(ws, spec, noise));
      });
  return acc.second_moment_est(0);
}

CltVerdictTable clt_moment_test(const SyntheticFieldSpec& spec,
                                const std::function<double(double)>& phi,
                                double phi_norm_sq,
                                const std::vector<double>& eps_ladder, int k_max,
                                long n_replicas, std::uint64_t master_seed,
                                int workers, double z_threshold) {
  if (spec.grid.d != 1)
    throw std::invalid_argument("moment-method check runs on a one-dimensional torus");
  if (k_max < 1 || k_max > 4)
    throw std::invalid_argument("moment orders supported up to k_max = 4");
  if (eps_ladder.empty()) throw std::invalid_argument("eps ladder must be non-empty");
  for (double e : eps_ladder) {
    if (!(e > 0.0) || !std::isfinite(e))
      throw std::invalid_argument("eps values must be positive and finite");
  }
  if (!(phi_norm_sq > 0.0))
    throw std::invalid_argument("test profile norm must be positive");

  const GridSpec& g = spec.grid;
  const int ne = static_cast<int>(eps_ladder.size());
  // Pairing weights eps^{1/2} h phi(eps x_y) per ladder point, precomputed.
  std::vector<std::vector<double>> w(ne, std::vector<double>(g.site_count()));
  std::vector<std::string> names;
  for (int j = 0; j < ne; ++j) {
    const double e = eps_ladder[j];
    for (long m = 0; m < g.site_count(); ++m) {
      const double x = (m <= g.n / 2 ? m : m - g.n) * g.h;
      w[j][m] = std::sqrt(e) * g.h * phi(e * x);
    }
    names.push_back("pair_eps" + std::to_string(j));
  }

  EnsembleOptions opts;
  opts.workers = workers;
  EnsembleAccumulator acc = ensemble_map(
      g, n_replicas, names, {}, master_seed, opts,
      [&](long, RngStream& rng, SpectralWorkspace& ws, std::vector<double>& out) {
        const ScalarField noise = sample_white_noise(g, rng);
        const ScalarField eta = synthetic_field(ws, spec, noise);
        for (int j = 0; j < ne; ++j) {
          double s = 0.0;
          for (long m = 0; m < eta.size(); ++m) s += eta[m] * w[j][m];
          out[j] = s;
        }
      });

  CltVerdictTable table;
  table.phi_norm_sq = phi_norm_sq;
  table.sigma_sq = sigma_sq_field(spec, n_replicas, mix3(master_seed, 0x5153, 0),
                                  workers);
  if (table.sigma_sq.value <= 0.0)
    throw std::logic_error("integrated covariance estimate collapsed");

  int smallest = 0;
  for (int j = 1; j < ne; ++j) {
    if (eps_ladder[j] < eps_ladder[smallest]) smallest = j;
  }
  table.all_pass_smallest = true;
  for (int j = 0; j < ne; ++j) {
    for (int p = 1; p <= 2 * k_max; ++p) {
      CltMomentRow row;
      row.eps = eps_ladder[j];
      row.order = p;
      row.value = acc.raw_moment_est(j, p);
      double se = row.value.se;
      if (p % 2 == 0) {
        const int k = p / 2;
        const double base = table.sigma_sq.value * phi_norm_sq;
        row.target = pairing_count(k) * std::pow(base, k);
        // Fold the sigma^2 uncertainty into the target via the delta method.
        const double dtarget = k * row.target / table.sigma_sq.value;
        se = std::sqrt(se * se + dtarget * dtarget * table.sigma_sq.se *
                                     table.sigma_sq.se);
      }
      row.z = (row.value.value - row.target) / se;
      row.pass = std::abs(row.z) <= z_threshold;
      if (j == smallest) table.all_pass_smallest = table.all_pass_smallest && row.pass;
      table.rows.push_back(row);
    }
  }
  return table;
}

std::vector<int> cluster_partition(const std::vector<std::array<double, 3>>& points,
                                   double cutoff) {
  if (!(cutoff >= 0.0) || !std::isfinite(cutoff))
    throw std::invalid_argument("cutoff must be finite and nonnegative");
  const int n = static_cast<int>(points.size());
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double diff = points[i][a] - points[j][a];
        d2 += diff * diff;
      }
      if (d2 <= cutoff * cutoff) {
        const int ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<int> label(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (label[r] < 0) label[r] = next++;
    label[i] = label[r];
  }
  return label;
}

}  // namespace aclab
