#include "aclab/rescale.hpp"

#include <algorithm>
#include <cmath>

namespace aclab {

double effective_coupling(double lambda, double eps, int d) {
  if (lambda < 0.0) throw std::invalid_argument("effective_coupling: lambda >= 0 required");
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("effective_coupling: eps must lie in (0, 1]");
  if (d < 1 || d > 3) throw std::invalid_argument("effective_coupling: d must be 1..3");
  return lambda * std::pow(eps, d - 2);
}

void SimParams::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("SimParams: lambda must be >= 0");
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("SimParams: eps must lie in (0, 1]");
  if (!(base_width > 0.0)) throw std::invalid_argument("SimParams: base_width must be > 0");
  if (base_width < 2.0 * grid.h)
    throw WidthUnresolvable("SimParams: base width below two lattice cells");
  if (scaled_width() < 2.0 * grid.h)
    throw EpsilonUnresolvable("SimParams: eps * base_width below two lattice cells");
  if (!(scheme.dt > 0.0)) throw std::invalid_argument("SimParams: dt must be positive");
  if (s_max < 0) throw std::invalid_argument("SimParams: s_max must be >= 0");
  double prev = 0.0;
  for (double t : t_list) {
    if (!(t > 0.0)) throw std::invalid_argument("SimParams: observation times must be > 0");
    if (t <= prev)
      throw std::invalid_argument("SimParams: observation times must be strictly increasing");
    prev = t;
  }
}

double SimParams::lambda_eps() const {
  if (lambda_eps_cache_ < 0.0)
    lambda_eps_cache_ = effective_coupling(lambda, eps, grid.d);
  return lambda_eps_cache_;
}

std::vector<double> SimParams::snapshot_times() const {
  std::vector<double> ts = t_list;
  ts.push_back(0.0);
  const double e2 = eps * eps;
  for (int k = 1; k <= s_max; ++k) ts.push_back(k * e2);
  std::sort(ts.begin(), ts.end());
  std::vector<double> out;
  for (double t : ts)
    if (out.empty() || t - out.back() > Trajectory::kTimeTol) out.push_back(t);
  return out;
}

RescaledRun simulate_rescaled(SpectralWorkspace& ws, const SimParams& params,
                              RngStream& rng) {
  params.validate();
  require_same_grid(params.grid, ws.grid(), "simulate_rescaled");

  RescaledRun run;
  run.params = params;
  run.noise = sample_white_noise(params.grid, rng);
  ScalarField rho = make_mollifier(params.scaled_mollifier(), params.grid);
  run.init = ws.convolve(rho, run.noise);
  run.traj = solve(ws, run.init, params.lambda_eps(), params.scheme,
                   params.snapshot_times());
  return run;
}

TestFunction make_test_function(const GridSpec& grid, TestFunction::Kind kind,
                                const std::array<double, 3>& center, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("make_test_function: width must be > 0");
  TestFunction phi;
  phi.kind = kind;
  phi.center = center;
  phi.width = width;
  phi.field = ScalarField(grid, 0.0);

  const long n = grid.site_count();
  for (long i = 0; i < n; ++i) {
    auto c = grid.coords(i);
    double r2 = 0.0;
    for (int a = 0; a < grid.d; ++a) {
      double dx = grid.min_image(c[a] * grid.h - center[a]);
      r2 += dx * dx;
    }
    if (kind == TestFunction::Kind::gaussian) {
      phi.field.v[i] = std::exp(-r2 / (2.0 * width * width));
    } else {
      double s = r2 / (width * width);
      phi.field.v[i] = s >= 1.0 ? 0.0 : std::exp(-1.0 / (1.0 - s));
    }
  }
  phi.norm_sq = l2_norm_sq(phi.field);
  return phi;
}

double observable(const Trajectory& traj, double t, const TestFunction& phi) {
  return inner_product(traj.at_time(t), phi.field);
}

ScalarField picard_x(SpectralWorkspace& ws, const RescaledRun& run, double t) {
  if (t < 0.0) throw std::invalid_argument("picard_x: t must be >= 0");
  if (t == 0.0) {
    ScalarField copy = run.init;
    return copy;
  }
  return ws.heat(run.init, t);
}

namespace {
std::vector<size_t> shared_nodes(const Trajectory& f, const Trajectory& g,
                                 const Trajectory& h, double t) {
  if (f.times.size() != g.times.size() || f.times.size() != h.times.size())
    throw SnapshotMismatch("picard_n: trajectories store different snapshot counts");
  for (size_t i = 0; i < f.times.size(); ++i) {
    if (std::fabs(f.times[i] - g.times[i]) > Trajectory::kTimeTol ||
        std::fabs(f.times[i] - h.times[i]) > Trajectory::kTimeTol)
      throw SnapshotMismatch("picard_n: snapshot grids differ");
  }
  std::vector<size_t> idx;
  for (size_t i = 0; i < f.times.size(); ++i)
    if (f.times[i] <= t + Trajectory::kTimeTol) idx.push_back(i);
  if (idx.size() < 2)
    throw InsufficientSnapshots("picard_n: need at least two snapshots up to t");
  if (std::fabs(f.times[idx.back()] - t) > Trajectory::kTimeTol)
    throw InsufficientSnapshots("picard_n: no snapshot stored at t");
  return idx;
}
}  // namespace

ScalarField picard_n(SpectralWorkspace& ws, const Trajectory& f, const Trajectory& g,
                     const Trajectory& h, double t, double eps, int d) {
  auto idx = shared_nodes(f, g, h, t);
  const double pref = std::pow(eps, d - 2);

  ScalarField acc(f.snaps.front().grid, t);
  for (size_t j = 0; j < idx.size(); ++j) {
    const double s = f.times[idx[j]];
    double w = 0.0;  // non-uniform trapezoid weight
    if (j > 0) w += 0.5 * (f.times[idx[j]] - f.times[idx[j - 1]]);
    if (j + 1 < idx.size()) w += 0.5 * (f.times[idx[j + 1]] - f.times[idx[j]]);
    ScalarField prod = f.snaps[idx[j]];
    const ScalarField& gf = g.snaps[idx[j]];
    const ScalarField& hf = h.snaps[idx[j]];
    for (long i = 0; i < prod.size(); ++i) prod.v[i] *= gf.v[i] * hf.v[i];
    ScalarField prop = (t - s > 0.0) ? ws.heat(prod, t - s) : prod;
    axpy(acc, pref * w, prop);
  }
  acc.time = t;
  return acc;
}

double scaled_spatial_average(const ScalarField& f) {
  return std::pow(f.grid.L, 0.5 * f.grid.d) * mean_value(f);
}

}  // namespace aclab
