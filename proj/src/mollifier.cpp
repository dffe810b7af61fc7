#include "aclab/mollifier.hpp"

#include <cmath>
#include <vector>

namespace aclab {

namespace {

double bump(double r_over_w) {
  double s = r_over_w * r_over_w;
  if (s >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s));
}

struct SupportPoint {
  long index;
  double value;
};

// Unnormalized bump values on the sites inside the support ball around the
// origin, visited in deterministic index order.
std::vector<SupportPoint> support_points(const MollifierSpec& spec, const GridSpec& grid) {
  if (!(spec.width > 0.0))
    throw std::invalid_argument("make_mollifier: width must be positive");
  if (spec.width < 2.0 * grid.h)
    throw WidthUnresolvable("make_mollifier: support radius below two lattice cells");
  if (2.0 * spec.width > grid.L)
    throw std::invalid_argument("make_mollifier: support diameter exceeds the torus");

  int reach = static_cast<int>(std::floor(spec.width / grid.h));
  std::vector<SupportPoint> pts;
  std::array<int, 3> c{0, 0, 0};
  auto visit = [&](int i, int j, int l) {
    double r2 = 0.0;
    int off[3] = {i, j, l};
    for (int a = 0; a < grid.d; ++a) r2 += double(off[a]) * off[a];
    double r = grid.h * std::sqrt(r2);
    double val = bump(r / spec.width);
    if (val > 0.0) {
      c = {grid.wrap(i), grid.wrap(j), grid.wrap(l)};
      pts.push_back({grid.index(c), val});
    }
  };
  if (grid.d == 1) {
    for (int i = -reach; i <= reach; ++i) visit(i, 0, 0);
  } else if (grid.d == 2) {
    for (int i = -reach; i <= reach; ++i)
      for (int j = -reach; j <= reach; ++j) visit(i, j, 0);
  } else {
    for (int i = -reach; i <= reach; ++i)
      for (int j = -reach; j <= reach; ++j)
        for (int l = -reach; l <= reach; ++l) visit(i, j, l);
  }
  return pts;
}

double lattice_volume_element(const GridSpec& grid) {
  double hd = 1.0;
  for (int i = 0; i < grid.d; ++i) hd *= grid.h;
  return hd;
}

}  // namespace

ScalarField make_mollifier(const MollifierSpec& spec, const GridSpec& grid) {
  auto pts = support_points(spec, grid);
  double mass = 0.0;
  for (const auto& p : pts) mass += p.value;
  mass *= lattice_volume_element(grid);

  ScalarField f(grid, 0.0);
  for (const auto& p : pts) f.v[p.index] = p.value / mass;
  return f;
}

double initial_covariance(const MollifierSpec& spec, const GridSpec& grid,
                          const std::array<double, 3>& offset) {
  // C(x) = h^d * sum_y rho(y) rho(y - x); both factors vanish outside the
  // support, so sum only there. Offsets are rounded to the nearest site.
  auto pts = support_points(spec, grid);
  double mass = 0.0;
  for (const auto& p : pts) mass += p.value;
  mass *= lattice_volume_element(grid);

  std::array<int, 3> shift{0, 0, 0};
  for (int a = 0; a < grid.d; ++a) {
    double cells = offset[a] / grid.h;
    long r = std::lround(cells);
    if (std::fabs(cells - r) > 1e-9)
      throw std::invalid_argument("initial_covariance: offset must be a lattice vector");
    shift[a] = grid.wrap(static_cast<int>(r % grid.n));
  }

  // Dense lookup of the normalized kernel for the shifted factor.
  ScalarField rho(grid, 0.0);
  for (const auto& p : pts) rho.v[p.index] = p.value / mass;

  double s = 0.0;
  for (const auto& p : pts) {
    auto c = grid.coords(p.index);
    std::array<int, 3> cs{0, 0, 0};
    for (int a = 0; a < grid.d; ++a) cs[a] = grid.wrap(c[a] - shift[a]);
    s += (p.value / mass) * rho.v[grid.index(cs)];
  }
  return lattice_volume_element(grid) * s;
}

ScalarField initial_covariance_field(SpectralWorkspace& ws, const MollifierSpec& spec) {
  ScalarField rho = make_mollifier(spec, ws.grid());
  // The bump is even, so the reflected kernel equals the kernel itself.
  return ws.convolve(rho, rho);
}

ScalarField initial_condition(SpectralWorkspace& ws, const MollifierSpec& spec,
                              RngStream& rng) {
  ScalarField rho = make_mollifier(spec, ws.grid());
  ScalarField xi = sample_white_noise(ws.grid(), rng);
  return ws.convolve(rho, xi);
}

}  // namespace aclab
