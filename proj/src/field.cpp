#include "aclab/field.hpp"

#include <algorithm>
#include <cmath>

namespace aclab {

bool all_finite(const ScalarField& f) {
  for (double x : f.v)
    if (!std::isfinite(x)) return false;
  return true;
}

double max_abs(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.v) m = std::max(m, std::fabs(x));
  return m;
}

double min_value(const ScalarField& f) {
  double m = f.v.empty() ? 0.0 : f.v[0];
  for (double x : f.v) m = std::min(m, x);
  return m;
}

double max_value(const ScalarField& f) {
  double m = f.v.empty() ? 0.0 : f.v[0];
  for (double x : f.v) m = std::max(m, x);
  return m;
}

double mean_value(const ScalarField& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  return s / static_cast<double>(f.v.size());
}

double inner_product(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid, g.grid, "inner_product");
  double s = 0.0;
  const long n = f.size();
  for (long i = 0; i < n; ++i) s += f.v[i] * g.v[i];
  double hd = 1.0;
  for (int i = 0; i < f.grid.d; ++i) hd *= f.grid.h;
  return hd * s;
}

double l2_norm_sq(const ScalarField& f) { return inner_product(f, f); }

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "operator+");
  ScalarField r(a.grid, a.time);
  const long n = a.size();
  for (long i = 0; i < n; ++i) r.v[i] = a.v[i] + b.v[i];
  return r;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "operator-");
  ScalarField r(a.grid, a.time);
  const long n = a.size();
  for (long i = 0; i < n; ++i) r.v[i] = a.v[i] - b.v[i];
  return r;
}

ScalarField operator*(double c, const ScalarField& a) {
  ScalarField r(a.grid, a.time);
  const long n = a.size();
  for (long i = 0; i < n; ++i) r.v[i] = c * a.v[i];
  return r;
}

void axpy(ScalarField& a, double c, const ScalarField& b) {
  require_same_grid(a.grid, b.grid, "axpy");
  const long n = a.size();
  for (long i = 0; i < n; ++i) a.v[i] += c * b.v[i];
}

ScalarField sample_white_noise(const GridSpec& grid, RngStream& rng) {
  ScalarField f(grid, 0.0);
  rng.fill_normals(f.v.data(), f.size());
  double scale = 1.0;
  for (int i = 0; i < grid.d; ++i) scale /= grid.h;
  scale = std::sqrt(scale);  // per-site std dev h^{-d/2}
  for (double& x : f.v) x *= scale;
  return f;
}

}  // namespace aclab
