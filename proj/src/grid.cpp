#include "aclab/grid.hpp"

#include <cmath>
#include <string>

namespace aclab {

namespace {
bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

GridSpec::GridSpec(int d_, int n_, double L_) : d(d_), n(n_), L(L_) {
  if (d < 1 || d > 3)
    throw std::invalid_argument("GridSpec: d must be 1, 2, or 3");
  if (!power_of_two(n))
    throw std::invalid_argument("GridSpec: n must be a power of two");
  if (!(L > 0.0) || !std::isfinite(L))
    throw std::invalid_argument("GridSpec: L must be positive and finite");
  long sites = 1;
  for (int i = 0; i < d; ++i) {
    sites *= n;
    if (sites > kMaxSites)
      throw std::invalid_argument("GridSpec: n^d exceeds the site cap");
  }
  h = L / n;
}

long GridSpec::site_count() const {
  long s = 1;
  for (int i = 0; i < d; ++i) s *= n;
  return s;
}

int GridSpec::wrap(int c) const {
  int r = c % n;
  return r < 0 ? r + n : r;
}

long GridSpec::index(const std::array<int, 3>& c) const {
  long idx = 0;
  for (int i = 0; i < d; ++i) idx = idx * n + wrap(c[i]);
  return idx;
}

std::array<int, 3> GridSpec::coords(long idx) const {
  std::array<int, 3> c{0, 0, 0};
  for (int i = d - 1; i >= 0; --i) {
    c[i] = static_cast<int>(idx % n);
    idx /= n;
  }
  return c;
}

double GridSpec::min_image(double x) const {
  double y = std::fmod(x, L);
  if (y > 0.5 * L) y -= L;
  if (y <= -0.5 * L) y += L;
  return y;
}

double GridSpec::site_distance(long a, long b) const {
  auto ca = coords(a);
  auto cb = coords(b);
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    double dx = min_image((ca[i] - cb[i]) * h);
    s += dx * dx;
  }
  return std::sqrt(s);
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where) {
  if (a != b)
    throw GridMismatch(std::string(where) + ": fields live on different grids");
}

}  // namespace aclab
