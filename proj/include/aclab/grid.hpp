#pragma once

// Periodic lattice description: d-dimensional torus of side L sampled with n
// points per axis. n is kept to powers of two so the spectral transforms stay
// fast and exact-size.

#include <array>
#include <cstdint>
#include <vector>

#include "aclab/errors.hpp"

namespace aclab {

struct GridSpec {
  int d = 0;         // spatial dimension, 1..3
  int n = 0;         // points per axis, power of two
  double L = 0.0;    // physical side length
  double h = 0.0;    // lattice spacing L/n

  static constexpr long kMaxSites = 1L << 26;

  GridSpec() = default;
  GridSpec(int d_, int n_, double L_);

  long site_count() const;

  // Row-major site index from per-axis integer coordinates (wrapped).
  long index(const std::array<int, 3>& c) const;
  std::array<int, 3> coords(long idx) const;

  // Wrap an integer coordinate into [0, n).
  int wrap(int c) const;

  // Map a coordinate difference into the minimal image (-L/2, L/2].
  double min_image(double x) const;

  // Euclidean distance between lattice sites under periodic wrapping.
  double site_distance(long a, long b) const;

  bool operator==(const GridSpec& o) const {
    return d == o.d && n == o.n && L == o.L;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

// Throws GridMismatch unless the two specs are identical.
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* where);

}  // namespace aclab
