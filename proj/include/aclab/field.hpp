#pragma once

// Real scalar field on a periodic lattice, row-major storage, plus the small
// set of pointwise/reduction operations the solvers need.

#include <vector>

#include "aclab/grid.hpp"
#include "aclab/rng.hpp"

namespace aclab {

struct ScalarField {
  GridSpec grid;
  double time = 0.0;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(const GridSpec& g, double t = 0.0)
      : grid(g), time(t), v(g.site_count(), 0.0) {}

  long size() const { return static_cast<long>(v.size()); }
  double& operator[](long i) { return v[i]; }
  double operator[](long i) const { return v[i]; }
};

// True iff every value is finite.
bool all_finite(const ScalarField& f);
double max_abs(const ScalarField& f);
double min_value(const ScalarField& f);
double max_value(const ScalarField& f);

// Lattice mean (1/n^d) * sum.
double mean_value(const ScalarField& f);

// Riemann-sum pairing h^d * sum(f*g). Throws GridMismatch.
double inner_product(const ScalarField& f, const ScalarField& g);

// h^d * sum(f^2).
double l2_norm_sq(const ScalarField& f);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double c, const ScalarField& a);

// In-place a += c*b.
void axpy(ScalarField& a, double c, const ScalarField& b);

// i.i.d. N(0, h^{-d}) per site: the lattice stand-in for white noise.
ScalarField sample_white_noise(const GridSpec& grid, RngStream& rng);

}  // namespace aclab
