#pragma once

// Compactly supported smoothing kernels and the initial data they generate:
// u(0) = kernel * white noise, with covariance kernel * reflected kernel.

#include <array>

#include "aclab/field.hpp"
#include "aclab/spectral.hpp"

namespace aclab {

struct MollifierSpec {
  // Smooth bump c * exp(-1 / (1 - |x/width|^2)) inside |x| < width, zero
  // outside, normalized to unit lattice mass.
  double width = 0.0;  // support radius

  MollifierSpec() = default;
  explicit MollifierSpec(double w) : width(w) {}
};

// Discretized kernel centered at the origin site. Throws WidthUnresolvable
// when the support radius spans fewer than two lattice cells.
ScalarField make_mollifier(const MollifierSpec& spec, const GridSpec& grid);

// Covariance of the smoothed noise: (kernel * reflected-kernel)(offset),
// computed by direct summation so disjoint supports give an exact zero.
double initial_covariance(const MollifierSpec& spec, const GridSpec& grid,
                          const std::array<double, 3>& offset);

// Full covariance field kernel * reflected-kernel (spectral, for quadrature).
ScalarField initial_covariance_field(SpectralWorkspace& ws, const MollifierSpec& spec);

// Smoothed white noise: kernel * xi.
ScalarField initial_condition(SpectralWorkspace& ws, const MollifierSpec& spec,
                              RngStream& rng);

}  // namespace aclab
