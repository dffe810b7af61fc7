#pragma once

// FFT workspace for one grid: real-to-complex transforms, periodic
// convolution, and heat-semigroup multipliers exp(-|k|^2 t) applied per mode.
// A workspace is not thread-safe; use one instance per worker thread.

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <vector>

#include "aclab/field.hpp"
#include "aclab/grid.hpp"

namespace aclab {

// Per-mode heat multipliers for one duration, laid out like the r2c spectrum.
struct HeatSymbol {
  GridSpec grid;
  double duration = 0.0;
  std::vector<double> mult;
};

// Half-complex spectrum of a real field (r2c layout).
struct Spectrum {
  GridSpec grid;
  std::vector<std::complex<double>> c;
};

class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const GridSpec& grid);
  ~SpectralWorkspace();
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const GridSpec& grid() const { return grid_; }
  long mode_count() const { return nc_; }
  const std::vector<double>& k_squared() const { return k2_; }

  Spectrum to_spectrum(const ScalarField& f);
  // Inverse transform including the 1/n^d normalization.
  ScalarField to_field(const Spectrum& s, double time = 0.0);

  // Periodic convolution h^d-weighted so a unit-mass kernel acts as identity.
  ScalarField convolve(const ScalarField& f, const ScalarField& g);

  // Multipliers exp(-|k|^2 t); cached per duration. The cache holds at most
  // kMaxCachedSymbols entries and flushes wholesale on overflow, so returned
  // references stay valid only until the next distinct-duration request.
  static constexpr std::size_t kMaxCachedSymbols = 64;
  const HeatSymbol& heat_symbol(double t);

  // Apply the heat semigroup for duration t >= 0; advances f.time by t.
  ScalarField heat(const ScalarField& f, double t);

  void apply_symbol(Spectrum& s, const HeatSymbol& sym) const;

  // Drop cached symbols (tests use this to bound memory).
  void clear_symbol_cache() { symbols_.clear(); }

 private:
  void forward(const double* src);   // real buffer -> complex buffer
  void inverse(double* dst);         // complex buffer -> real, unnormalized

  GridSpec grid_;
  long nr_ = 0;  // real array length n^d
  long nc_ = 0;  // complex array length n^{d-1} * (n/2 + 1)
  double* rbuf_ = nullptr;
  void* cbuf_ = nullptr;  // fftw_complex*
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
  std::vector<double> k2_;
  std::map<double, HeatSymbol> symbols_;
};

// Shared-grid convenience wrappers backed by a thread-local workspace cache.
SpectralWorkspace& workspace_for(const GridSpec& grid);
ScalarField convolve(const ScalarField& f, const ScalarField& g);
ScalarField heat_propagate(const ScalarField& f, double t);

}  // namespace aclab
