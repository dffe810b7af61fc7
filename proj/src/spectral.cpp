#include "aclab/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace aclab {

namespace {
// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

SpectralWorkspace::SpectralWorkspace(const GridSpec& grid) : grid_(grid) {
  nr_ = grid_.site_count();
  nc_ = (nr_ / grid_.n) * (grid_.n / 2 + 1);

  rbuf_ = fftw_alloc_real(nr_);
  fftw_complex* cb = fftw_alloc_complex(nc_);
  cbuf_ = cb;

  int dims[3] = {grid_.n, grid_.n, grid_.n};
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    // ESTIMATE keeps the algorithm choice deterministic run to run, which the
    // byte-reproducibility guarantee depends on.
    plan_fwd_ = fftw_plan_dft_r2c(grid_.d, dims, rbuf_, cb, FFTW_ESTIMATE);
    plan_inv_ = fftw_plan_dft_c2r(grid_.d, dims, cb, rbuf_, FFTW_ESTIMATE);
  }

  // |k|^2 over the r2c layout; frequency m maps to m or m-n, times 2*pi/L.
  k2_.resize(nc_);
  const double base = 2.0 * M_PI / grid_.L;
  const int n = grid_.n;
  const int nhalf = n / 2 + 1;
  auto freq = [&](int m) {
    int f = (m <= n / 2) ? m : m - n;
    return base * f;
  };
  if (grid_.d == 1) {
    for (int i = 0; i < nhalf; ++i) k2_[i] = freq(i) * freq(i);
  } else if (grid_.d == 2) {
    long idx = 0;
    for (int i = 0; i < n; ++i) {
      double ki = freq(i) * freq(i);
      for (int j = 0; j < nhalf; ++j) k2_[idx++] = ki + freq(j) * freq(j);
    }
  } else {
    long idx = 0;
    for (int i = 0; i < n; ++i) {
      double ki = freq(i) * freq(i);
      for (int j = 0; j < n; ++j) {
        double kj = ki + freq(j) * freq(j);
        for (int l = 0; l < nhalf; ++l) k2_[idx++] = kj + freq(l) * freq(l);
      }
    }
  }
}

SpectralWorkspace::~SpectralWorkspace() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(rbuf_);
  fftw_free(static_cast<fftw_complex*>(cbuf_));
}

void SpectralWorkspace::forward(const double* src) {
  std::memcpy(rbuf_, src, sizeof(double) * nr_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
}

void SpectralWorkspace::inverse(double* dst) {
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  std::memcpy(dst, rbuf_, sizeof(double) * nr_);
}

Spectrum SpectralWorkspace::to_spectrum(const ScalarField& f) {
  require_same_grid(f.grid, grid_, "to_spectrum");
  forward(f.v.data());
  Spectrum s;
  s.grid = grid_;
  s.c.resize(nc_);
  std::memcpy(s.c.data(), cbuf_, sizeof(fftw_complex) * nc_);
  return s;
}

ScalarField SpectralWorkspace::to_field(const Spectrum& s, double time) {
  require_same_grid(s.grid, grid_, "to_field");
  std::memcpy(cbuf_, s.c.data(), sizeof(fftw_complex) * nc_);
  ScalarField f(grid_, time);
  inverse(f.v.data());
  const double scale = 1.0 / static_cast<double>(nr_);
  for (double& x : f.v) x *= scale;
  return f;
}

ScalarField SpectralWorkspace::convolve(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid, g.grid, "convolve");
  require_same_grid(f.grid, grid_, "convolve");

  Spectrum fs = to_spectrum(f);
  forward(g.v.data());
  fftw_complex* cb = static_cast<fftw_complex*>(cbuf_);
  for (long i = 0; i < nc_; ++i) {
    std::complex<double> prod = fs.c[i] * std::complex<double>(cb[i][0], cb[i][1]);
    cb[i][0] = prod.real();
    cb[i][1] = prod.imag();
  }
  ScalarField out(grid_, f.time);
  inverse(out.v.data());
  double hd = 1.0;
  for (int i = 0; i < grid_.d; ++i) hd *= grid_.h;
  const double scale = hd / static_cast<double>(nr_);
  for (double& x : out.v) x *= scale;
  return out;
}

const HeatSymbol& SpectralWorkspace::heat_symbol(double t) {
  if (!(t >= 0.0) || !std::isfinite(t))
    throw std::invalid_argument("heat_symbol: duration must be finite and >= 0");
  auto it = symbols_.find(t);
  if (it != symbols_.end()) return it->second;
  // Quadratures sweep hundreds of distinct durations on large grids; an
  // unbounded table of per-duration multiplier arrays would dominate memory.
  // Recomputing a symbol is one exp() pass, far cheaper than the transforms
  // around it, so a full flush on overflow costs nothing measurable.
  if (symbols_.size() >= kMaxCachedSymbols) symbols_.clear();
  HeatSymbol sym;
  sym.grid = grid_;
  sym.duration = t;
  sym.mult.resize(nc_);
  for (long i = 0; i < nc_; ++i) sym.mult[i] = std::exp(-k2_[i] * t);
  return symbols_.emplace(t, std::move(sym)).first->second;
}

ScalarField SpectralWorkspace::heat(const ScalarField& f, double t) {
  require_same_grid(f.grid, grid_, "heat");
  if (!all_finite(f)) throw NonFiniteInput("heat: input field has non-finite values");
  if (t == 0.0) {
    ScalarField copy = f;
    return copy;
  }
  const HeatSymbol& sym = heat_symbol(t);
  forward(f.v.data());
  fftw_complex* cb = static_cast<fftw_complex*>(cbuf_);
  for (long i = 0; i < nc_; ++i) {
    cb[i][0] *= sym.mult[i];
    cb[i][1] *= sym.mult[i];
  }
  ScalarField out(grid_, f.time + t);
  inverse(out.v.data());
  const double scale = 1.0 / static_cast<double>(nr_);
  for (double& x : out.v) x *= scale;
  return out;
}

void SpectralWorkspace::apply_symbol(Spectrum& s, const HeatSymbol& sym) const {
  require_same_grid(s.grid, sym.grid, "apply_symbol");
  for (long i = 0; i < nc_; ++i) s.c[i] *= sym.mult[i];
}

SpectralWorkspace& workspace_for(const GridSpec& grid) {
  thread_local std::map<std::tuple<int, int, double>, std::unique_ptr<SpectralWorkspace>> cache;
  auto key = std::make_tuple(grid.d, grid.n, grid.L);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<SpectralWorkspace>(grid)).first;
  return *it->second;
}

ScalarField convolve(const ScalarField& f, const ScalarField& g) {
  return workspace_for(f.grid).convolve(f, g);
}

ScalarField heat_propagate(const ScalarField& f, double t) {
  return workspace_for(f.grid).heat(f, t);
}

}  // namespace aclab
