#include "aclab/rng.hpp"

#include <cmath>

namespace aclab {

namespace {

inline std::uint64_t avalanche(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

std::uint64_t mix3(std::uint64_t seed, std::uint64_t replica, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = avalanche(z);
  z += replica * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  z = avalanche(z);
  z += counter * 0x9e3779b97f4a7c15ULL;
  z = avalanche(z);
  return z;
}

double RngStream::uniform() {
  std::uint64_t bits = mix3(seed_, replica_, counter_++);
  // 53 mantissa bits, shifted into (0,1): never exactly 0 or 1.
  return static_cast<double>(bits >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double RngStream::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

void RngStream::fill_normals(double* dst, long count) {
  for (long i = 0; i < count; ++i) dst[i] = normal();
}

}  // namespace aclab
