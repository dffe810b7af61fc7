#pragma once

// Counter-based Gaussian stream. Every value is a pure function of
// (master seed, replica index, draw counter), so replicas are replayable in
// any order and independent streams never share state.

#include <cstdint>
#include <vector>

namespace aclab {

// Strong 64-bit avalanche mix of three words (splitmix-style finalizers).
std::uint64_t mix3(std::uint64_t seed, std::uint64_t replica, std::uint64_t counter);

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t replica)
      : seed_(master_seed), replica_(replica) {}

  std::uint64_t master_seed() const { return seed_; }
  std::uint64_t replica() const { return replica_; }
  std::uint64_t counter() const { return counter_; }

  // Uniform on (0,1), one counter tick.
  double uniform();

  // Standard normal via Box-Muller; consumes counter ticks in pairs.
  double normal();

  void fill_normals(double* dst, long count);

  // Jump the counter (used by tests exercising replay).
  void reset(std::uint64_t counter = 0) {
    counter_ = counter;
    have_spare_ = false;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t replica_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace aclab
