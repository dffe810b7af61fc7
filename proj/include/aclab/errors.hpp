#pragma once

// Typed error conditions thrown by the library. Everything derives from
// std::runtime_error / std::invalid_argument so callers can catch broadly,
// but the concrete types let tests and the CLI map failures to exit codes.

#include <stdexcept>
#include <string>

namespace aclab {

// Two fields with different grids (or incompatible layouts) were combined.
struct GridMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Mollifier support does not span at least two lattice cells.
struct WidthUnresolvable : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requested eps produces a mollifier the grid cannot resolve.
struct EpsilonUnresolvable : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// An input field already contained NaN/Inf.
struct NonFiniteInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The state blew up mid-integration; carries where and how badly.
struct NonFiniteState : std::runtime_error {
  int step_index;
  double max_abs;
  NonFiniteState(const std::string& what, int step, double mx)
      : std::runtime_error(what), step_index(step), max_abs(mx) {}
};

// Linearized replay needs the base trajectory sampled at least every dt.
struct TrajectoryTooCoarse : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Fewer stored snapshots than an integral quadrature needs.
struct InsufficientSnapshots : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Trilinear integral called with trajectories on different snapshot grids.
struct SnapshotMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requested observation time was never stored.
struct TimeNotInTrajectory : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A statistic was requested for a snapshot label the ensemble never recorded.
struct MissingSnapshot : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Two-sided variance check requires a nonnegative test function.
struct NegativeTestFunction : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Chaos projection requires the ensemble to have kept its driving noise.
struct NoiseNotStored : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Time quadrature grid too coarse for the requested eps.
struct QuadratureUnderResolved : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Pairing-count argument outside the exactly-representable range.
struct PairingOverflow : std::overflow_error {
  using std::overflow_error::overflow_error;
};

// Results directory has no manifest (incomplete or foreign run).
struct MissingManifest : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Config file malformed, unknown keys, or failed validation.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A replica failed inside an ensemble; wraps the cause with its identity.
struct ReplicaFailure : std::runtime_error {
  long replica_index;
  unsigned long long seed;
  ReplicaFailure(const std::string& what, long idx, unsigned long long sd)
      : std::runtime_error(what), replica_index(idx), seed(sd) {}
};

}  // namespace aclab
