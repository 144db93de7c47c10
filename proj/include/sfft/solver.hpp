// Sparse Fourier recovery by phase-shift decoding of parallel projections.
//
// Each iteration projects the residual signal onto one axis of a reduced
// problem (a partition of the dimensions, optionally tilted), samples one
// unshifted and r shifted prime-length lines, transforms them, and accepts
// every top bin that passes all r collision tests. Accepted modes are kept
// in a registry and subtracted from later lines. The projection axis cycles
// through the r reduced axes; when no mode is accepted for a while the
// solver switches to a different reduction (tilted plane or reordered
// partition).
#pragma once

#include "sfft/dft.hpp"
#include "sfft/index_maps.hpp"
#include "sfft/spectral_model.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace sfft {

enum class Fallback { none, reshuffle, tilt };

Fallback parse_fallback(std::string_view text);
std::string to_string(Fallback fallback);

struct SolverConfig {
  std::int64_t k = 1;    // sparsity, an upper bound on the number of modes
  std::int64_t N = 20;   // bandwidth per original dimension
  int c = 5;             // p is the i-th prime >= c * (k - |R|)
  std::optional<double> eps;  // shift; per-frame default when unset
  double tol = 1e-6;           // collision test tolerance
  double prune_floor = 1e-8;   // registry coefficients below this are dropped
  double empty_bin_fraction = 1e-8;  // bins below this * p * amplitude scale are empty
  double rounding_tolerance = 0.01;  // max |v - round(v)| for a decoded frequency
  int max_iterations = 1000;
  std::optional<int> stall_limit;  // default 2 r
  Fallback fallback = Fallback::tilt;
  int max_reshuffles = 16;
  std::uint64_t seed = 0;  // drives reordered partitions
  std::function<void(const IterationRecord&)> observer;

  // Throws std::invalid_argument on c < 1, max_iterations < 1, or a shift
  // too large for the given largest block bandwidth.
  void validate(std::int64_t max_block_bandwidth) const;
};

// Registry and loop counters of a running solve. The registry lives in the
// reduced coordinates of the current frame.
struct SolveState {
  using Registry = std::map<IntVector, Complex, LexLess>;

  Registry registry;
  int iteration = 0;        // over the whole solve
  int frame_iteration = 0;  // within the current frame; drives p and the axis
  int axis = 0;
  int stall_run = 0;
  int tilt_attempts = 0;
  int reshuffle_attempts = 0;
  std::vector<std::int64_t> primes;
};

// Raised when a solve stops before recovering k modes (or an empty
// residual). Carries the partially recovered spectrum and diagnostics.
class PartialRecoveryError : public std::runtime_error {
 public:
  PartialRecoveryError(std::string cause, RecoveryReport report);
  const std::string& cause() const { return cause_; }
  const RecoveryReport& report() const { return report_; }

 private:
  std::string cause_;
  RecoveryReport report_;
};

class FallbackExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One-dimensional phase-shift recovery; the oracle must be 1-dimensional.
RecoveryReport phaseshift_1d(SignalOracle& oracle, const SolverConfig& cfg);

// d-dimensional recovery over a partial unwrapping. part = (1, 1) is the
// plain 2D parallel-projection method; part = (d) is full unwrapping.
RecoveryReport multi_phaseshift(SignalOracle& oracle, const Partition& part,
                                const SolverConfig& cfg);

// 2D recovery on the tilted signal f(T t) with T the scaled rotation of tp.
// On a stall the next triple of TiltParams::enumeration() is tried.
RecoveryReport tilted_phaseshift_2d(SignalOracle& oracle, const TiltParams& tp,
                                    const SolverConfig& cfg);

using FallbackChoice = std::variant<Partition, TiltParams>;

// Next reduction to try after a stall: the next tilt triple for two-axis
// problems (when cfg.fallback == tilt), otherwise the same block dims over a
// seeded random reordering of the dimensions. When every block has a single
// dimension the last two blocks are merged instead. Throws FallbackExhausted.
FallbackChoice stall_fallback(const SolveState& state, const SolverConfig& cfg,
                              const Partition& part);

// Largest |residual(t)| over `probes` random points of [0,1)^d.
double max_residual(SignalOracle& oracle, const SparseSpectrum& recovered, int probes,
                    std::uint64_t seed);

}  // namespace sfft
