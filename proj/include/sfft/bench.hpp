// Benchmark sweeps over (d, k), per-trial CSV rows and per-configuration
// summaries, plus the worst-case tilt demonstration.
#pragma once

#include "sfft/analysis.hpp"
#include "sfft/solver.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sfft {

struct BenchOptions {
  std::vector<int> dims{100};
  std::int64_t N = 20;
  std::vector<std::int64_t> ks{1, 2, 4, 8, 16, 32, 64};
  int trials = 20;
  std::uint64_t seed = 1;
  int subdim = 5;
  std::optional<std::string> partition;  // overrides subdim; must sum to every d
  int c = 5;
  std::optional<double> eps;
  double tol = 1e-6;
  Fallback fallback = Fallback::tilt;
  int workers = 1;
};

struct BenchRow {
  int d = 0;
  std::int64_t N = 0;
  std::int64_t k = 0;
  std::string partition;
  int trial = 0;
  std::uint64_t seed = 0;
  double l2_error = 0.0;
  std::uint64_t samples = 0;
  std::int64_t ticks = 0;
  int iterations = 0;
  bool fallback_used = false;
  std::string status;  // "ok", "partial:<cause>" or "error:<message>"

  bool ok() const { return status == "ok"; }
};

Partition bench_partition(const BenchOptions& opts, int d);

// Seed of trial `trial` of configuration (d, k) under a master seed.
std::uint64_t trial_seed(std::uint64_t master, int d, std::int64_t k, int trial);

// Runs one trial: random instance, multi_phaseshift, l2 error vs. truth.
BenchRow run_trial(const BenchOptions& opts, int d, std::int64_t k, int trial);

// Rows ordered by (d, k, trial) whatever the worker count.
std::vector<BenchRow> run_bench(const BenchOptions& opts);

// Header: d,N,k,partition,trial,seed,l2_error,samples,ticks_ns,iterations,fallback_used,status
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

struct BenchSummary {
  int d = 0;
  std::int64_t N = 0;
  std::int64_t k = 0;
  std::string partition;
  int trials = 0;
  int ok = 0;
  double mean_l2 = 0.0;
  double max_l2 = 0.0;
  double mean_samples = 0.0;
  double geomean_samples = 0.0;
  double geomean_ticks = 0.0;
  double mean_iterations = 0.0;
};

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows);
void write_summary(std::ostream& out, const std::vector<BenchSummary>& summary);

// Least-squares slope of log2(y) against log2(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct TiltDemo {
  SparseSpectrum truth{2, 8};
  bool stalled = false;
  std::string parallel_outcome;
  std::size_t parallel_recovered = 0;
  RecoveryReport tilted;
  bool exact = false;
};

// The modes (1,1), (1,2), (2,1), (2,2) with unit coefficients.
SparseSpectrum rectangle_instance(std::int64_t N);

// Parallel projection without fallback on the rectangle instance, then the
// tilted solver with tp.
TiltDemo run_tilt_demo(std::int64_t N, const TiltParams& tp = {}, int c = 5);

std::vector<CollisionRow> worstcase_table(const Partition& part,
                                          const std::vector<std::int64_t>& ks,
                                          std::int64_t mc_trials, std::uint64_t seed);

}  // namespace sfft
