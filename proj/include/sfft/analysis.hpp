// Probability bound for the worst case of parallel projection and a
// Monte-Carlo estimate of the event it controls.
#pragma once

#include "sfft/index_maps.hpp"

#include <cstdint>
#include <ostream>
#include <vector>

namespace sfft {

struct CollisionBoundInput {
  std::int64_t N = 20;
  Partition part = Partition::uniform(100, 5, 20);
  std::int64_t k = 1;

  // Throws std::invalid_argument unless k >= 1 and part has bandwidth N.
  void validate() const;
};

// 1 - prod_{j=1..k} max(0, 1 - (j-1) S / N^d) with S = sum_i N^{d_i},
// accumulated as a sum of logarithms.
double worst_case_bound(const CollisionBoundInput& inp);

struct MonteCarloEstimate {
  double rate = 0.0;
  double stderr_ = 0.0;  // binomial standard error sqrt(rate (1 - rate) / trials)
  std::int64_t trials = 0;
};

// Fraction of random k-subsets of the lattice in which some frequency shares
// its reduced coordinate with another frequency on every reduced axis.
MonteCarloEstimate monte_carlo_collision(const CollisionBoundInput& inp, std::int64_t trials,
                                         std::uint64_t seed);
double monte_carlo_collision_rate(const CollisionBoundInput& inp, std::int64_t trials,
                                  std::uint64_t seed);

struct CollisionRow {
  std::int64_t N = 0;
  int d = 0;
  std::string partition;
  std::int64_t k = 0;
  double bound = 0.0;
  MonteCarloEstimate mc;
};

CollisionRow collision_row(const CollisionBoundInput& inp, std::int64_t trials,
                           std::uint64_t seed);

// Header: N,d,partition,k,bound,mc_rate,mc_trials,mc_stderr
void write_collision_csv(std::ostream& out, const std::vector<CollisionRow>& rows);

}  // namespace sfft
