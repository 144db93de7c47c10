#include "sfft/analysis.hpp"

#include "sfft/spectrum_io.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace sfft {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// log of the lattice size N^d.
double log_lattice(const CollisionBoundInput& inp) {
  return inp.part.dimension() * std::log(static_cast<double>(inp.N));
}

bool all_axes_collide(const std::vector<IntVector>& points, int r) {
  const std::size_t k = points.size();
  std::vector<char> collides(k, 1);
  for (int q = 0; q < r; ++q) {
    std::unordered_map<std::int64_t, int> counts;
    for (const auto& u : points) ++counts[u[q]];
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[points[j][q]] < 2) collides[j] = 0;
    }
  }
  for (char c : collides) {
    if (c) return true;
  }
  return false;
}

}  // namespace

void CollisionBoundInput::validate() const {
  if (k < 1) throw std::invalid_argument("collision bound: k must be at least 1");
  if (part.bandwidth() != N) throw std::invalid_argument("collision bound: partition bandwidth differs from N");
}

double worst_case_bound(const CollisionBoundInput& inp) {
  inp.validate();
  const double log_n = std::log(static_cast<double>(inp.N));
  const int d = inp.part.dimension();
  double x = 0.0;  // S / N^d
  for (int q = 0; q < inp.part.blocks(); ++q) x += std::exp((inp.part.block_dim(q) - d) * log_n);
  double log_prod = 0.0;
  for (std::int64_t j = 2; j <= inp.k; ++j) {
    const double y = static_cast<double>(j - 1) * x;
    if (y >= 1.0) return 1.0;
    log_prod += std::log1p(-y);
  }
  if (log_prod == 0.0) return 0.0;
  return std::min(1.0, -std::expm1(log_prod));
}

MonteCarloEstimate monte_carlo_collision(const CollisionBoundInput& inp, std::int64_t trials,
                                         std::uint64_t seed) {
  inp.validate();
  if (trials < 1) throw std::invalid_argument("monte carlo: trials must be at least 1");
  if (std::log(static_cast<double>(inp.k)) > log_lattice(inp) + 1e-12) {
    throw std::invalid_argument("monte carlo: k exceeds the lattice size");
  }
  const int r = inp.part.blocks();
  std::int64_t hits = 0;
  std::vector<IntVector> points;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(trial))));
    std::set<IntVector, LexLess> drawn;
    points.clear();
    while (static_cast<std::int64_t>(points.size()) < inp.k) {
      IntVector u(r);
      for (int q = 0; q < r; ++q) {
        std::uniform_int_distribution<std::int64_t> axis(inp.part.image_min(q), inp.part.image_max(q));
        u[q] = axis(rng);
      }
      if (drawn.insert(u).second) points.push_back(u);
    }
    if (inp.k > 1 && all_axes_collide(points, r)) ++hits;
  }
  MonteCarloEstimate est;
  est.trials = trials;
  est.rate = static_cast<double>(hits) / static_cast<double>(trials);
  est.stderr_ = std::sqrt(est.rate * (1.0 - est.rate) / static_cast<double>(trials));
  return est;
}

double monte_carlo_collision_rate(const CollisionBoundInput& inp, std::int64_t trials,
                                  std::uint64_t seed) {
  return monte_carlo_collision(inp, trials, seed).rate;
}

CollisionRow collision_row(const CollisionBoundInput& inp, std::int64_t trials,
                           std::uint64_t seed) {
  CollisionRow row;
  row.N = inp.N;
  row.d = inp.part.dimension();
  row.partition = inp.part.to_string();
  row.k = inp.k;
  row.bound = worst_case_bound(inp);
  row.mc = monte_carlo_collision(inp, trials, seed);
  return row;
}

void write_collision_csv(std::ostream& out, const std::vector<CollisionRow>& rows) {
  out << "N,d,partition,k,bound,mc_rate,mc_trials,mc_stderr\n";
  for (const auto& row : rows) {
    out << row.N << ',' << row.d << ',' << row.partition << ',' << row.k << ','
        << format_double(row.bound) << ',' << format_double(row.mc.rate) << ','
        << row.mc.trials << ',' << format_double(row.mc.stderr_) << '\n';
  }
}

}  // namespace sfft
