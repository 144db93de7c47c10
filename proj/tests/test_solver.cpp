#include "oracles.hpp"
#include "sfft/bench.hpp"
#include "sfft/solver.hpp"

#include <doctest.h>

#include <random>

using namespace sfft;

namespace {

IntVector iv(std::initializer_list<std::int64_t> xs) {
  IntVector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (auto x : xs) v[i++] = x;
  return v;
}

SolverConfig config(std::int64_t k, std::int64_t N) {
  SolverConfig cfg;
  cfg.k = k;
  cfg.N = N;
  return cfg;
}

bool same_frequencies(const SparseSpectrum& a, const SparseSpectrum& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [w, c] : a) {
    if (!b.contains(w)) return false;
  }
  return true;
}

// Four modes forming a rectangle in block space: blocks 0..9 take one of two
// assignments, blocks 10..19 one of two others, and the assignments differ
// in every dimension. Under the identity order each mode shares every block
// value with another mode.
SparseSpectrum block_rectangle() {
  SparseSpectrum s(100, 20);
  for (int g1 = 0; g1 < 2; ++g1) {
    for (int g2 = 0; g2 < 2; ++g2) {
      IntVector w(100);
      for (int l = 0; l < 50; ++l) w[l] = g1 ? (l % 7) - 3 : (l % 7) + 3;
      for (int l = 50; l < 100; ++l) w[l] = g2 ? -(l % 9) - 1 : (l % 9);
      s.insert(w, std::polar(1.0, 0.7 * (2 * g1 + g2 + 1)));
    }
  }
  return s;
}

}  // namespace

TEST_CASE("phaseshift_1d: single mode in one iteration") {
  SparseSpectrum truth(1, 16);
  truth.insert(iv({3}), 1.0);
  ExponentialSumOracle f(truth);
  auto cfg = config(1, 16);
  cfg.eps = 1.0 / 32;
  const auto report = phaseshift_1d(f, cfg);
  CHECK(same_frequencies(report.recovered, truth));
  CHECK(l2_error(truth, report.recovered) < 1e-12);
  CHECK(report.iterations == 1);
  // p is the first prime >= c k* = 5, which is 5 itself.
  CHECK(report.primes == std::vector<std::int64_t>{5});
  CHECK(report.samples_used == 2 * 5);
  CHECK(report.samples_used == f.sample_count());
}

TEST_CASE("phaseshift_1d: zero signal with k = 0") {
  SparseSpectrum none(1, 16);
  ExponentialSumOracle f(none);
  const auto report = phaseshift_1d(f, config(0, 16));
  CHECK(report.recovered.empty());
  CHECK(report.iterations == 0);
  CHECK(report.samples_used == 0);
}

TEST_CASE("phaseshift_1d: collision mod 11 is resolved by the next prime") {
  SparseSpectrum truth(1, 32);
  truth.insert(iv({3}), 1.0);
  truth.insert(iv({14}), Complex(0.0, 0.5));
  ExponentialSumOracle f(truth);
  const auto report = phaseshift_1d(f, config(2, 32));
  CHECK(same_frequencies(report.recovered, truth));
  CHECK(l2_error(truth, report.recovered) < 1e-12);
  CHECK(report.primes == std::vector<std::int64_t>{11, 13});
  CHECK(report.history[0].accepted == 0);
  CHECK(report.history[1].accepted == 2);
  CHECK(max_residual(f, report.recovered, 100, 1) < 1e-8 * 2);
}

TEST_CASE("phaseshift_1d: random instances reproduce the signal") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const std::int64_t k = 1 + trial % 12;
    const auto truth = random_instance(1, 1024, k, rng());
    ExponentialSumOracle f(truth);
    const auto report = phaseshift_1d(f, config(k, 1024));
    CHECK(same_frequencies(report.recovered, truth));
    CHECK(max_residual(f, report.recovered, 100, trial) < 1e-8 * static_cast<double>(k));
  }
  SparseSpectrum two(2, 8);
  ExponentialSumOracle f2(two);
  CHECK_THROWS_AS(phaseshift_1d(f2, config(1, 8)), DimensionMismatch);
}

TEST_CASE("multi_phaseshift: d=4, partition (2,2)") {
  const Partition part({2, 2}, 20);
  SparseSpectrum truth(4, 20);
  const IntVector w1 = wrap_freq(iv({41, 83}), part);
  const IntVector w2 = wrap_freq(iv({-97, 5}), part);
  CHECK(w1 == iv({1, 2, 3, 4}));
  CHECK(w2 == iv({3, -5, 5, 0}));
  truth.insert(w1, Complex(0.6, 0.8));
  truth.insert(w2, Complex(-1.0, 0.0));
  ExponentialSumOracle f(truth);
  const auto report = multi_phaseshift(f, part, config(2, 20));
  CHECK(same_frequencies(report.recovered, truth));
  CHECK(l2_error(truth, report.recovered) < 1e-12);
}

TEST_CASE("multi_phaseshift: k=1 in d=100 takes one iteration") {
  const auto truth = random_instance(100, 20, 1, 77);
  ExponentialSumOracle f(truth);
  auto cfg = config(1, 20);
  cfg.eps = 1.0 / (2.0 * 3200000.0);
  const auto report = multi_phaseshift(f, Partition::uniform(100, 5, 20), cfg);
  CHECK(report.recovered.size() == 1);
  CHECK(same_frequencies(report.recovered, truth));
  CHECK(report.iterations == 1);
  CHECK(report.samples_used == 21 * 5);
  CHECK_FALSE(report.fallback_used);
}

TEST_CASE("multi_phaseshift: d=100, k=64 exact over several seeds") {
  const Partition part = Partition::uniform(100, 5, 20);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto truth = random_instance(100, 20, 64, seed);
    ExponentialSumOracle f(truth);
    const auto report = multi_phaseshift(f, part, config(64, 20));
    CHECK(same_frequencies(report.recovered, truth));
    CHECK(l2_error(truth, report.recovered) < 1e-9);
    CHECK(report.samples_used == f.sample_count());
  }
}

TEST_CASE("full unwrapping and the plain 2D method are partitions too") {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    const auto truth = random_instance(4, 16, 5, rng());
    ExponentialSumOracle f(truth);
    const auto full = multi_phaseshift(f, Partition({4}, 16), config(5, 16));
    CHECK(same_frequencies(full.recovered, truth));
    const auto t2 = random_instance(2, 64, 5, rng());
    ExponentialSumOracle f2(t2);
    const auto plain = multi_phaseshift(f2, Partition({1, 1}, 64), config(5, 64));
    CHECK(same_frequencies(plain.recovered, t2));
  }
}

TEST_CASE("sparsity over-estimate still terminates exactly") {
  const auto truth = random_instance(10, 20, 3, 15);
  ExponentialSumOracle f(truth);
  const auto report = multi_phaseshift(f, Partition::uniform(10, 5, 20), config(8, 20));
  CHECK(same_frequencies(report.recovered, truth));
  CHECK(report.stop_reason == "empty residual");
}

TEST_CASE("sparsity under-estimate never exceeds the declared k") {
  const auto truth = random_instance(4, 20, 4, 16);
  ExponentialSumOracle f(truth);
  RecoveryReport report;
  try {
    report = multi_phaseshift(f, Partition({2, 2}, 20), config(2, 20));
  } catch (const PartialRecoveryError& e) {
    report = e.report();
  }
  CHECK(report.recovered.size() <= 2);
  CHECK(max_residual(f, report.recovered, 16, 3) > 1e-3);
}

TEST_CASE("rectangle: parallel projection stalls with a periodic axis sequence") {
  const auto truth = rectangle_instance(8);
  ExponentialSumOracle f(truth);
  auto cfg = config(4, 8);
  cfg.fallback = Fallback::none;
  std::vector<int> axes;
  cfg.observer = [&](const IterationRecord& r) { axes.push_back(r.axis); };
  try {
    multi_phaseshift(f, Partition({1, 1}, 8), cfg);
    FAIL("expected a stall");
  } catch (const PartialRecoveryError& e) {
    CHECK(e.cause() == "stall");
    CHECK(e.report().recovered.empty());
    CHECK(e.report().iterations == 4);
    CHECK(e.report().samples_used == f.sample_count());
    for (const auto& h : e.report().history) CHECK(h.accepted == 0);
  }
  CHECK(axes == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("rectangle: tilt (3,4,5) recovers all four modes") {
  const auto truth = rectangle_instance(8);
  ExponentialSumOracle f(truth);
  const auto report = tilted_phaseshift_2d(f, TiltParams{}, config(4, 8));
  CHECK(same_frequencies(report.recovered, truth));
  CHECK(l2_error(truth, report.recovered) < 1e-12);

  ExponentialSumOracle g(truth);
  const auto peaks = oracle::dense_2d_peaks(g, 8);
  CHECK(peaks.size() == report.recovered.size());
  for (const auto& [w, a] : report.recovered) {
    const auto it = peaks.find({w[0], w[1]});
    REQUIRE(it != peaks.end());
    CHECK(std::abs(it->second - a) < 1e-10);
  }
}

TEST_CASE("rectangle: the tilt fallback recovers from the stall") {
  const auto truth = rectangle_instance(8);
  ExponentialSumOracle f(truth);
  const auto report = multi_phaseshift(f, Partition({1, 1}, 8), config(4, 8));
  CHECK(same_frequencies(report.recovered, truth));
  CHECK(report.fallback_used);
  CHECK(report.history.back().frame.find("tilt=(3,4,5)") != std::string::npos);
}

TEST_CASE("tilted solver: single modes under every tilt") {
  std::mt19937_64 rng(17);
  for (const auto& tp : TiltParams::enumeration()) {
    for (int i = 0; i < 10; ++i) {
      const auto truth = random_instance(2, 16, 1, rng());
      ExponentialSumOracle f(truth);
      const auto report = tilted_phaseshift_2d(f, tp, config(1, 16));
      CHECK(same_frequencies(report.recovered, truth));
      CHECK(l2_error(truth, report.recovered) < 1e-12);
    }
  }
  SparseSpectrum three(3, 8);
  ExponentialSumOracle f3(three);
  CHECK_THROWS_AS(tilted_phaseshift_2d(f3, TiltParams{}, config(1, 8)), DimensionMismatch);
}

TEST_CASE("stall_fallback") {
  SolveState state;
  SolverConfig cfg = config(4, 8);
  const Partition two({1, 1}, 8);
  CHECK(std::get<TiltParams>(stall_fallback(state, cfg, two)) == TiltParams{3, 4, 5});
  state.tilt_attempts = 1;
  CHECK(std::get<TiltParams>(stall_fallback(state, cfg, two)) == TiltParams{5, 12, 13});
  state.tilt_attempts = 4;
  CHECK_THROWS_AS(stall_fallback(state, cfg, two), FallbackExhausted);

  cfg.seed = 99;
  const Partition wide = Partition::uniform(100, 5, 20);
  SolveState fresh;
  const auto a = std::get<Partition>(stall_fallback(fresh, cfg, wide));
  const auto b = std::get<Partition>(stall_fallback(fresh, cfg, wide));
  CHECK(a == b);
  CHECK(a.block_dims() == wide.block_dims());
  CHECK(a.order() != wide.order());
  fresh.reshuffle_attempts = 1;
  const auto c = std::get<Partition>(stall_fallback(fresh, cfg, wide));
  CHECK(c.order() != a.order());
  fresh.reshuffle_attempts = cfg.max_reshuffles;
  CHECK_THROWS_AS(stall_fallback(fresh, cfg, wide), FallbackExhausted);
  cfg.fallback = Fallback::none;
  CHECK_THROWS_AS(stall_fallback(state, cfg, two), FallbackExhausted);

  // Singleton blocks cannot be reordered into new projections; they merge.
  cfg.fallback = Fallback::reshuffle;
  SolveState s3;
  const auto merged = std::get<Partition>(stall_fallback(s3, cfg, Partition({1, 1, 1}, 4)));
  CHECK(merged.block_dims() == std::vector<int>{1, 2});
  const auto full = std::get<Partition>(stall_fallback(s3, cfg, two));
  CHECK(full.block_dims() == std::vector<int>{2});
  CHECK_THROWS_AS(stall_fallback(s3, cfg, Partition({1}, 8)), FallbackExhausted);
}

TEST_CASE("singleton three-axis stalls recover through a merged partition") {
  // Two modes per axis value on every axis: no parallel projection isolates one.
  SparseSpectrum truth(3, 4);
  for (const auto& w : {iv({0, 0, 0}), iv({0, 1, 1}), iv({1, 0, 1}), iv({1, 1, 0})}) truth.insert(w, 1.0);
  for (Fallback fb : {Fallback::reshuffle, Fallback::tilt}) {
    ExponentialSumOracle f(truth);
    auto cfg = config(4, 4);
    cfg.fallback = fb;
    const auto report = multi_phaseshift(f, Partition({1, 1, 1}, 4), cfg);
    CHECK(same_frequencies(report.recovered, truth));
    CHECK(l2_error(truth, report.recovered) < 1e-12);
    CHECK(report.fallback_used);
  }
}

TEST_CASE("reshuffling resolves a block-aligned worst case in d=100") {
  const auto truth = block_rectangle();
  const Partition part = Partition::uniform(100, 5, 20);
  {
    ExponentialSumOracle f(truth);
    auto cfg = config(4, 20);
    cfg.fallback = Fallback::none;
    CHECK_THROWS_AS(multi_phaseshift(f, part, cfg), PartialRecoveryError);
  }
  for (Fallback fb : {Fallback::reshuffle, Fallback::tilt}) {
    ExponentialSumOracle f(truth);
    auto cfg = config(4, 20);
    cfg.fallback = fb;
    cfg.seed = 5;
    const auto report = multi_phaseshift(f, part, cfg);
    CHECK(same_frequencies(report.recovered, truth));
    CHECK(l2_error(truth, report.recovered) < 1e-9);
    CHECK(report.fallback_used);
  }
}

TEST_CASE("iteration limit yields a partial result") {
  SparseSpectrum truth(1, 32);
  truth.insert(iv({3}), 1.0);
  truth.insert(iv({14}), 1.0);
  ExponentialSumOracle f(truth);
  auto cfg = config(2, 32);
  cfg.max_iterations = 1;
  try {
    phaseshift_1d(f, cfg);
    FAIL("expected a partial result");
  } catch (const PartialRecoveryError& e) {
    CHECK(e.cause() == "iteration limit");
    CHECK(e.report().iterations == 1);
    CHECK(e.report().primes == std::vector<std::int64_t>{11});
    CHECK(e.report().samples_used == 22);
  }
}

TEST_CASE("config validation") {
  SparseSpectrum truth(1, 16);
  truth.insert(iv({3}), 1.0);
  ExponentialSumOracle f(truth);
  auto cfg = config(1, 16);
  cfg.c = 0;
  CHECK_THROWS_AS(phaseshift_1d(f, cfg), std::invalid_argument);
  cfg = config(1, 16);
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(phaseshift_1d(f, cfg), std::invalid_argument);
  cfg = config(1, 16);
  cfg.eps = 1.0 / 16;  // eps * N must not exceed 1/2
  CHECK_THROWS_AS(phaseshift_1d(f, cfg), std::invalid_argument);
  CHECK(parse_fallback("reshuffle") == Fallback::reshuffle);
  CHECK_THROWS_AS(parse_fallback("rotate"), std::invalid_argument);
}

TEST_CASE("no false modes at desk scale") {
  std::mt19937_64 rng(18);
  const std::vector<std::vector<int>> shapes{{1, 1}, {2}, {1, 1, 1}, {2, 2}, {1, 3}, {2, 2, 2}, {4, 4}, {1, 1, 1, 1, 1, 1, 1, 1}};
  int solved = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const auto& dims = shapes[static_cast<std::size_t>(trial) % shapes.size()];
    const std::int64_t N = trial % 3 == 0 ? 4 : 8;
    const Partition part(dims, N);
    std::uniform_int_distribution<std::int64_t> kpick(1, 10);
    const std::int64_t k = kpick(rng);
    const auto truth = random_instance(part.dimension(), N, k, rng());
    ExponentialSumOracle f(truth);
    auto cfg = config(k, N);
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto report = multi_phaseshift(f, part, cfg);
    INFO("trial ", trial, " partition ", part.to_string(), " N ", N, " k ", k);
    CHECK(same_frequencies(report.recovered, truth));
    CHECK(l2_error(truth, report.recovered) < 1e-9);
    ++solved;
  }
  CHECK(solved == 400);
}

TEST_CASE("residual energy does not increase after successful iterations") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto truth = random_instance(100, 20, 64, seed);
    ExponentialSumOracle f(truth);
    const auto report = multi_phaseshift(f, Partition::uniform(100, 5, 20), config(64, 20));
    for (std::size_t i = 1; i < report.history.size(); ++i) {
      if (report.history[i - 1].accepted == 0) continue;
      CHECK(report.history[i].residual_energy <= report.history[i - 1].residual_energy * (1 + 1e-9));
    }
  }
}
