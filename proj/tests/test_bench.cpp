#include "sfft/bench.hpp"

#include <doctest.h>

#include <sstream>

using namespace sfft;

namespace {

// CSV text with the timing column blanked.
std::string without_ticks(const std::vector<BenchRow>& rows) {
  auto copy = rows;
  for (auto& r : copy) r.ticks = 0;
  std::ostringstream out;
  write_bench_csv(out, copy);
  return out.str();
}

}  // namespace

TEST_CASE("bench rows are deterministic across runs and worker counts") {
  BenchOptions opts;
  opts.dims = {20};
  opts.ks = {1, 4, 8};
  opts.trials = 3;
  opts.seed = 42;
  const auto a = run_bench(opts);
  const auto b = run_bench(opts);
  opts.workers = 3;
  const auto c = run_bench(opts);
  REQUIRE(a.size() == 9);
  CHECK(without_ticks(a) == without_ticks(b));
  CHECK(without_ticks(a) == without_ticks(c));
  for (const auto& r : a) {
    CHECK(r.ok());
    CHECK(r.l2_error < 1e-9);
    CHECK(r.partition == "5x4");
  }
  std::ostringstream out;
  write_bench_csv(out, a);
  CHECK(out.str().rfind("d,N,k,partition,trial,seed,l2_error,samples,ticks_ns,iterations,fallback_used,status\n", 0) == 0);
}

TEST_CASE("trial seeds differ by configuration") {
  CHECK(trial_seed(1, 100, 4, 0) == trial_seed(1, 100, 4, 0));
  CHECK(trial_seed(1, 100, 4, 0) != trial_seed(1, 100, 4, 1));
  CHECK(trial_seed(1, 100, 4, 0) != trial_seed(1, 100, 8, 0));
  CHECK(trial_seed(1, 100, 4, 0) != trial_seed(2, 100, 4, 0));
}

TEST_CASE("summaries") {
  BenchOptions opts;
  opts.dims = {10};
  opts.ks = {2, 4};
  opts.trials = 2;
  const auto summary = summarize(run_bench(opts));
  REQUIRE(summary.size() == 2);
  CHECK(summary[0].k == 2);
  CHECK(summary[0].ok == 2);
  CHECK(summary[1].geomean_samples > summary[0].geomean_samples);
  std::ostringstream out;
  write_summary(out, summary);
  CHECK_FALSE(out.str().empty());
}

TEST_CASE("loglog_slope") {
  CHECK(loglog_slope({1, 2, 4, 8}, {3, 6, 12, 24}) == doctest::Approx(1.0));
  CHECK(loglog_slope({1, 2, 4, 8}, {1, 4, 16, 64}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), std::invalid_argument);
}

TEST_CASE("tilt demo") {
  const auto demo = run_tilt_demo(8);
  CHECK(demo.stalled);
  CHECK(demo.parallel_recovered == 0);
  CHECK(demo.exact);
  CHECK(demo.tilted.recovered.size() == demo.truth.size());
  CHECK(l2_error(demo.truth, demo.tilted.recovered) < 1e-12);
}

TEST_CASE("bench partition selection") {
  BenchOptions opts;
  CHECK(bench_partition(opts, 100).to_string() == "5x20");
  opts.partition = "2+3";
  CHECK(bench_partition(opts, 5).to_string() == "2+3");
  CHECK_THROWS(bench_partition(opts, 6));
}
