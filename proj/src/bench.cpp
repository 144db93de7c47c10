#include "sfft/bench.hpp"

#include "sfft/spectrum_io.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <thread>

namespace sfft {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Partition bench_partition(const BenchOptions& opts, int d) {
  if (opts.partition) return parse_partition(*opts.partition, d, opts.N);
  return Partition::uniform(d, opts.subdim, opts.N);
}

std::uint64_t trial_seed(std::uint64_t master, int d, std::int64_t k, int trial) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ static_cast<std::uint64_t>(d));
  s = splitmix64(s ^ static_cast<std::uint64_t>(k));
  return splitmix64(s ^ static_cast<std::uint64_t>(trial));
}

BenchRow run_trial(const BenchOptions& opts, int d, std::int64_t k, int trial) {
  BenchRow row;
  row.d = d;
  row.N = opts.N;
  row.k = k;
  row.trial = trial;
  row.seed = trial_seed(opts.seed, d, k, trial);
  try {
    const Partition part = bench_partition(opts, d);
    row.partition = part.to_string();
    const SparseSpectrum truth = random_instance(d, opts.N, k, row.seed);
    ExponentialSumOracle oracle(truth);
    SolverConfig cfg;
    cfg.k = k;
    cfg.N = opts.N;
    cfg.c = opts.c;
    cfg.eps = opts.eps;
    cfg.tol = opts.tol;
    cfg.fallback = opts.fallback;
    cfg.seed = row.seed;
    RecoveryReport report;
    try {
      report = multi_phaseshift(oracle, part, cfg);
      row.status = "ok";
    } catch (const PartialRecoveryError& e) {
      report = e.report();
      row.status = "partial:" + e.cause();
    }
    row.l2_error = l2_error(truth, report.recovered);
    row.samples = report.samples_used;
    row.ticks = report.elapsed_ticks;
    row.iterations = report.iterations;
    row.fallback_used = report.fallback_used;
    if (row.ok() && !(row.l2_error < 1e-9)) row.status = "inexact";
  } catch (const std::exception& e) {
    row.status = std::string("error:") + e.what();
  }
  return row;
}

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  struct Job {
    int d;
    std::int64_t k;
    int trial;
  };
  std::vector<Job> jobs;
  for (int d : opts.dims) {
    for (std::int64_t k : opts.ks) {
      for (int t = 0; t < opts.trials; ++t) jobs.push_back({d, k, t});
    }
  }
  std::vector<BenchRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      rows[i] = run_trial(opts, jobs[i].d, jobs[i].k, jobs[i].trial);
    }
  };
  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "d,N,k,partition,trial,seed,l2_error,samples,ticks_ns,iterations,fallback_used,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& ch : status) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
    }
    out << r.d << ',' << r.N << ',' << r.k << ',' << r.partition << ',' << r.trial << ','
        << r.seed << ',' << format_double(r.l2_error) << ',' << r.samples << ',' << r.ticks << ','
        << r.iterations << ',' << (r.fallback_used ? 1 : 0) << ',' << status << '\n';
  }
}

std::vector<BenchSummary> summarize(const std::vector<BenchRow>& rows) {
  std::map<std::pair<int, std::int64_t>, BenchSummary> groups;
  std::map<std::pair<int, std::int64_t>, std::pair<double, double>> logs;
  for (const auto& r : rows) {
    auto& s = groups[{r.d, r.k}];
    auto& [log_samples, log_ticks] = logs[{r.d, r.k}];
    s.d = r.d;
    s.N = r.N;
    s.k = r.k;
    s.partition = r.partition;
    ++s.trials;
    if (r.ok()) ++s.ok;
    s.mean_l2 += r.l2_error;
    s.max_l2 = std::max(s.max_l2, r.l2_error);
    s.mean_samples += static_cast<double>(r.samples);
    s.mean_iterations += r.iterations;
    log_samples += std::log(std::max<double>(1.0, static_cast<double>(r.samples)));
    log_ticks += std::log(std::max<double>(1.0, static_cast<double>(r.ticks)));
  }
  std::vector<BenchSummary> out;
  for (auto& [key, s] : groups) {
    const double n = s.trials;
    const auto& [log_samples, log_ticks] = logs[key];
    s.mean_l2 /= n;
    s.mean_samples /= n;
    s.mean_iterations /= n;
    s.geomean_samples = std::exp(log_samples / n);
    s.geomean_ticks = std::exp(log_ticks / n);
    out.push_back(s);
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<BenchSummary>& summary) {
  out << "d,N,k,partition,trials,ok,mean_l2,max_l2,mean_samples,geomean_samples,geomean_ticks_ns,"
         "mean_iterations\n";
  for (const auto& s : summary) {
    out << s.d << ',' << s.N << ',' << s.k << ',' << s.partition << ',' << s.trials << ',' << s.ok
        << ',' << format_double(s.mean_l2) << ',' << format_double(s.max_l2) << ','
        << format_double(s.mean_samples) << ',' << format_double(s.geomean_samples) << ','
        << format_double(s.geomean_ticks) << ',' << format_double(s.mean_iterations) << '\n';
  }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("loglog_slope needs two or more matching points");
  }
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log2(x[i]);
    const double ly = std::log2(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SparseSpectrum rectangle_instance(std::int64_t N) {
  SparseSpectrum s(2, N);
  for (std::int64_t a : {1, 2}) {
    for (std::int64_t b : {1, 2}) s.insert(IntVector2(a, b), 1.0);
  }
  return s;
}

TiltDemo run_tilt_demo(std::int64_t N, const TiltParams& tp, int c) {
  TiltDemo demo;
  demo.truth = rectangle_instance(N);
  SolverConfig cfg;
  cfg.k = static_cast<std::int64_t>(demo.truth.size());
  cfg.N = N;
  cfg.c = c;
  cfg.fallback = Fallback::none;

  ExponentialSumOracle parallel_oracle(demo.truth);
  try {
    const RecoveryReport report = multi_phaseshift(parallel_oracle, Partition({1, 1}, N), cfg);
    demo.parallel_outcome = "recovered";
    demo.parallel_recovered = report.recovered.size();
  } catch (const PartialRecoveryError& e) {
    demo.stalled = e.cause() == "stall";
    demo.parallel_outcome = e.cause();
    demo.parallel_recovered = e.report().recovered.size();
  }

  ExponentialSumOracle tilted_oracle(demo.truth);
  demo.tilted = tilted_phaseshift_2d(tilted_oracle, tp, cfg);
  demo.tilted.l2_error = l2_error(demo.truth, demo.tilted.recovered);
  demo.exact = demo.tilted.recovered.size() == demo.truth.size() && *demo.tilted.l2_error < 1e-9;
  for (const auto& [w, a] : demo.truth) demo.exact = demo.exact && demo.tilted.recovered.contains(w);
  return demo;
}

std::vector<CollisionRow> worstcase_table(const Partition& part,
                                          const std::vector<std::int64_t>& ks,
                                          std::int64_t mc_trials, std::uint64_t seed) {
  std::vector<CollisionRow> rows;
  for (std::int64_t k : ks) {
    CollisionBoundInput inp{part.bandwidth(), part, k};
    rows.push_back(collision_row(inp, mc_trials, splitmix64(seed ^ static_cast<std::uint64_t>(k))));
  }
  return rows;
}

}  // namespace sfft
