#include "sfft/solver.hpp"

#include <time.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

namespace sfft {

namespace {

std::int64_t thread_cpu_ns() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<std::int64_t>(ts.tv_sec) * 1'000'000'000 + ts.tv_nsec;
}

std::int64_t pmod(std::int64_t a, std::int64_t p) {
  const std::int64_t r = a % p;
  return r < 0 ? r + p : r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Candidate {
  IntVector u;
  Complex a;
};

class Solve {
 public:
  Solve(SignalOracle& oracle, ReducedFrame frame, const SolverConfig& cfg, int tilt_attempts)
      : oracle_(oracle), cfg_(cfg), frame_(std::move(frame)) {
    if (oracle.dimension() != frame_.full_dim()) {
      throw DimensionMismatch("solver oracle", frame_.full_dim(), oracle.dimension());
    }
    if (cfg.k < 0) throw std::invalid_argument("sparsity must be non-negative");
    if (cfg.N != frame_.partition().bandwidth()) {
      throw std::invalid_argument("config bandwidth does not match the partition");
    }
    cfg.validate(frame_.partition().max_block_bandwidth());
    state_.tilt_attempts = tilt_attempts;
    eps_ = frame_epsilon();
  }

  RecoveryReport run() {
    samples_before_ = oracle_.sample_count();
    loop();
    report_.samples_used = oracle_.sample_count() - samples_before_;
    finish_report();
    return report_;
  }

 private:
  void loop() {
    auto fail = [&](const std::string& cause) {
      report_.samples_used = oracle_.sample_count() - samples_before_;
      report_.stop_reason = cause;
      finish_report();
      throw PartialRecoveryError(cause, report_);
    };

    const auto k = static_cast<std::size_t>(cfg_.k);
    while (state_.registry.size() < k) {
      if (state_.iteration >= cfg_.max_iterations) fail("iteration limit");
      ++state_.iteration;
      ++state_.frame_iteration;
      const int r = frame_.reduced_dim();
      const auto k_star = static_cast<std::int64_t>(k - state_.registry.size());
      const std::int64_t p =
          nth_prime_at_least(std::max<std::int64_t>(2, cfg_.c * k_star), state_.frame_iteration);
      state_.axis = (state_.frame_iteration - 1) % r;
      state_.primes.push_back(p);

      const int m = state_.axis;
      std::vector<SampleLine> lines;
      lines.reserve(static_cast<std::size_t>(r) + 1);
      lines.push_back(sample_line(oracle_, frame_, m, std::nullopt, p, eps_));
      for (int n = 0; n < r; ++n) lines.push_back(sample_line(oracle_, frame_, m, n, p, eps_));

      const std::int64_t start = thread_cpu_ns();
      const IterationOutcome outcome = process(lines, p, m, k_star);
      report_.elapsed_ticks += thread_cpu_ns() - start;

      IterationRecord rec;
      rec.iteration = state_.iteration;
      rec.frame_iteration = state_.frame_iteration;
      rec.axis = m;
      rec.prime = p;
      rec.accepted = outcome.accepted;
      rec.registry_size = state_.registry.size();
      rec.residual_energy = outcome.energy;
      rec.frame = frame_.describe();
      if (cfg_.observer) cfg_.observer(rec);
      report_.history.push_back(std::move(rec));

      if (outcome.empty) {
        report_.stop_reason = "empty residual";
        return;
      }
      state_.stall_run = outcome.accepted == 0 ? state_.stall_run + 1 : 0;
      // A single axis has no projection collisions; new primes resolve the
      // modular ones, so only the iteration limit applies.
      if (r == 1) continue;
      const int stall_limit = cfg_.stall_limit.value_or(2 * r);
      if (state_.stall_run < stall_limit) continue;

      if (cfg_.fallback == Fallback::none) fail("stall");
      FallbackChoice choice = [&]() -> FallbackChoice {
        try {
          return stall_fallback(state_, cfg_, frame_.partition());
        } catch (const FallbackExhausted&) {
          fail("fallback exhausted");
        }
        return frame_.partition();
      }();
      const std::int64_t start_switch = thread_cpu_ns();
      if (auto* tp = std::get_if<TiltParams>(&choice)) {
        ++state_.tilt_attempts;
        switch_frame(ReducedFrame(frame_.partition(), *tp));
      } else {
        ++state_.reshuffle_attempts;
        switch_frame(ReducedFrame(std::get<Partition>(std::move(choice))));
      }
      report_.elapsed_ticks += thread_cpu_ns() - start_switch;
    }
    if (report_.stop_reason.empty()) report_.stop_reason = "registry full";
  }

  struct IterationOutcome {
    int accepted = 0;
    bool empty = false;
    double energy = 0.0;
  };

  IterationOutcome process(const std::vector<SampleLine>& lines, std::int64_t p, int m,
                           std::int64_t k_star) {
    const int r = frame_.reduced_dim();
    const auto pd = static_cast<double>(p);
    const DftPlan& plan = plan_for(p);

    std::vector<ComplexVector> bins;
    bins.reserve(lines.size());
    for (const auto& line : lines) bins.push_back(plan.forward(line.values));

    // Remove what the registry already explains, directly in the bin domain.
    for (const auto& [u, a] : state_.registry) {
      const std::int64_t b = pmod(u[m], p);
      bins[0][b] -= pd * a;
      for (int n = 0; n < r; ++n) bins[n + 1][b] -= pd * a * unit_phasor(eps_ * static_cast<double>(u[n]));
    }

    IterationOutcome out;
    double line_max = 0.0;
    for (const auto& f : bins) line_max = std::max(line_max, f.cwiseAbs().maxCoeff());
    amplitude_scale_ = std::max(amplitude_scale_, line_max / pd);
    const double floor = cfg_.empty_bin_fraction * pd * amplitude_scale_;
    out.energy = bins[0].squaredNorm() / (pd * pd);
    if (line_max <= floor) {
      out.empty = true;
      return out;
    }

    const BinSpectrum unshifted = make_bin_spectrum(std::move(bins[0]));
    std::vector<BinSpectrum> shifted(static_cast<std::size_t>(r));
    for (int n = 0; n < r; ++n) shifted[static_cast<std::size_t>(n)].bins = std::move(bins[n + 1]);

    std::vector<Candidate> accepted;
    const auto top = std::min<std::size_t>(static_cast<std::size_t>(k_star), unshifted.order.size());
    for (std::size_t idx = 0; idx < top; ++idx) {
      const std::int64_t h = unshifted.order[idx];
      if (std::abs(unshifted.bins[h]) <= floor) break;
      if (auto c = decode_bin(unshifted, shifted, h, p, m, floor)) accepted.push_back(std::move(*c));
    }

    for (auto& c : accepted) {
      auto it = state_.registry.find(c.u);
      if (it != state_.registry.end()) {
        it->second += c.a;
        if (std::abs(it->second) < cfg_.prune_floor) state_.registry.erase(it);
        ++out.accepted;
      } else if (state_.registry.size() < static_cast<std::size_t>(cfg_.k) &&
                 std::abs(c.a) >= cfg_.prune_floor) {
        state_.registry.emplace(std::move(c.u), c.a);
        ++out.accepted;
      }
    }
    std::erase_if(state_.registry,
                  [&](const auto& kv) { return std::abs(kv.second) < cfg_.prune_floor; });
    return out;
  }

  std::optional<Candidate> decode_bin(const BinSpectrum& unshifted,
                                      const std::vector<BinSpectrum>& shifted, std::int64_t h,
                                      std::int64_t p, int m, double floor) const {
    const int r = frame_.reduced_dim();
    for (const auto& s : shifted) {
      if (!collision_test(unshifted, s, h, cfg_.tol, floor)) return std::nullopt;
    }
    IntVector u(r);
    for (int n = 0; n < r; ++n) {
      const double v = decode_frequency(unshifted, shifted[static_cast<std::size_t>(n)], h, eps_, floor);
      const double rounded = std::round(v);
      if (std::abs(v - rounded) > cfg_.rounding_tolerance) return std::nullopt;
      u[n] = static_cast<std::int64_t>(rounded);
      if (u[n] < frame_.lower(n) || u[n] > frame_.upper(n)) return std::nullopt;
    }
    if (pmod(u[m], p) != h || !frame_.liftable(u)) return std::nullopt;

    const Complex a = decode_coefficient(unshifted, h, p);
    const auto pd = static_cast<double>(p);
    for (int n = 0; n < r; ++n) {
      const Complex fn = shifted[static_cast<std::size_t>(n)].bins[h];
      const Complex predicted = pd * a * unit_phasor(eps_ * static_cast<double>(u[n]));
      if (std::abs(predicted - fn) > 2.0 * cfg_.tol * std::abs(fn)) return std::nullopt;
    }
    return Candidate{std::move(u), a};
  }

  const DftPlan& plan_for(std::int64_t p) {
    auto it = plans_.find(p);
    if (it == plans_.end()) it = plans_.emplace(p, DftPlan(p)).first;
    return it->second;
  }

  double frame_epsilon() const {
    const double automatic = frame_.default_epsilon();
    // Validation makes an explicit shift fit the first frame; later frames
    // may have wider axes.
    return cfg_.eps ? std::min(*cfg_.eps, automatic) : automatic;
  }

  void switch_frame(ReducedFrame next) {
    SolveState::Registry converted;
    for (const auto& [u, a] : state_.registry) converted.emplace(next.reduce(frame_.lift(u)), a);
    state_.registry = std::move(converted);
    frame_ = std::move(next);
    eps_ = frame_epsilon();
    state_.frame_iteration = 0;
    state_.stall_run = 0;
    report_.fallback_used = true;
  }

  void finish_report() {
    SparseSpectrum out(frame_.full_dim(), cfg_.N);
    for (const auto& [u, a] : state_.registry) out.insert(frame_.lift(u), a);
    report_.recovered = std::move(out);
    report_.iterations = state_.iteration;
    report_.primes = state_.primes;
  }

  SignalOracle& oracle_;
  const SolverConfig& cfg_;
  ReducedFrame frame_;
  SolveState state_;
  RecoveryReport report_;
  std::uint64_t samples_before_ = 0;
  double eps_ = 0.0;
  double amplitude_scale_ = 0.0;
  std::map<std::int64_t, DftPlan> plans_;
};

int tilt_index(const TiltParams& tp) {
  const auto& all = TiltParams::enumeration();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] == tp) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

Fallback parse_fallback(std::string_view text) {
  if (text == "none") return Fallback::none;
  if (text == "reshuffle") return Fallback::reshuffle;
  if (text == "tilt") return Fallback::tilt;
  throw std::invalid_argument("unknown fallback '" + std::string(text) + "'");
}

std::string to_string(Fallback fallback) {
  switch (fallback) {
    case Fallback::none: return "none";
    case Fallback::reshuffle: return "reshuffle";
    case Fallback::tilt: return "tilt";
  }
  return "none";
}

void SolverConfig::validate(std::int64_t max_block_bandwidth) const {
  if (c < 1) throw std::invalid_argument("c must be at least 1");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (stall_limit && *stall_limit < 1) throw std::invalid_argument("stall_limit must be at least 1");
  if (max_reshuffles < 0) throw std::invalid_argument("max_reshuffles must be non-negative");
  if (eps && !(*eps > 0.0 && *eps * static_cast<double>(max_block_bandwidth) <= 0.5)) {
    throw std::invalid_argument("eps must satisfy 0 < eps * N^{d_max} <= 1/2");
  }
}

PartialRecoveryError::PartialRecoveryError(std::string cause, RecoveryReport report)
    : std::runtime_error("partial recovery: " + cause + " after " +
                         std::to_string(report.iterations) + " iterations, " +
                         std::to_string(report.recovered.size()) + " modes recovered"),
      cause_(std::move(cause)),
      report_(std::move(report)) {}

RecoveryReport phaseshift_1d(SignalOracle& oracle, const SolverConfig& cfg) {
  if (oracle.dimension() != 1) throw DimensionMismatch("phaseshift_1d oracle", 1, oracle.dimension());
  return Solve(oracle, ReducedFrame(Partition({1}, cfg.N)), cfg, 0).run();
}

RecoveryReport multi_phaseshift(SignalOracle& oracle, const Partition& part,
                                const SolverConfig& cfg) {
  return Solve(oracle, ReducedFrame(part), cfg, 0).run();
}

RecoveryReport tilted_phaseshift_2d(SignalOracle& oracle, const TiltParams& tp,
                                    const SolverConfig& cfg) {
  if (oracle.dimension() != 2) {
    throw DimensionMismatch("tilted_phaseshift_2d oracle", 2, oracle.dimension());
  }
  SolverConfig tilted = cfg;
  if (tilted.fallback != Fallback::none) tilted.fallback = Fallback::tilt;
  return Solve(oracle, ReducedFrame(Partition({1, 1}, cfg.N), tp), tilted, tilt_index(tp) + 1)
      .run();
}

FallbackChoice stall_fallback(const SolveState& state, const SolverConfig& cfg,
                              const Partition& part) {
  if (cfg.fallback == Fallback::none) throw FallbackExhausted("fallback disabled");
  if (part.blocks() == 2 && cfg.fallback == Fallback::tilt) {
    const auto& all = TiltParams::enumeration();
    if (state.tilt_attempts < 0 || state.tilt_attempts >= static_cast<int>(all.size())) {
      throw FallbackExhausted("all tilt triples tried");
    }
    return all[static_cast<std::size_t>(state.tilt_attempts)];
  }
  if (state.reshuffle_attempts >= cfg.max_reshuffles) {
    throw FallbackExhausted("reshuffle limit reached");
  }
  // Reordering singleton blocks yields the same projections; merge the last
  // two blocks instead.
  const auto& dims = part.block_dims();
  if (std::all_of(dims.begin(), dims.end(), [](int dq) { return dq == 1; })) {
    if (dims.size() < 2) throw FallbackExhausted("no coarser partition");
    std::vector<int> merged(dims.begin(), dims.end() - 1);
    merged.back() = 2;
    try {
      return Partition(std::move(merged), part.bandwidth(), part.order());
    } catch (const std::invalid_argument&) {
      throw FallbackExhausted("coarser partition exceeds precision");
    }
  }
  std::vector<int> order(static_cast<std::size_t>(part.dimension()));
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t s = splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(state.reshuffle_attempts) + 1));
  for (std::size_t i = order.size(); i > 1; --i) {
    s = splitmix64(s);
    std::swap(order[i - 1], order[s % i]);
  }
  return Partition(part.block_dims(), part.bandwidth(), std::move(order));
}

double max_residual(SignalOracle& oracle, const SparseSpectrum& recovered, int probes,
                    std::uint64_t seed) {
  ResidualOracle residual(oracle, recovered);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RealVector t(oracle.dimension());
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    for (Eigen::Index l = 0; l < t.size(); ++l) t[l] = unit(rng);
    worst = std::max(worst, std::abs(residual.evaluate(t)));
  }
  return worst;
}

}  // namespace sfft
