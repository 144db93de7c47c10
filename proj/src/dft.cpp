#include "sfft/dft.hpp"

#include <numeric>
#include <string>

namespace sfft {

namespace {

constexpr double kArgBoundarySnap = 1e-12;

double resolve_floor(const BinSpectrum& unshifted, std::optional<double> floor) {
  if (floor) return *floor;
  return kDefaultEmptyBinFraction * unshifted.bins.cwiseAbs().maxCoeff();
}

void check_bin(const BinSpectrum& spectrum, std::int64_t h) {
  if (h < 0 || h >= spectrum.p()) {
    throw std::out_of_range("bin index " + std::to_string(h) + " outside [0, " +
                            std::to_string(spectrum.p()) + ")");
  }
}

void check_pair(const BinSpectrum& unshifted, const BinSpectrum& shifted, std::int64_t h,
                double floor) {
  if (unshifted.p() != shifted.p()) {
    throw DimensionMismatch("bin spectra", unshifted.p(), shifted.p());
  }
  check_bin(unshifted, h);
  if (std::abs(unshifted.bins[h]) <= floor) {
    throw EmptyBinError("bin " + std::to_string(h) + " is empty");
  }
}

}  // namespace

BinSpectrum make_bin_spectrum(ComplexVector bins) {
  BinSpectrum out;
  out.order.resize(static_cast<std::size_t>(bins.size()));
  std::iota(out.order.begin(), out.order.end(), std::int64_t{0});
  const Eigen::VectorXd mag = bins.cwiseAbs();
  std::stable_sort(out.order.begin(), out.order.end(),
                   [&](std::int64_t a, std::int64_t b) { return mag[a] > mag[b]; });
  out.bins = std::move(bins);
  return out;
}

BinSpectrum dft(const SampleLine& line, const DftPlan& plan) {
  return make_bin_spectrum(plan.forward(line.values));
}

BinSpectrum dft(const SampleLine& line) {
  return dft(line, DftPlan(line.values.size()));
}

bool collision_test(const BinSpectrum& unshifted, const BinSpectrum& shifted, std::int64_t h,
                    double tol, std::optional<double> floor) {
  check_pair(unshifted, shifted, h, resolve_floor(unshifted, floor));
  const double ratio = std::abs(shifted.bins[h]) / std::abs(unshifted.bins[h]);
  return std::abs(ratio - 1.0) < tol;
}

double decode_frequency(const BinSpectrum& unshifted, const BinSpectrum& shifted, std::int64_t h,
                        double eps, std::optional<double> floor) {
  check_pair(unshifted, shifted, h, resolve_floor(unshifted, floor));
  // Arg in [-pi, pi); a ratio within rounding of -1 belongs to the lower end.
  double angle = std::arg(shifted.bins[h] / unshifted.bins[h]);
  if (angle >= std::numbers::pi - kArgBoundarySnap) angle -= 2.0 * std::numbers::pi;
  return angle / (2.0 * std::numbers::pi * eps);
}

Complex decode_coefficient(const BinSpectrum& unshifted, std::int64_t h, std::int64_t p) {
  check_bin(unshifted, h);
  return unshifted.bins[h] / static_cast<double>(p);
}

bool is_prime(std::int64_t x) {
  if (x < 2) return false;
  if (x < 4) return true;
  if (x % 2 == 0 || x % 3 == 0) return false;
  for (std::int64_t f = 5; f * f <= x; f += 6) {
    if (x % f == 0 || x % (f + 2) == 0) return false;
  }
  return true;
}

std::int64_t next_prime_at_least(std::int64_t x) {
  if (x < 2) throw std::invalid_argument("next_prime_at_least: x must be >= 2");
  while (!is_prime(x)) ++x;
  return x;
}

std::int64_t nth_prime_at_least(std::int64_t x, int i) {
  if (i < 1) throw std::invalid_argument("nth_prime_at_least: i must be >= 1");
  std::int64_t p = next_prime_at_least(x);
  for (int j = 1; j < i; ++j) p = next_prime_at_least(p + 1);
  return p;
}

SampleLine sample_line(SignalOracle& oracle, const ReducedFrame& frame, int m,
                       std::optional<int> n, std::int64_t p, double eps) {
  if (oracle.dimension() != frame.full_dim()) {
    throw DimensionMismatch("sample_line", frame.full_dim(), oracle.dimension());
  }
  const int r = frame.reduced_dim();
  if (m < 0 || m >= r || (n && (*n < 0 || *n >= r))) {
    throw std::out_of_range("sample_line: axis outside [0, " + std::to_string(r) + ")");
  }
  if (p < 2 || !is_prime(p)) throw std::invalid_argument("sample_line: p must be prime");
  if (n && !(eps > 0.0)) throw std::invalid_argument("sample_line: eps must be positive");
  if (n && eps * static_cast<double>(frame.partition().max_block_bandwidth()) > 1.0) {
    throw std::invalid_argument("sample_line: eps exceeds 1/B for the largest block bandwidth B");
  }

  SampleLine line;
  line.values.resize(p);
  line.p = p;
  line.projection_axis = m;
  line.shift_axis = n;
  line.epsilon = n ? eps : 0.0;
  RealVector t(frame.full_dim());
  for (std::int64_t h = 0; h < p; ++h) {
    frame.sample_point(t, m, h, p, n.value_or(-1), eps);
    line.values[h] = oracle.evaluate(t);
  }
  return line;
}

SampleLine sample_line(SignalOracle& oracle, const Partition& part, int m, std::optional<int> n,
                       std::int64_t p, double eps) {
  return sample_line(oracle, ReducedFrame(part), m, n, p, eps);
}

}  // namespace sfft
