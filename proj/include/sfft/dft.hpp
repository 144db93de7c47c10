// Prime-length sample lines, their discrete Fourier transforms, and the
// per-bin collision test and phase-shift decoding.
//
// For a line of p samples of sum_j a_j exp(2 pi i (u_j h/p + eps v_j)) the
// unnormalised forward transform puts
//
//   F[h] = p * sum_{u_j == h (mod p)} a_j exp(2 pi i eps v_j)
//
// in bin h. A bin holding a single mode has |F_eps[h]| == |F_0[h]|, and then
// v = Arg(F_eps[h] / F_0[h]) / (2 pi eps), a = F_0[h] / p.
#pragma once

#include "sfft/index_maps.hpp"
#include "sfft/spectral_model.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace sfft {

template <typename Scalar>
using ComplexVectorT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

// Direct O(p^2) transform, bins[h] = sum_n x[n] exp(-2 pi i h n / p). The
// product h*n is reduced modulo p before it reaches floating point.
template <typename Scalar>
ComplexVectorT<Scalar> dft_direct(const Eigen::Ref<const ComplexVectorT<Scalar>>& x) {
  const Eigen::Index p = x.size();
  ComplexVectorT<Scalar> out = ComplexVectorT<Scalar>::Zero(p);
  for (Eigen::Index h = 0; h < p; ++h) {
    std::complex<Scalar> acc(0, 0);
    for (Eigen::Index n = 0; n < p; ++n) {
      const Scalar angle = -Scalar(2) * std::numbers::pi_v<Scalar> *
                           static_cast<Scalar>((h * n) % p) / static_cast<Scalar>(p);
      acc += x[n] * std::complex<Scalar>(std::cos(angle), std::sin(angle));
    }
    out[h] = acc;
  }
  return out;
}

// Arbitrary-length forward DFT via Bluestein's chirp-z identity on a
// power-of-two convolution. Lengths below kDirectCutoff use the direct sum.
// A plan is not safe to share between threads.
template <typename Scalar>
class BluesteinPlan {
 public:
  using Vector = ComplexVectorT<Scalar>;
  static constexpr Eigen::Index kDirectCutoff = 32;

  explicit BluesteinPlan(Eigen::Index n) : n_(n) {
    if (n < 1) throw std::invalid_argument("BluesteinPlan: length must be positive");
    if (n < kDirectCutoff) {
      roots_.resize(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar angle = -Scalar(2) * std::numbers::pi_v<Scalar> * static_cast<Scalar>(j) /
                             static_cast<Scalar>(n);
        roots_[j] = {std::cos(angle), std::sin(angle)};
      }
      return;
    }
    m_ = 1;
    while (m_ < 2 * n - 1) m_ <<= 1;

    // chirp[j] = exp(-pi i j^2 / n); j^2 is reduced modulo 2n exactly.
    chirp_.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto j2 = static_cast<std::int64_t>(j) * j % (2 * static_cast<std::int64_t>(n));
      const Scalar angle =
          -std::numbers::pi_v<Scalar> * static_cast<Scalar>(j2) / static_cast<Scalar>(n);
      chirp_[j] = {std::cos(angle), std::sin(angle)};
    }
    Vector kernel = Vector::Zero(m_);
    kernel[0] = std::conj(chirp_[0]);
    for (Eigen::Index j = 1; j < n; ++j) {
      kernel[j] = std::conj(chirp_[j]);
      kernel[m_ - j] = std::conj(chirp_[j]);
    }
    fft_.fwd(kernel_hat_, kernel);
  }

  Eigen::Index size() const { return n_; }

  Vector forward(const Eigen::Ref<const Vector>& x) const {
    if (x.size() != n_) throw DimensionMismatch("BluesteinPlan::forward", n_, x.size());
    if (n_ < kDirectCutoff) {
      Vector out(n_);
      for (Eigen::Index h = 0; h < n_; ++h) {
        std::complex<Scalar> acc(0, 0);
        for (Eigen::Index j = 0; j < n_; ++j) acc += x[j] * roots_[(h * j) % n_];
        out[h] = acc;
      }
      return out;
    }
    Vector work = Vector::Zero(m_);
    work.head(n_) = x.cwiseProduct(chirp_);
    Vector spectrum;
    fft_.fwd(spectrum, work);
    spectrum = spectrum.cwiseProduct(kernel_hat_);
    fft_.inv(work, spectrum);  // scaled by 1/m
    return work.head(n_).cwiseProduct(chirp_);
  }

 private:
  Eigen::Index n_;
  Eigen::Index m_ = 0;
  Vector roots_;
  Vector chirp_;
  Vector kernel_hat_;
  mutable Eigen::FFT<Scalar> fft_;  // caches twiddles per length
};

using DftPlan = BluesteinPlan<double>;

// p samples of a reduced signal along projection axis m, optionally shifted
// by epsilon along axis n.
struct SampleLine {
  ComplexVector values;
  std::int64_t p = 0;
  int projection_axis = 0;
  std::optional<int> shift_axis;
  double epsilon = 0.0;
};

// Transform of a sample line plus bin indices sorted by descending magnitude
// (ties broken by index).
struct BinSpectrum {
  ComplexVector bins;
  std::vector<std::int64_t> order;

  std::int64_t p() const { return static_cast<std::int64_t>(bins.size()); }
};

class EmptyBinError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

BinSpectrum make_bin_spectrum(ComplexVector bins);

BinSpectrum dft(const SampleLine& line);
BinSpectrum dft(const SampleLine& line, const DftPlan& plan);

// Bins at or below this fraction of the largest unshifted bin count as empty
// when no explicit floor is given.
inline constexpr double kDefaultEmptyBinFraction = 1e-8;

// true when | |F_eps[h]| / |F_0[h]| - 1 | < tol, i.e. no collision detected.
// Throws EmptyBinError when |F_0[h]| <= floor.
bool collision_test(const BinSpectrum& unshifted, const BinSpectrum& shifted, std::int64_t h,
                    double tol, std::optional<double> floor = std::nullopt);

// Arg(F_eps[h] / F_0[h]) / (2 pi eps), with Arg in [-pi, pi).
double decode_frequency(const BinSpectrum& unshifted, const BinSpectrum& shifted, std::int64_t h,
                        double eps, std::optional<double> floor = std::nullopt);

Complex decode_coefficient(const BinSpectrum& unshifted, std::int64_t h, std::int64_t p);

bool is_prime(std::int64_t x);
std::int64_t next_prime_at_least(std::int64_t x);
// The i-th (1-based) prime >= x.
std::int64_t nth_prime_at_least(std::int64_t x, int i);

// values[h] = oracle(L((h/p) e_m + eps e_n)) for h = 0..p-1; exactly p
// oracle evaluations.
SampleLine sample_line(SignalOracle& oracle, const ReducedFrame& frame, int m,
                       std::optional<int> n, std::int64_t p, double eps);
SampleLine sample_line(SignalOracle& oracle, const Partition& part, int m, std::optional<int> n,
                       std::int64_t p, double eps);

}  // namespace sfft
