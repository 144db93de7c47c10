// Signal model for sparse multidimensional Fourier recovery: integer frequency
// vectors, sparse spectra, exponential-sum signal oracles with sample
// accounting, and the error metric used by the benchmarks.
#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfft {

using Complex = std::complex<double>;
using IntVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using FrequencyVector = IntVector;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

// Thrown when a vector does not have the dimension an operation expects.
class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(const std::string& what, Eigen::Index expected,
                    Eigen::Index actual);
  Eigen::Index expected() const { return expected_; }
  Eigen::Index actual() const { return actual_; }

 private:
  Eigen::Index expected_;
  Eigen::Index actual_;
};

// Lexicographic order so frequency vectors can key ordered containers.
struct LexLess {
  bool operator()(const IntVector& a, const IntVector& b) const {
    const Eigen::Index n = std::min(a.size(), b.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      if (a[i] != b[i]) return a[i] < b[i];
    }
    return a.size() < b.size();
  }
};

struct Mode {
  FrequencyVector frequency;
  Complex coefficient;
};

// A set of modes keyed by frequency vector, all with components in
// [-N/2, N/2). Zero coefficients are never stored.
class SparseSpectrum {
 public:
  using Map = std::map<FrequencyVector, Complex, LexLess>;
  using const_iterator = Map::const_iterator;

  SparseSpectrum(int dimension, std::int64_t bandwidth);

  int dimension() const { return dimension_; }
  std::int64_t bandwidth() const { return bandwidth_; }
  std::size_t size() const { return modes_.size(); }
  bool empty() const { return modes_.empty(); }

  // Stores (w, a), replacing any previous coefficient at w. a == 0 erases.
  void insert(const FrequencyVector& w, Complex a);
  bool contains(const FrequencyVector& w) const;
  std::optional<Complex> find(const FrequencyVector& w) const;
  void erase(const FrequencyVector& w) { modes_.erase(w); }
  // Drops every mode with |a| < floor.
  void prune(double floor);

  bool in_range(const FrequencyVector& w) const;

  const_iterator begin() const { return modes_.begin(); }
  const_iterator end() const { return modes_.end(); }
  std::vector<Mode> modes() const;

  bool operator==(const SparseSpectrum& other) const = default;

 private:
  int dimension_;
  std::int64_t bandwidth_;
  Map modes_;
};

// Phase reduction to [0, 1) before scaling by 2*pi keeps large unwrapped
// phases accurate.
template <typename Scalar>
std::complex<Scalar> unit_phasor(Scalar cycles) {
  const Scalar frac = cycles - std::floor(cycles);
  const Scalar angle = Scalar(2) * std::numbers::pi_v<Scalar> * frac;
  return {std::cos(angle), std::sin(angle)};
}

// sum_j a_j exp(2 pi i w_j . t) with the frequencies stored column-wise by
// dimension (k x d) so zero time components can be skipped.
template <typename Scalar>
std::complex<Scalar> exponential_sum(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& freqs,
    const Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>& coeffs,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& t) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> phase =
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(freqs.rows());
  for (Eigen::Index l = 0; l < t.size(); ++l) {
    if (t[l] != Scalar(0)) phase.noalias() += freqs.col(l) * t[l];
  }
  std::complex<Scalar> sum(0, 0);
  for (Eigen::Index j = 0; j < phase.size(); ++j) {
    sum += coeffs[j] * unit_phasor(phase[j]);
  }
  return sum;
}

// Evaluates a signal at real points of R^d. Implementations count the
// samples they draw; derived views may forward counting to the signal they
// wrap.
class SignalOracle {
 public:
  explicit SignalOracle(int dimension) : dimension_(dimension) {}
  virtual ~SignalOracle() = default;

  int dimension() const { return dimension_; }

  Complex evaluate(const Eigen::Ref<const RealVector>& t) {
    if (t.size() != dimension_) {
      throw DimensionMismatch("SignalOracle::evaluate", dimension_, t.size());
    }
    return evaluate_impl(t);
  }

  virtual std::uint64_t sample_count() const = 0;

 protected:
  virtual Complex evaluate_impl(const Eigen::Ref<const RealVector>& t) = 0;

 private:
  int dimension_;
};

// The synthetic signal f(t) = sum_j a_j exp(2 pi i w_j . t).
class ExponentialSumOracle final : public SignalOracle {
 public:
  explicit ExponentialSumOracle(const SparseSpectrum& spectrum);

  std::uint64_t sample_count() const override {
    return count_.load(std::memory_order_relaxed);
  }

 protected:
  Complex evaluate_impl(const Eigen::Ref<const RealVector>& t) override;

 private:
  Eigen::MatrixXd freqs_;
  ComplexVector coeffs_;
  std::atomic<std::uint64_t> count_{0};
};

// base(t) - sum_{(w,a) in found} a exp(2 pi i w . t). The subtraction is
// analytic, so only base's samples are charged. Holds a reference to base.
class ResidualOracle final : public SignalOracle {
 public:
  ResidualOracle(SignalOracle& base, const SparseSpectrum& found);

  std::uint64_t sample_count() const override { return base_->sample_count(); }

 protected:
  Complex evaluate_impl(const Eigen::Ref<const RealVector>& t) override;

 private:
  SignalOracle* base_;
  Eigen::MatrixXd freqs_;
  ComplexVector coeffs_;
};

Complex evaluate(SignalOracle& oracle, const Eigen::Ref<const RealVector>& t);

ResidualOracle residual_oracle(SignalOracle& base, const SparseSpectrum& found);

// k distinct frequency vectors uniform on ([-N/2, N/2) cap Z)^d with
// coefficients exp(2 pi i theta), theta uniform on [0, 1).
SparseSpectrum random_instance(int d, std::int64_t N, std::int64_t k,
                               std::uint64_t seed);

// Modes are matched by exact frequency equality. Matched pairs contribute
// |a - b|^2, unmatched modes on either side contribute |a|^2.
double l2_error(const SparseSpectrum& truth, const SparseSpectrum& recovered);

struct IterationRecord {
  int iteration = 0;        // 1-based over the whole solve
  int frame_iteration = 0;  // 1-based within the current projection frame
  int axis = 0;             // 0-based projection axis
  std::int64_t prime = 0;
  int accepted = 0;
  std::size_t registry_size = 0;
  double residual_energy = 0.0;  // sum_h |F0[h]|^2 / p^2 after subtraction
  std::string frame;
};

struct RecoveryReport {
  SparseSpectrum recovered{1, 2};
  std::optional<double> l2_error;
  std::uint64_t samples_used = 0;
  std::int64_t elapsed_ticks = 0;  // thread CPU nanoseconds, sampling excluded
  int iterations = 0;
  bool fallback_used = false;
  std::vector<std::int64_t> primes;
  std::vector<IterationRecord> history;
  std::string stop_reason;
};

}  // namespace sfft
