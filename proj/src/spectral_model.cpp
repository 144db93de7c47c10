#include "sfft/spectral_model.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace sfft {

namespace {

std::string mismatch_message(const std::string& what, Eigen::Index expected,
                             Eigen::Index actual) {
  std::ostringstream os;
  os << what << ": dimension mismatch (expected " << expected << ", got "
     << actual << ")";
  return os.str();
}

void pack(const SparseSpectrum& spectrum, Eigen::MatrixXd& freqs,
          ComplexVector& coeffs) {
  const auto k = static_cast<Eigen::Index>(spectrum.size());
  freqs.resize(k, spectrum.dimension());
  coeffs.resize(k);
  Eigen::Index j = 0;
  for (const auto& [w, a] : spectrum) {
    freqs.row(j) = w.cast<double>().transpose();
    coeffs[j] = a;
    ++j;
  }
}

// Exact N^d when it fits in 62 bits.
std::optional<std::int64_t> lattice_size(int d, std::int64_t N) {
  std::int64_t size = 1;
  for (int i = 0; i < d; ++i) {
    if (size > (std::int64_t{1} << 62) / N) return std::nullopt;
    size *= N;
  }
  return size;
}

}  // namespace

DimensionMismatch::DimensionMismatch(const std::string& what,
                                     Eigen::Index expected, Eigen::Index actual)
    : std::invalid_argument(mismatch_message(what, expected, actual)),
      expected_(expected),
      actual_(actual) {}

SparseSpectrum::SparseSpectrum(int dimension, std::int64_t bandwidth)
    : dimension_(dimension), bandwidth_(bandwidth) {
  if (dimension < 1) throw std::invalid_argument("spectrum dimension must be >= 1");
  if (bandwidth < 2 || bandwidth % 2 != 0) {
    throw std::invalid_argument("spectrum bandwidth must be even and >= 2");
  }
}

bool SparseSpectrum::in_range(const FrequencyVector& w) const {
  const std::int64_t half = bandwidth_ / 2;
  return (w.array() >= -half).all() && (w.array() < half).all();
}

void SparseSpectrum::insert(const FrequencyVector& w, Complex a) {
  if (w.size() != dimension_) {
    throw DimensionMismatch("SparseSpectrum::insert", dimension_, w.size());
  }
  if (!in_range(w)) {
    throw std::out_of_range("SparseSpectrum::insert: frequency outside [-N/2, N/2)");
  }
  if (a == Complex(0.0, 0.0)) {
    modes_.erase(w);
    return;
  }
  modes_.insert_or_assign(w, a);
}

bool SparseSpectrum::contains(const FrequencyVector& w) const {
  return modes_.count(w) != 0;
}

std::optional<Complex> SparseSpectrum::find(const FrequencyVector& w) const {
  auto it = modes_.find(w);
  if (it == modes_.end()) return std::nullopt;
  return it->second;
}

void SparseSpectrum::prune(double floor) {
  std::erase_if(modes_, [floor](const auto& kv) { return std::abs(kv.second) < floor; });
}

std::vector<Mode> SparseSpectrum::modes() const {
  std::vector<Mode> out;
  out.reserve(modes_.size());
  for (const auto& [w, a] : modes_) out.push_back({w, a});
  return out;
}

ExponentialSumOracle::ExponentialSumOracle(const SparseSpectrum& spectrum)
    : SignalOracle(spectrum.dimension()) {
  pack(spectrum, freqs_, coeffs_);
}

Complex ExponentialSumOracle::evaluate_impl(const Eigen::Ref<const RealVector>& t) {
  count_.fetch_add(1, std::memory_order_relaxed);
  return exponential_sum<double>(freqs_, coeffs_, t);
}

ResidualOracle::ResidualOracle(SignalOracle& base, const SparseSpectrum& found)
    : SignalOracle(base.dimension()), base_(&base) {
  if (found.dimension() != base.dimension()) {
    throw DimensionMismatch("residual_oracle", base.dimension(), found.dimension());
  }
  pack(found, freqs_, coeffs_);
}

Complex ResidualOracle::evaluate_impl(const Eigen::Ref<const RealVector>& t) {
  const Complex value = base_->evaluate(t);
  if (coeffs_.size() == 0) return value;
  return value - exponential_sum<double>(freqs_, coeffs_, t);
}

Complex evaluate(SignalOracle& oracle, const Eigen::Ref<const RealVector>& t) {
  return oracle.evaluate(t);
}

ResidualOracle residual_oracle(SignalOracle& base, const SparseSpectrum& found) {
  return ResidualOracle(base, found);
}

SparseSpectrum random_instance(int d, std::int64_t N, std::int64_t k,
                               std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("random_instance: k must be >= 1");
  SparseSpectrum spectrum(d, N);
  const auto size = lattice_size(d, N);
  if (size && k > *size) {
    throw std::invalid_argument("random_instance: k exceeds N^d distinct frequency vectors");
  }

  std::mt19937_64 rng(seed);
  std::vector<FrequencyVector> picked;
  picked.reserve(static_cast<std::size_t>(k));

  if (size && *size <= (std::int64_t{1} << 22)) {
    // Floyd's sampling of k distinct linear indices.
    std::set<std::int64_t> chosen;
    std::vector<std::int64_t> order;
    for (std::int64_t j = *size - k; j < *size; ++j) {
      std::uniform_int_distribution<std::int64_t> pick(0, j);
      const std::int64_t t = pick(rng);
      const std::int64_t v = chosen.insert(t).second ? t : j;
      if (v == j) chosen.insert(j);
      order.push_back(v);
    }
    for (std::int64_t idx : order) {
      FrequencyVector w(d);
      for (int l = 0; l < d; ++l) {
        w[l] = idx % N - N / 2;
        idx /= N;
      }
      picked.push_back(std::move(w));
    }
  } else {
    std::uniform_int_distribution<std::int64_t> digit(-N / 2, N / 2 - 1);
    std::set<FrequencyVector, LexLess> seen;
    while (static_cast<std::int64_t>(picked.size()) < k) {
      FrequencyVector w(d);
      for (int l = 0; l < d; ++l) w[l] = digit(rng);
      if (seen.insert(w).second) picked.push_back(std::move(w));
    }
  }

  std::uniform_real_distribution<double> angle(0.0, 1.0);
  for (const auto& w : picked) {
    spectrum.insert(w, unit_phasor(angle(rng)));
  }
  return spectrum;
}

double l2_error(const SparseSpectrum& truth, const SparseSpectrum& recovered) {
  double sum = 0.0;
  for (const auto& [w, a] : truth) {
    const auto b = recovered.find(w);
    sum += std::norm(b ? a - *b : a);
  }
  for (const auto& [w, b] : recovered) {
    if (!truth.contains(w)) sum += std::norm(b);
  }
  return std::sqrt(sum);
}

}  // namespace sfft
