#include "sfft/index_maps.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

namespace sfft {

namespace {

constexpr std::int64_t kExactDoubleLimit = std::int64_t{1} << 52;

std::int64_t pmod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace

Partition::Partition(std::vector<int> block_dims, std::int64_t N, std::vector<int> order)
    : block_dims_(std::move(block_dims)), order_(std::move(order)), N_(N), dimension_(0) {
  if (block_dims_.empty()) throw std::invalid_argument("partition needs at least one block");
  if (N_ < 2 || N_ % 2 != 0) throw std::invalid_argument("bandwidth N must be even and >= 2");
  offsets_.reserve(block_dims_.size());
  for (int dq : block_dims_) {
    if (dq < 1) throw std::invalid_argument("partition block dimensions must be positive");
    // N^{d_q} < 2^52 keeps unwrapped frequencies exact in doubles.
    std::int64_t bw = 1;
    for (int i = 0; i < dq; ++i) {
      if (bw > kExactDoubleLimit / N_) {
        throw std::invalid_argument("partition block too large: N^" + std::to_string(dq) +
                                    " exceeds 2^52");
      }
      bw *= N_;
    }
    if (bw >= kExactDoubleLimit) {
      throw std::invalid_argument("partition block too large: N^" + std::to_string(dq) +
                                  " exceeds 2^52");
    }
    offsets_.push_back(dimension_);
    dimension_ += dq;
  }
  if (order_.empty()) {
    order_.resize(static_cast<std::size_t>(dimension_));
    std::iota(order_.begin(), order_.end(), 0);
  } else {
    if (static_cast<int>(order_.size()) != dimension_) {
      throw DimensionMismatch("Partition order", dimension_, static_cast<Eigen::Index>(order_.size()));
    }
    std::vector<int> sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < dimension_; ++i) {
      if (sorted[static_cast<std::size_t>(i)] != i) {
        throw std::invalid_argument("partition order is not a permutation");
      }
    }
  }
}

Partition Partition::uniform(int d, int subdim, std::int64_t N) {
  if (subdim < 1 || d < 1 || d % subdim != 0) {
    throw std::invalid_argument("subdim " + std::to_string(subdim) + " does not divide d = " +
                                std::to_string(d) + "; give an explicit partition");
  }
  return Partition(std::vector<int>(static_cast<std::size_t>(d / subdim), subdim), N);
}

std::int64_t Partition::block_bandwidth(int q) const { return ipow(N_, block_dims_[q]); }

std::int64_t Partition::max_block_bandwidth() const {
  return ipow(N_, *std::max_element(block_dims_.begin(), block_dims_.end()));
}

std::int64_t Partition::image_min(int q) const {
  return -(N_ / 2) * ((block_bandwidth(q) - 1) / (N_ - 1));
}

std::int64_t Partition::image_max(int q) const {
  return (N_ / 2 - 1) * ((block_bandwidth(q) - 1) / (N_ - 1));
}

std::string Partition::to_string() const {
  std::ostringstream os;
  const bool uniform =
      std::all_of(block_dims_.begin(), block_dims_.end(), [&](int v) { return v == block_dims_[0]; });
  if (uniform) {
    os << block_dims_[0] << 'x' << block_dims_.size();
  } else {
    for (std::size_t q = 0; q < block_dims_.size(); ++q) os << (q ? "+" : "") << block_dims_[q];
  }
  return os.str();
}

Partition parse_partition(std::string_view text, int d, std::int64_t N) {
  auto parse_int = [&](std::string_view field) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
      throw std::invalid_argument("malformed partition '" + std::string(text) + "'");
    }
    return value;
  };
  std::vector<int> dims;
  if (const std::size_t x = text.find('x'); x != std::string_view::npos) {
    const int subdim = parse_int(text.substr(0, x));
    const int count = parse_int(text.substr(x + 1));
    if (count < 1) throw std::invalid_argument("malformed partition '" + std::string(text) + "'");
    dims.assign(static_cast<std::size_t>(count), subdim);
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t sep = std::min(text.find_first_of(",+", pos), text.size());
      dims.push_back(parse_int(text.substr(pos, sep - pos)));
      pos = sep + 1;
    }
  }
  Partition part(std::move(dims), N);
  if (part.dimension() != d) {
    throw std::invalid_argument("partition '" + std::string(text) + "' sums to " +
                                std::to_string(part.dimension()) + ", expected d = " +
                                std::to_string(d));
  }
  return part;
}

IntVector unwrap_freq(const FrequencyVector& w, const Partition& part) {
  if (w.size() != part.dimension()) {
    throw DimensionMismatch("unwrap_freq", part.dimension(), w.size());
  }
  const std::int64_t N = part.bandwidth();
  IntVector u(part.blocks());
  for (int q = 0; q < part.blocks(); ++q) {
    std::int64_t acc = 0;
    std::int64_t scale = 1;
    for (int j = 0; j < part.block_dim(q); ++j) {
      const std::int64_t digit = w[part.order()[static_cast<std::size_t>(part.offset(q) + j)]];
      if (digit < -N / 2 || digit >= N / 2) {
        throw std::out_of_range("unwrap_freq: component " + std::to_string(digit) +
                                " outside [-N/2, N/2)");
      }
      acc += digit * scale;
      scale *= N;
    }
    u[q] = acc;
  }
  return u;
}

FrequencyVector wrap_freq(const IntVector& u, const Partition& part) {
  if (u.size() != part.blocks()) throw DimensionMismatch("wrap_freq", part.blocks(), u.size());
  const std::int64_t N = part.bandwidth();
  FrequencyVector w(part.dimension());
  for (int q = 0; q < part.blocks(); ++q) {
    std::int64_t v = u[q];
    if (v < part.image_min(q) || v > part.image_max(q)) {
      throw std::out_of_range("wrap_freq: value " + std::to_string(v) + " outside block image [" +
                              std::to_string(part.image_min(q)) + ", " +
                              std::to_string(part.image_max(q)) + "]");
    }
    for (int j = 0; j < part.block_dim(q); ++j) {
      const std::int64_t digit = pmod(v + N / 2, N) - N / 2;
      w[part.order()[static_cast<std::size_t>(part.offset(q) + j)]] = digit;
      v = (v - digit) / N;
    }
  }
  return w;
}

RealVector unwrap_time(const RealVector& t_reduced, const Partition& part) {
  if (t_reduced.size() != part.blocks()) {
    throw DimensionMismatch("unwrap_time", part.blocks(), t_reduced.size());
  }
  RealVector t(part.dimension());
  for (int q = 0; q < part.blocks(); ++q) {
    double scale = 1.0;
    for (int j = 0; j < part.block_dim(q); ++j) {
      t[part.order()[static_cast<std::size_t>(part.offset(q) + j)]] = scale * t_reduced[q];
      scale *= static_cast<double>(part.bandwidth());
    }
  }
  return t;
}

void TiltParams::validate() const {
  if (base <= 0 || height <= 0 || hypo <= 0) {
    throw std::invalid_argument("tilt legs must be positive");
  }
  if (base * base + height * height != hypo * hypo) {
    throw std::invalid_argument("tilt " + to_string() + " is not a Pythagorean triple");
  }
  if (std::gcd(base, hypo) != 1 || std::gcd(height, hypo) != 1) {
    throw std::invalid_argument("tilt " + to_string() + " legs must be coprime to the hypotenuse");
  }
}

std::string TiltParams::to_string() const {
  return "(" + std::to_string(base) + "," + std::to_string(height) + "," + std::to_string(hypo) + ")";
}

const std::array<TiltParams, 4>& TiltParams::enumeration() {
  static const std::array<TiltParams, 4> triples{
      TiltParams{3, 4, 5}, TiltParams{5, 12, 13}, TiltParams{8, 15, 17}, TiltParams{7, 24, 25}};
  return triples;
}

IntVector2 tilt_freq(const IntVector2& w, const TiltParams& tp) {
  return {tp.base * w[0] - tp.height * w[1], tp.height * w[0] + tp.base * w[1]};
}

IntVector2 untilt_freq(const IntVector2& v, const TiltParams& tp) {
  // tilt_freq is hypo times a rotation, so its inverse is the transpose
  // divided by hypo^2.
  const std::int64_t scale = tp.hypo * tp.hypo;
  const std::int64_t x = tp.base * v[0] + tp.height * v[1];
  const std::int64_t y = -tp.height * v[0] + tp.base * v[1];
  if (x % scale != 0 || y % scale != 0) {
    throw NotTiltedLatticePoint("untilt_freq: (" + std::to_string(v[0]) + ", " +
                                std::to_string(v[1]) + ") is not in the image of tilt " +
                                tp.to_string());
  }
  return {x / scale, y / scale};
}

Eigen::Vector2d tilt_time(const Eigen::Vector2d& t, const TiltParams& tp) {
  const auto b = static_cast<double>(tp.base);
  const auto h = static_cast<double>(tp.height);
  return {b * t[0] + h * t[1], -h * t[0] + b * t[1]};
}

ReducedFrame::ReducedFrame(Partition part, std::optional<TiltParams> tilt)
    : part_(std::move(part)), tilt_(tilt) {
  const int d = part_.dimension();
  const int r = part_.blocks();
  if (tilt_) {
    tilt_->validate();
    if (r != 2) throw std::invalid_argument("tilting needs a two-axis reduced problem");
  }

  // Unwrapping part: column q holds N^j at the j-th dimension of block q.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> dense =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(d, r);
  for (int q = 0; q < r; ++q) {
    std::int64_t scale = 1;
    for (int j = 0; j < part_.block_dim(q); ++j) {
      dense(part_.order()[static_cast<std::size_t>(part_.offset(q) + j)], q) = scale;
      scale *= part_.bandwidth();
    }
  }
  lower_.resize(static_cast<std::size_t>(r));
  upper_.resize(static_cast<std::size_t>(r));
  for (int q = 0; q < r; ++q) {
    lower_[static_cast<std::size_t>(q)] = part_.image_min(q);
    upper_[static_cast<std::size_t>(q)] = part_.image_max(q);
  }

  if (tilt_) {
    const std::int64_t b = tilt_->base;
    const std::int64_t h = tilt_->height;
    Eigen::Matrix<std::int64_t, 2, 2> time_map;
    time_map << b, h, -h, b;
    dense = (dense * time_map).eval();
    const std::int64_t lo0 = lower_[0], hi0 = upper_[0], lo1 = lower_[1], hi1 = upper_[1];
    lower_ = {b * lo0 - h * hi1, h * lo0 + b * lo1};
    upper_ = {b * hi0 - h * lo1, h * hi0 + b * hi1};
  }
  embedding_ = dense.sparseView();
  embedding_.makeCompressed();
}

IntVector ReducedFrame::reduce(const FrequencyVector& w) const {
  IntVector u = unwrap_freq(w, part_);
  if (tilt_) u = tilt_freq(IntVector2(u[0], u[1]), *tilt_);
  return u;
}

FrequencyVector ReducedFrame::lift(const IntVector& u) const {
  if (u.size() != reduced_dim()) throw DimensionMismatch("ReducedFrame::lift", reduced_dim(), u.size());
  if (!tilt_) return wrap_freq(u, part_);
  const IntVector2 back = untilt_freq(IntVector2(u[0], u[1]), *tilt_);
  return wrap_freq(IntVector(back), part_);
}

bool ReducedFrame::liftable(const IntVector& u) const {
  if (u.size() != reduced_dim()) return false;
  IntVector v = u;
  if (tilt_) {
    const std::int64_t scale = tilt_->hypo * tilt_->hypo;
    const std::int64_t x = tilt_->base * u[0] + tilt_->height * u[1];
    const std::int64_t y = -tilt_->height * u[0] + tilt_->base * u[1];
    if (x % scale != 0 || y % scale != 0) return false;
    v = IntVector2(x / scale, y / scale);
  }
  for (int q = 0; q < reduced_dim(); ++q) {
    if (v[q] < part_.image_min(q) || v[q] > part_.image_max(q)) return false;
  }
  return true;
}

std::int64_t ReducedFrame::max_abs_bound() const {
  std::int64_t bound = 0;
  for (std::size_t q = 0; q < lower_.size(); ++q) {
    bound = std::max({bound, -lower_[q], upper_[q]});
  }
  return bound;
}

double ReducedFrame::default_epsilon() const {
  double denom = 2.0 * static_cast<double>(part_.max_block_bandwidth());
  if (tilt_) denom *= static_cast<double>(tilt_->hypo * (tilt_->base + tilt_->height));
  return 1.0 / denom;
}

void ReducedFrame::sample_point(RealVector& t, int m, std::int64_t h, std::int64_t p, int n,
                                double eps) const {
  t.setZero(full_dim());
  const auto pd = static_cast<double>(p);
  for (Embedding::InnerIterator it(embedding_, m); it; ++it) {
    const std::int64_t c = pmod(it.value(), p);
    t[it.row()] += static_cast<double>(pmod(c * h, p)) / pd;
  }
  if (n >= 0) {
    for (Embedding::InnerIterator it(embedding_, n); it; ++it) {
      t[it.row()] += static_cast<double>(it.value()) * eps;
    }
  }
}

std::string ReducedFrame::describe() const {
  std::string out = "partition=" + part_.to_string();
  if (!std::is_sorted(part_.order().begin(), part_.order().end())) out += " (reordered)";
  if (tilt_) out += " tilt=" + tilt_->to_string();
  return out;
}

}  // namespace sfft
