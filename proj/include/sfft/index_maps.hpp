// Bijective coordinate maps between the d-dimensional frequency box and the
// reduced problems the solver works on: (partial) unwrapping of blocks of
// dimensions into single axes, and integer-scaled rational rotation of a 2D
// frequency plane. Every frequency map has a dual time map with
// map_freq(w) . t == w . map_time(t), which is how frequency projections are
// realised by choosing sample points.
#pragma once

#include "sfft/spectral_model.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sfft {

using IntVector2 = Eigen::Matrix<std::int64_t, 2, 1>;

// d = d_1 + ... + d_r. Block q collects the original dimensions
// order[offset_q], ..., order[offset_q + d_q - 1] and has bandwidth N^{d_q}.
// order defaults to the identity.
class Partition {
 public:
  Partition(std::vector<int> block_dims, std::int64_t N, std::vector<int> order = {});

  // d_1 repeated d / d_1 times; throws unless d_1 divides d.
  static Partition uniform(int d, int subdim, std::int64_t N);

  int dimension() const { return dimension_; }
  int blocks() const { return static_cast<int>(block_dims_.size()); }
  std::int64_t bandwidth() const { return N_; }
  const std::vector<int>& block_dims() const { return block_dims_; }
  const std::vector<int>& order() const { return order_; }
  int offset(int q) const { return offsets_[q]; }
  int block_dim(int q) const { return block_dims_[q]; }

  std::int64_t block_bandwidth(int q) const;
  std::int64_t max_block_bandwidth() const;
  // Exact image interval of block q under unwrap_freq.
  std::int64_t image_min(int q) const;
  std::int64_t image_max(int q) const;

  // "5x20" for uniform partitions, "2+3+3" otherwise.
  std::string to_string() const;

  bool operator==(const Partition& other) const {
    return block_dims_ == other.block_dims_ && N_ == other.N_ && order_ == other.order_;
  }

 private:
  std::vector<int> block_dims_;
  std::vector<int> offsets_;
  std::vector<int> order_;
  std::int64_t N_;
  int dimension_;
};

// Parses "5,5,5", "2+3+3" or "5x3" for a d-dimensional problem.
Partition parse_partition(std::string_view text, int d, std::int64_t N);

IntVector unwrap_freq(const FrequencyVector& w, const Partition& part);
FrequencyVector wrap_freq(const IntVector& u, const Partition& part);
RealVector unwrap_time(const RealVector& t_reduced, const Partition& part);

// sin = height / hypo, cos = base / hypo for a primitive Pythagorean triple.
struct TiltParams {
  std::int64_t base = 3;
  std::int64_t height = 4;
  std::int64_t hypo = 5;

  void validate() const;
  bool operator==(const TiltParams&) const = default;
  std::string to_string() const;

  // Fallback order, smallest hypotenuse first.
  static const std::array<TiltParams, 4>& enumeration();
};

class NotTiltedLatticePoint : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

IntVector2 tilt_freq(const IntVector2& w, const TiltParams& tp);
IntVector2 untilt_freq(const IntVector2& v, const TiltParams& tp);
Eigen::Vector2d tilt_time(const Eigen::Vector2d& t, const TiltParams& tp);

// Integer d x r matrix L with reduced frequencies u = L^T w and full sample
// points t = L t_reduced.
using Embedding = Eigen::SparseMatrix<std::int64_t, Eigen::ColMajor>;

// A complete reduction: partition (with dimension order), optionally
// followed by a tilt of the resulting 2D plane.
class ReducedFrame {
 public:
  explicit ReducedFrame(Partition part, std::optional<TiltParams> tilt = std::nullopt);

  int full_dim() const { return part_.dimension(); }
  int reduced_dim() const { return part_.blocks(); }
  const Partition& partition() const { return part_; }
  const std::optional<TiltParams>& tilt() const { return tilt_; }
  const Embedding& embedding() const { return embedding_; }

  IntVector reduce(const FrequencyVector& w) const;
  // Throws std::out_of_range or NotTiltedLatticePoint for points outside the
  // image of reduce().
  FrequencyVector lift(const IntVector& u) const;
  bool liftable(const IntVector& u) const;

  std::int64_t lower(int q) const { return lower_[q]; }
  std::int64_t upper(int q) const { return upper_[q]; }
  // max |u_q| over the image, over all axes.
  std::int64_t max_abs_bound() const;

  // Shift used when none is configured: 1/(2 N^{d_max}) for plain
  // partitions, further divided by hypo * (base + height) for tilted frames.
  double default_epsilon() const;

  // t = L((h/p) e_m + eps e_n) with the (h/p) part reduced modulo 1 in exact
  // integer arithmetic; the signal has integer frequencies so this does not
  // change its value. n < 0 means no shift.
  void sample_point(RealVector& t, int m, std::int64_t h, std::int64_t p, int n,
                    double eps) const;

  std::string describe() const;

 private:
  Partition part_;
  std::optional<TiltParams> tilt_;
  Embedding embedding_;
  std::vector<std::int64_t> lower_;
  std::vector<std::int64_t> upper_;
};

}  // namespace sfft
