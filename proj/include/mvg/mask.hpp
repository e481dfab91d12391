#pragma once

#include "mvg/tensor.hpp"

namespace mvg {

/// Per-pixel region-of-interest weights in [0,1] over the image plane.
/// Broadcasts over a trailing channel axis.
class RoiMask {
 public:
  RoiMask() = default;
  /// Throws std::invalid_argument if any weight is outside [0,1].
  explicit RoiMask(Tensor weights);

  static RoiMask constant(Shape plane, double value);

  const Tensor& weights() const { return weights_; }
  const Shape& plane() const { return weights_.dims(); }

  /// Weights expanded to `dims` (equal shape, or plane + one channel axis).
  Eigen::VectorXd expand(const Shape& dims) const;

 private:
  Tensor weights_;
};

/// outside * (1 - M) + inside * M.  Pixels with M == 0 take `outside` and
/// pixels with M == 1 take `inside` bit for bit.
Tensor roi_composite(const Tensor& outside, const Tensor& inside,
                     const RoiMask& m);

}  // namespace mvg
