#include "mvg/mask.hpp"

#include <algorithm>
#include <stdexcept>

namespace mvg {

RoiMask::RoiMask(Tensor weights) : weights_(std::move(weights)) {
  const auto& v = weights_.values();
  if (!((v.array() >= 0.0) && (v.array() <= 1.0)).all()) {
    throw std::invalid_argument("roi mask: weights must lie in [0,1]");
  }
}

RoiMask RoiMask::constant(Shape plane, double value) {
  return RoiMask(Tensor::constant(std::move(plane), value));
}

Eigen::VectorXd RoiMask::expand(const Shape& dims) const {
  if (dims == plane()) return weights_.values();
  const Shape& p = plane();
  const bool channel_axis =
      dims.size() == p.size() + 1 && std::equal(p.begin(), p.end(), dims.begin());
  if (!channel_axis) {
    throw std::invalid_argument("roi mask: plane " + shape_string(p) +
                                " does not broadcast to " + shape_string(dims));
  }
  const Index channels = dims.back();
  Eigen::VectorXd out(weights_.size() * channels);
  for (Index i = 0; i < weights_.size(); ++i) {
    out.segment(i * channels, channels).setConstant(weights_[i]);
  }
  return out;
}

Tensor roi_composite(const Tensor& outside, const Tensor& inside,
                     const RoiMask& m) {
  require_same_shape(outside, inside, "roi_composite");
  const Eigen::VectorXd w = m.expand(outside.dims());
  Tensor out(outside.dims());
  for (Index i = 0; i < out.size(); ++i) {
    if (w(i) == 0.0) {
      out[i] = outside[i];
    } else if (w(i) == 1.0) {
      out[i] = inside[i];
    } else {
      out[i] = outside[i] * (1.0 - w(i)) + inside[i] * w(i);
    }
  }
  return out;
}

}  // namespace mvg
