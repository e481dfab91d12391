#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvg {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1},
                         [](Index a, Index b) { return a * b; });
}

std::string shape_string(const Shape& dims);

/// Dense row-major tensor: a shape plus a flat Eigen vector of values.
///
/// Arithmetic is done on `values()`, which is an ordinary Eigen column
/// vector, so expressions like `a.values() + 2.0 * b.values()` compose with
/// the rest of Eigen.  The shape only matters for I/O, masking and
/// broadcasting.
template <typename Scalar>
class BasicTensor {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicTensor() = default;

  explicit BasicTensor(Shape dims)
      : dims_(std::move(dims)), values_(Vector::Zero(shape_size(dims_))) {}

  BasicTensor(Shape dims, Vector values)
      : dims_(std::move(dims)), values_(std::move(values)) {
    if (shape_size(dims_) != values_.size()) {
      throw std::invalid_argument("tensor: shape " + shape_string(dims_) +
                                  " does not match " +
                                  std::to_string(values_.size()) + " values");
    }
  }

  static BasicTensor scalar(Scalar v) {
    Vector values(1);
    values(0) = v;
    return BasicTensor({1}, std::move(values));
  }

  static BasicTensor from_values(Shape dims, std::initializer_list<Scalar> v) {
    Vector values(static_cast<Index>(v.size()));
    Index i = 0;
    for (Scalar s : v) values(i++) = s;
    return BasicTensor(std::move(dims), std::move(values));
  }

  static BasicTensor constant(Shape dims, Scalar v) {
    const Index n = shape_size(dims);
    return BasicTensor(std::move(dims), Vector::Constant(n, v));
  }

  const Shape& dims() const { return dims_; }
  Index size() const { return values_.size(); }
  Index rank() const { return static_cast<Index>(dims_.size()); }

  Vector& values() { return values_; }
  const Vector& values() const { return values_; }

  Scalar& operator[](Index i) { return values_(i); }
  Scalar operator[](Index i) const { return values_(i); }

  bool all_finite() const { return values_.allFinite(); }

  bool same_shape(const BasicTensor& other) const {
    return dims_ == other.dims_;
  }

  /// Same values, new value vector; keeps the shape.
  BasicTensor with_values(Vector values) const {
    return BasicTensor(dims_, std::move(values));
  }

  template <typename Other>
  BasicTensor<Other> cast() const {
    return BasicTensor<Other>(dims_, values_.template cast<Other>());
  }

  friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
    return a.dims_ == b.dims_ && a.values_ == b.values_;
  }

 private:
  Shape dims_;
  Vector values_;
};

using Tensor = BasicTensor<double>;
using TensorF = BasicTensor<float>;

inline void require_same_shape(const Tensor& a, const Tensor& b,
                               const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                shape_string(a.dims()) + " vs " +
                                shape_string(b.dims()));
  }
}

inline double norm(const Tensor& x) { return x.values().norm(); }

inline double distance(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "distance");
  return (a.values() - b.values()).norm();
}

}  // namespace mvg
