#pragma once

#include "mvg/condition.hpp"
#include "mvg/gmm.hpp"
#include "mvg/pie.hpp"
#include "mvg/tensor.hpp"

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

namespace mvg {

/// Maps an image to a unit-norm feature vector.  A zero image maps to the
/// zero vector, which callers treat as "no embedding".
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Eigen::VectorXd embed(const Tensor& x) const = 0;
  virtual Index features() const = 0;
};

/// Flattened image, normalized.
class IdentityEmbedder final : public Embedder {
 public:
  explicit IdentityEmbedder(Index dim) : dim_(dim) {}
  Eigen::VectorXd embed(const Tensor& x) const override;
  Index features() const override { return dim_; }

 private:
  Index dim_;
};

/// Gaussian random projection to `features` dimensions (default 64),
/// normalized.  The matrix is a pure function of (input_dim, features, seed).
class RandomProjectionEmbedder final : public Embedder {
 public:
  RandomProjectionEmbedder(Index input_dim, Index features = 64,
                           std::uint64_t seed = 0);
  Eigen::VectorXd embed(const Tensor& x) const override;
  Index features() const override { return projection_.rows(); }

 private:
  Eigen::MatrixXd projection_;
};

/// Mean over n = 1..N of cos(e(states[n]), e(states[0])).  States with a
/// zero embedding are skipped with a warning; throws std::invalid_argument
/// if N == 0, states[0] embeds to zero or nothing is left.
double clip_i(const Trajectory& traj, const Embedder& e);

/// p(class | x) for every class of m, under a uniform class prior and each
/// class's marginal mixture.  Ordered like m.classes().  Throws
/// std::domain_error if every class density underflows.
Eigen::VectorXd class_posteriors(const Tensor& x, const GmmModel& m);

/// Bayes-optimal confidence p(y_target.class | x).  Needs >= 2 classes.
double confidence(const Tensor& x, const Condition& y_target,
                  const GmmModel& m);

/// Unbiased MMD^2 with kernel (u.v / F + 1)^3 on embedded features.  The
/// sets are split into aligned blocks of size min(|a|, |b|, 100) and the
/// block estimates averaged.  Throws if either set has fewer than 2 items.
double kid(std::span<const Tensor> set_a, std::span<const Tensor> set_b,
           const Embedder& e);

/// Mean absolute difference.
double mae(const Tensor& a, const Tensor& b);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace mvg
