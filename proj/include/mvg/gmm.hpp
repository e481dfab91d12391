#pragma once

#include "mvg/condition.hpp"
#include "mvg/tensor.hpp"

#include <Eigen/Core>

#include <vector>

namespace mvg {

/// Isotropic Gaussian mixture in R^D.  Column k of `means` is component k.
struct Mixture {
  Eigen::VectorXd weights;
  Eigen::MatrixXd means;
  Eigen::VectorXd variances;

  Index dim() const { return means.rows(); }
  Index components() const { return means.cols(); }

  /// Throws std::invalid_argument on negative weights, weights not summing
  /// to 1 (within 1e-12), non-positive variances, or size mismatches.
  void validate() const;

  /// Per-component log(w_k) + log N(x; mu_k, var_k I).
  Eigen::VectorXd component_log_terms(const Eigen::VectorXd& x) const;

  /// log sum_k w_k N(x; mu_k, var_k I), evaluated with log-sum-exp.
  double log_density(const Eigen::VectorXd& x) const;

  /// Marginal of sqrt(a) x0 + sqrt(1-a) eps for x0 drawn from this mixture.
  Mixture diffused(double alpha_bar) const;

  static Mixture single(const Eigen::VectorXd& mean, double variance);

  /// Union of components of `a` and `b` with weights scaled by wa and wb.
  static Mixture combine(const Mixture& a, double wa, const Mixture& b,
                         double wb);
};

/// log(sum(exp(v))) without overflow.
double log_sum_exp(const Eigen::VectorXd& v);

/// Conditional Gaussian-mixture data model.
///
/// Each class owns a list of severity anchors, each holding a mixture.
/// The conditional for (class, s) interpolates the two anchors bracketing s
/// componentwise (weights, means, variances); the class-marginal mixture
/// used by the Bayes classifier is the uniform union of all anchors.
class GmmModel {
 public:
  struct Anchor {
    double severity = 0.0;
    Mixture mixture;
  };
  struct ClassEntry {
    int class_id = 0;
    std::vector<Anchor> anchors;  // sorted by severity
  };

  GmmModel(Shape image_shape, std::vector<ClassEntry> classes);

  /// One class with one anchor; severity is ignored.
  static GmmModel single_class(Shape image_shape, int class_id,
                               Mixture mixture);

  const Shape& image_shape() const { return shape_; }
  Index dim() const { return shape_size(shape_); }
  const std::vector<ClassEntry>& classes() const { return classes_; }
  std::vector<int> class_ids() const;
  bool has_class(int class_id) const;

  /// p(x | y).  Throws std::invalid_argument for an unknown class.
  Mixture conditional(const Condition& y) const;

  /// p(x | class), uniform over the class's anchors.
  Mixture class_mixture(int class_id) const;

  /// Mean of the conditional p(x | y) as an image.
  Tensor conditional_mean(const Condition& y) const;

 private:
  const ClassEntry& entry(int class_id) const;
  Mixture anchor_mixture(const ClassEntry& e, double severity) const;

  Shape shape_;
  std::vector<ClassEntry> classes_;
};

}  // namespace mvg
