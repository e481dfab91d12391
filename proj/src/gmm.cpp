#include "mvg/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mvg {

double log_sum_exp(const Eigen::VectorXd& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

void Mixture::validate() const {
  const Index k = components();
  if (k < 1) throw std::invalid_argument("mixture: no components");
  if (weights.size() != k || variances.size() != k) {
    throw std::invalid_argument("mixture: weights/variances/means disagree");
  }
  if ((weights.array() < 0.0).any()) {
    throw std::invalid_argument("mixture: negative weight");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("mixture: weights sum to " +
                                std::to_string(weights.sum()));
  }
  if (!(variances.array() > 0.0).all()) {
    throw std::invalid_argument("mixture: variances must be positive");
  }
  if (!means.allFinite()) {
    throw std::invalid_argument("mixture: non-finite mean");
  }
}

Eigen::VectorXd Mixture::component_log_terms(const Eigen::VectorXd& x) const {
  const double d = static_cast<double>(dim());
  Eigen::VectorXd out(components());
  for (Index k = 0; k < components(); ++k) {
    const double var = variances(k);
    const double sq = (x - means.col(k)).squaredNorm();
    out(k) = std::log(weights(k)) -
             0.5 * d * std::log(2.0 * std::numbers::pi * var) -
             0.5 * sq / var;
  }
  return out;
}

double Mixture::log_density(const Eigen::VectorXd& x) const {
  return log_sum_exp(component_log_terms(x));
}

Mixture Mixture::diffused(double alpha_bar) const {
  Mixture m;
  m.weights = weights;
  m.means = std::sqrt(alpha_bar) * means;
  m.variances = (alpha_bar * variances.array() + (1.0 - alpha_bar)).matrix();
  return m;
}

Mixture Mixture::single(const Eigen::VectorXd& mean, double variance) {
  Mixture m;
  m.weights = Eigen::VectorXd::Ones(1);
  m.means = mean;
  m.variances = Eigen::VectorXd::Constant(1, variance);
  return m;
}

Mixture Mixture::combine(const Mixture& a, double wa, const Mixture& b,
                         double wb) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument("mixture: combine dimension mismatch");
  }
  Mixture m;
  const Index ka = a.components();
  const Index kb = b.components();
  m.weights.resize(ka + kb);
  m.weights << wa * a.weights, wb * b.weights;
  m.means.resize(a.dim(), ka + kb);
  m.means << a.means, b.means;
  m.variances.resize(ka + kb);
  m.variances << a.variances, b.variances;
  return m;
}

GmmModel::GmmModel(Shape image_shape, std::vector<ClassEntry> classes)
    : shape_(std::move(image_shape)), classes_(std::move(classes)) {
  if (classes_.empty()) throw std::invalid_argument("gmm: no classes");
  const Index d = dim();
  for (auto& e : classes_) {
    if (e.anchors.empty()) {
      throw std::invalid_argument("gmm: class " + std::to_string(e.class_id) +
                                  " has no anchors");
    }
    std::sort(e.anchors.begin(), e.anchors.end(),
              [](const Anchor& a, const Anchor& b) {
                return a.severity < b.severity;
              });
    const Index k = e.anchors.front().mixture.components();
    for (const auto& a : e.anchors) {
      a.mixture.validate();
      if (a.mixture.dim() != d) {
        throw std::invalid_argument("gmm: component dimension " +
                                    std::to_string(a.mixture.dim()) +
                                    " != image size " + std::to_string(d));
      }
      if (a.mixture.components() != k) {
        throw std::invalid_argument(
            "gmm: anchors of one class must share a component count");
      }
    }
  }
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    for (std::size_t j = i + 1; j < classes_.size(); ++j) {
      if (classes_[i].class_id == classes_[j].class_id) {
        throw std::invalid_argument("gmm: duplicate class id");
      }
    }
  }
}

GmmModel GmmModel::single_class(Shape image_shape, int class_id,
                                Mixture mixture) {
  ClassEntry e;
  e.class_id = class_id;
  e.anchors.push_back({0.0, std::move(mixture)});
  std::vector<ClassEntry> classes;
  classes.push_back(std::move(e));
  return GmmModel(std::move(image_shape), std::move(classes));
}

std::vector<int> GmmModel::class_ids() const {
  std::vector<int> ids;
  for (const auto& e : classes_) ids.push_back(e.class_id);
  return ids;
}

bool GmmModel::has_class(int class_id) const {
  return std::any_of(classes_.begin(), classes_.end(),
                     [&](const ClassEntry& e) { return e.class_id == class_id; });
}

const GmmModel::ClassEntry& GmmModel::entry(int class_id) const {
  for (const auto& e : classes_) {
    if (e.class_id == class_id) return e;
  }
  throw std::invalid_argument("gmm: unknown class " + std::to_string(class_id));
}

Mixture GmmModel::anchor_mixture(const ClassEntry& e, double severity) const {
  const auto& anchors = e.anchors;
  if (anchors.size() == 1 || severity <= anchors.front().severity) {
    return anchors.front().mixture;
  }
  if (severity >= anchors.back().severity) return anchors.back().mixture;
  auto hi = std::upper_bound(
      anchors.begin(), anchors.end(), severity,
      [](double s, const Anchor& a) { return s < a.severity; });
  auto lo = hi - 1;
  if (lo->severity == severity) return lo->mixture;
  const double w = (severity - lo->severity) / (hi->severity - lo->severity);
  const Mixture& a = lo->mixture;
  const Mixture& b = hi->mixture;
  Mixture m;
  m.weights = (1.0 - w) * a.weights + w * b.weights;
  m.means = (1.0 - w) * a.means + w * b.means;
  m.variances = (1.0 - w) * a.variances + w * b.variances;
  return m;
}

Mixture GmmModel::conditional(const Condition& y) const {
  Mixture base = anchor_mixture(entry(y.class_id), y.severity);
  if (!y.blended()) return base;
  const double w = std::clamp(y.blend_weight, 0.0, 1.0);
  Mixture other = anchor_mixture(entry(y.blend_class), y.blend_severity);
  if (w >= 1.0) return other;
  return Mixture::combine(base, 1.0 - w, other, w);
}

Mixture GmmModel::class_mixture(int class_id) const {
  const ClassEntry& e = entry(class_id);
  const double share = 1.0 / static_cast<double>(e.anchors.size());
  Mixture m = e.anchors.front().mixture;
  m.weights *= share;
  for (std::size_t i = 1; i < e.anchors.size(); ++i) {
    m = Mixture::combine(m, 1.0, e.anchors[i].mixture, share);
  }
  return m;
}

Tensor GmmModel::conditional_mean(const Condition& y) const {
  const Mixture m = conditional(y);
  return Tensor(shape_, m.means * m.weights);
}

}  // namespace mvg
