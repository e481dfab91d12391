#include "mvg/metrics.hpp"

#include "mvg/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mvg {

namespace {

Eigen::VectorXd normalized(Eigen::VectorXd v) {
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

Eigen::VectorXd ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  Eigen::VectorXd r(static_cast<Index>(v.size()));
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t q = i; q <= j; ++q) r(static_cast<Index>(order[q])) = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

Eigen::VectorXd IdentityEmbedder::embed(const Tensor& x) const {
  if (x.size() != dim_) {
    throw std::invalid_argument("identity embedder: expected " +
                                std::to_string(dim_) + " values, got " +
                                std::to_string(x.size()));
  }
  return normalized(x.values());
}

RandomProjectionEmbedder::RandomProjectionEmbedder(Index input_dim,
                                                   Index features,
                                                   std::uint64_t seed) {
  if (input_dim < 1 || features < 1) {
    throw std::invalid_argument("projection embedder: empty dimensions");
  }
  const NoiseStream stream(seed);
  projection_.resize(features, input_dim);
  for (Index r = 0; r < features; ++r) {
    for (Index c = 0; c < input_dim; ++c) {
      projection_(r, c) =
          stream.normal(StreamTag::kProjection, static_cast<std::uint32_t>(r), 0,
                        static_cast<std::uint64_t>(c));
    }
  }
}

Eigen::VectorXd RandomProjectionEmbedder::embed(const Tensor& x) const {
  if (x.size() != projection_.cols()) {
    throw std::invalid_argument("projection embedder: expected " +
                                std::to_string(projection_.cols()) +
                                " values, got " + std::to_string(x.size()));
  }
  return normalized(projection_ * x.values());
}

double clip_i(const Trajectory& traj, const Embedder& e) {
  if (traj.states.size() < 2) throw std::invalid_argument("clip_i: N must be >= 1");
  const Eigen::VectorXd ref = e.embed(traj.states.front());
  if (ref.norm() == 0.0) {
    throw std::invalid_argument("clip_i: initial state has a zero embedding");
  }
  double sum = 0.0;
  int used = 0;
  for (std::size_t n = 1; n < traj.states.size(); ++n) {
    const Eigen::VectorXd f = e.embed(traj.states[n]);
    if (f.norm() == 0.0) {
      spdlog::warn("clip_i: state {} has a zero embedding, skipped", n);
      continue;
    }
    sum += std::clamp(f.dot(ref), -1.0, 1.0);
    ++used;
  }
  if (used == 0) throw std::invalid_argument("clip_i: no usable states");
  return sum / used;
}

Eigen::VectorXd class_posteriors(const Tensor& x, const GmmModel& m) {
  if (x.size() != m.dim()) {
    throw std::invalid_argument("class_posteriors: image size mismatch");
  }
  const auto& classes = m.classes();
  Eigen::VectorXd logp(static_cast<Index>(classes.size()));
  for (std::size_t c = 0; c < classes.size(); ++c) {
    logp(static_cast<Index>(c)) =
        m.class_mixture(classes[c].class_id).log_density(x.values());
  }
  const double lse = log_sum_exp(logp);
  if (!std::isfinite(lse)) {
    throw std::domain_error("class_posteriors: density underflows for every class");
  }
  return (logp.array() - lse).exp().matrix();
}

double confidence(const Tensor& x, const Condition& y_target,
                  const GmmModel& m) {
  if (m.classes().size() < 2) {
    throw std::invalid_argument("confidence: model needs at least 2 classes");
  }
  const Eigen::VectorXd post = class_posteriors(x, m);
  const auto& classes = m.classes();
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes[c].class_id == y_target.class_id) return post(static_cast<Index>(c));
  }
  throw std::invalid_argument("confidence: unknown target class " +
                              std::to_string(y_target.class_id));
}

double kid(std::span<const Tensor> set_a, std::span<const Tensor> set_b,
           const Embedder& e) {
  if (set_a.size() < 2 || set_b.size() < 2) {
    throw std::invalid_argument("kid: each set needs at least 2 images");
  }
  auto embed_all = [&](std::span<const Tensor> set) {
    Eigen::MatrixXd f(e.features(), static_cast<Index>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) {
      f.col(static_cast<Index>(i)) = e.embed(set[i]);
    }
    return f;
  };
  const Eigen::MatrixXd fa = embed_all(set_a);
  const Eigen::MatrixXd fb = embed_all(set_b);
  const double F = static_cast<double>(e.features());
  auto kernel = [F](const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
    return Eigen::MatrixXd(
        ((u.transpose() * v).array() / F + 1.0).cube().matrix());
  };

  const Index n = std::min(fa.cols(), fb.cols());
  const Index b = std::min<Index>(n, 100);
  const Index blocks = n / b;
  double total = 0.0;
  for (Index blk = 0; blk < blocks; ++blk) {
    const Eigen::MatrixXd xa = fa.middleCols(blk * b, b);
    const Eigen::MatrixXd xb = fb.middleCols(blk * b, b);
    // The estimator's weights sum to zero, so subtracting a common reference
    // value leaves it unchanged and makes identical features give exactly 0.
    const Eigen::MatrixXd kab = kernel(xa, xb);
    const double ref = kab(0, 0);
    const Eigen::MatrixXd kaa = kernel(xa, xa).array() - ref;
    const Eigen::MatrixXd kbb = kernel(xb, xb).array() - ref;
    const double bb = static_cast<double>(b);
    const double term_aa = (kaa.sum() - kaa.trace()) / (bb * (bb - 1.0));
    const double term_bb = (kbb.sum() - kbb.trace()) / (bb * (bb - 1.0));
    const double term_ab = (kab.array() - ref).sum() / (bb * bb);
    total += term_aa + term_bb - 2.0 * term_ab;
  }
  return total / static_cast<double>(blocks);
}

double mae(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mae");
  if (a.size() == 0) throw std::invalid_argument("mae: empty tensors");
  return (a.values() - b.values()).cwiseAbs().mean();
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman: need two equal-length series of >= 2");
  }
  const Eigen::VectorXd rx = ranks(x);
  const Eigen::VectorXd ry = ranks(y);
  const Eigen::VectorXd dx = rx.array() - rx.mean();
  const Eigen::VectorXd dy = ry.array() - ry.mean();
  const double denom = std::sqrt(dx.squaredNorm() * dy.squaredNorm());
  if (denom == 0.0) return 0.0;
  return dx.dot(dy) / denom;
}

}  // namespace mvg
