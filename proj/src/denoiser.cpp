#include "mvg/denoiser.hpp"
#include "mvg/diffusion.hpp"

#include <cmath>
#include <stdexcept>

namespace mvg {

Tensor mixture_eps(const Tensor& x, int t, const Mixture& mixture,
                   const NoiseSchedule& s) {
  s.check_step(t);
  if (x.size() != mixture.dim()) {
    throw std::invalid_argument("gmm_eps: input size " +
                                std::to_string(x.size()) +
                                " != model dimension " +
                                std::to_string(mixture.dim()));
  }
  if (!x.all_finite()) throw std::domain_error("gmm_eps: non-finite input");

  const double ab = s.alpha_bar(t);
  const Mixture noisy = mixture.diffused(ab);
  const Eigen::VectorXd log_terms = noisy.component_log_terms(x.values());
  const double total = log_sum_exp(log_terms);
  if (!std::isfinite(total)) {
    throw std::domain_error("gmm_eps: degenerate mixture responsibilities");
  }
  const Eigen::VectorXd resp = (log_terms.array() - total).exp().matrix();

  // score = -sum_k r_k (x - sqrt(ab) mu_k) / v_k
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(x.size());
  for (Index k = 0; k < noisy.components(); ++k) {
    if (resp(k) == 0.0) continue;
    weighted += (resp(k) / noisy.variances(k)) * (x.values() - noisy.means.col(k));
  }
  return x.with_values(std::sqrt(1.0 - ab) * weighted);
}

Tensor gmm_eps(const Tensor& x, int t, const Condition& y, const GmmModel& m,
               const NoiseSchedule& s) {
  return mixture_eps(x, t, m.conditional(y), s);
}

Tensor parzen_eps(const Tensor& x, int t, std::span<const Tensor> dataset,
                  const NoiseSchedule& s) {
  if (dataset.empty()) throw std::invalid_argument("parzen_eps: empty dataset");
  s.check_step(t);
  const double ab = s.alpha_bar(t);
  if (!(ab < 1.0)) {
    throw std::domain_error("parzen_eps: alpha_bar == 1 at step " +
                            std::to_string(t));
  }
  const double sqrt_ab = std::sqrt(ab);
  const double var = 1.0 - ab;

  Eigen::VectorXd logits(static_cast<Index>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    require_same_shape(x, dataset[i], "parzen_eps");
    logits(static_cast<Index>(i)) =
        -(x.values() - sqrt_ab * dataset[i].values()).squaredNorm() / (2.0 * var);
  }
  const double total = log_sum_exp(logits);
  Eigen::VectorXd x0_mean = Eigen::VectorXd::Zero(x.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double w = std::exp(logits(static_cast<Index>(i)) - total);
    if (w != 0.0) x0_mean += w * dataset[i].values();
  }
  return x.with_values((x.values() - sqrt_ab * x0_mean) / std::sqrt(var));
}

ParzenDenoiser::ParzenDenoiser(std::vector<Tensor> dataset,
                               const NoiseSchedule& schedule)
    : dataset_(std::move(dataset)), schedule_(schedule) {
  if (dataset_.empty()) throw std::invalid_argument("parzen: empty dataset");
  for (const auto& d : dataset_) {
    require_same_shape(dataset_.front(), d, "parzen dataset");
  }
}

Tensor ParzenDenoiser::predict(const Tensor& x, int t, const Condition&) const {
  return parzen_eps(x, t, dataset_, schedule_);
}

double measure_c2(const Denoiser& denoiser, std::span<const Probe> probes) {
  if (probes.empty()) throw std::invalid_argument("measure_c2: no probes");
  double c2 = 0.0;
  for (const auto& p : probes) {
    c2 = std::max(c2, norm(denoiser.predict(p.x, p.t, p.y)));
  }
  return c2;
}

Tensor ddim_chain(const Tensor& x_k, int k, const Denoiser& denoiser,
                  const Condition& y, const NoiseSchedule& s, int stop) {
  if (stop < 0 || stop >= k) {
    throw std::out_of_range("ddim_chain: need 0 <= stop < k");
  }
  s.check_step(k);
  Tensor x = x_k;
  for (int t = k; t > stop; --t) {
    Tensor eps = denoiser.predict(x, t, y);
    x = ddim_step(x, t, eps, s);
  }
  return x;
}

}  // namespace mvg
