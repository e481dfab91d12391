#pragma once

#include "mvg/condition.hpp"
#include "mvg/schedule.hpp"
#include "mvg/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mvg {

class Denoiser;

/// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps, for t in 1..T.
template <typename Scalar>
BasicTensor<Scalar> forward_diffuse(const BasicTensor<Scalar>& x0, int t,
                                    const BasicTensor<Scalar>& eps,
                                    const NoiseSchedule& s) {
  if (!x0.same_shape(eps)) {
    throw std::invalid_argument("forward_diffuse: shape mismatch " +
                                shape_string(x0.dims()) + " vs " +
                                shape_string(eps.dims()));
  }
  s.check_step(t);
  const double ab = s.alpha_bar(t);
  const auto signal = static_cast<Scalar>(std::sqrt(ab));
  const auto noise = static_cast<Scalar>(std::sqrt(1.0 - ab));
  return x0.with_values(signal * x0.values() + noise * eps.values());
}

/// Deterministic (sigma = 0) DDIM update from step t to step t-1 given the
/// predicted noise.
template <typename Scalar>
BasicTensor<Scalar> ddim_step(const BasicTensor<Scalar>& x_t, int t,
                              const BasicTensor<Scalar>& eps_pred,
                              const NoiseSchedule& s) {
  if (!x_t.same_shape(eps_pred)) {
    throw std::invalid_argument("ddim_step: shape mismatch " +
                                shape_string(x_t.dims()) + " vs " +
                                shape_string(eps_pred.dims()));
  }
  s.check_step(t);
  const double ab = s.alpha_bar(t);
  const double ab_prev = s.alpha_bar(t - 1);
  const auto inv_sqrt_ab = static_cast<Scalar>(1.0 / std::sqrt(ab));
  const auto sqrt_one_minus_ab = static_cast<Scalar>(std::sqrt(1.0 - ab));
  const auto sqrt_ab_prev = static_cast<Scalar>(std::sqrt(ab_prev));
  const auto sqrt_one_minus_ab_prev =
      static_cast<Scalar>(std::sqrt(1.0 - ab_prev));

  auto x0_pred = inv_sqrt_ab * (x_t.values() - sqrt_one_minus_ab * eps_pred.values());
  BasicTensor<Scalar> out = x_t.with_values(
      sqrt_ab_prev * x0_pred + sqrt_one_minus_ab_prev * eps_pred.values());
  if (!out.all_finite()) {
    throw std::domain_error("ddim_step: non-finite state at step " +
                            std::to_string(t));
  }
  return out;
}

/// Runs ddim_step from step k down to step stop+1 using the denoiser's
/// prediction at each step; returns the state at step `stop` (0 by default,
/// the clean state).
Tensor ddim_chain(const Tensor& x_k, int k, const Denoiser& denoiser,
                  const Condition& y, const NoiseSchedule& s, int stop = 0);

}  // namespace mvg
