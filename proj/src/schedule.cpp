#include "mvg/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mvg {

NoiseSchedule::NoiseSchedule(Eigen::VectorXd betas) : betas_(std::move(betas)) {
  if (betas_.size() < 1) {
    throw std::invalid_argument("schedule: need at least one step");
  }
  alpha_bars_.resize(betas_.size() + 1);
  alpha_bars_(0) = 1.0;
  long double running = 1.0L;
  for (Eigen::Index i = 0; i < betas_.size(); ++i) {
    const double b = betas_(i);
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("schedule: beta_" + std::to_string(i + 1) +
                                  " = " + std::to_string(b) +
                                  " outside (0,1)");
    }
    running *= 1.0L - static_cast<long double>(b);
    alpha_bars_(i + 1) = static_cast<double>(running);
  }
}

void NoiseSchedule::check_step(int t, int lo) const {
  if (t < lo || t > steps()) {
    throw std::out_of_range("schedule: step " + std::to_string(t) +
                            " outside [" + std::to_string(lo) + ", " +
                            std::to_string(steps()) + "]");
  }
}

double NoiseSchedule::beta(int t) const {
  check_step(t);
  return betas_(t - 1);
}

double NoiseSchedule::alpha(int t) const { return 1.0 - beta(t); }

double NoiseSchedule::alpha_bar(int t) const {
  check_step(t, 0);
  return alpha_bars_(t);
}

NoiseSchedule build_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) {
    throw std::invalid_argument("build_schedule: T must be >= 1");
  }
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
    throw std::invalid_argument(
        "build_schedule: need 0 < beta_start <= beta_end < 1");
  }
  Eigen::VectorXd betas(T);
  if (T == 1) {
    betas(0) = beta_start;
  } else {
    for (int i = 0; i < T; ++i) {
      betas(i) = beta_start + (beta_end - beta_start) * i / (T - 1);
    }
  }
  return NoiseSchedule(std::move(betas));
}

NoiseSchedule build_default_schedule(int T) {
  if (T < 1) {
    throw std::invalid_argument("build_default_schedule: T must be >= 1");
  }
  const double scale = 1000.0 / T;
  return build_schedule(T, 1e-4 * scale, 0.02 * scale);
}

}  // namespace mvg
