#pragma once

#include <Eigen/Core>

#include <vector>

namespace mvg {

/// T-step variance schedule.  Step indices run 1..T; index 0 is the clean
/// state with alpha_bar(0) == 1 exactly.
class NoiseSchedule {
 public:
  /// Builds the cumulative table from per-step betas (length T, each in
  /// (0,1)).  The running product is accumulated in long double.
  explicit NoiseSchedule(Eigen::VectorXd betas);

  int steps() const { return static_cast<int>(betas_.size()); }

  /// beta_t for t in 1..T.
  double beta(int t) const;
  /// 1 - beta_t for t in 1..T.
  double alpha(int t) const;
  /// Cumulative product for t in 0..T.
  double alpha_bar(int t) const;

  const Eigen::VectorXd& betas() const { return betas_; }
  const Eigen::VectorXd& alpha_bars() const { return alpha_bars_; }

  /// Throws std::out_of_range unless lo <= t <= T.
  void check_step(int t, int lo = 1) const;

 private:
  Eigen::VectorXd betas_;
  Eigen::VectorXd alpha_bars_;  // length T+1
};

/// Linear beta ramp from beta_start to beta_end over T steps.
NoiseSchedule build_schedule(int T, double beta_start, double beta_end);

/// Linear ramp with the 1000-step endpoints (1e-4, 0.02) rescaled by 1000/T.
NoiseSchedule build_default_schedule(int T);

}  // namespace mvg
