#pragma once

#include "mvg/condition.hpp"
#include "mvg/denoiser.hpp"
#include "mvg/mask.hpp"
#include "mvg/schedule.hpp"
#include "mvg/tensor.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mvg {

/// Which image the stage composite interpolates against.
enum class CompositeBase {
  kOrigin,    // the run's input x0 (default)
  kPrevious,  // the stage's own input
};

struct PieConfig {
  int N = 10;
  double gamma = 0.6;
  double beta1 = 0.01;  // outside-ROI blend
  double beta2 = 0.75;  // inside-ROI blend
  std::uint64_t seed = 0;
  /// Lowest step the reverse chain stops at.  0 returns clean states; the
  /// bound-verification suite uses 1 so that the stage's own cumulative
  /// factor is abar(1) < 1.
  int stop_step = 0;
  CompositeBase base = CompositeBase::kOrigin;

  /// Steps per stage, floor(gamma * T) computed with a 1e-9 guard against
  /// representation error (0.6 * 50 must give 30).
  int k(const NoiseSchedule& s) const;
  /// Throws std::invalid_argument on bad values, including k == 0 with
  /// N >= 1 and stop_step + k > T.
  void validate(const NoiseSchedule& s) const;
};

struct Trajectory {
  std::vector<Tensor> states;       // N + 1 entries
  std::vector<double> step_deltas;  // ||states[n] - states[n-1]||, N entries
  PieConfig config;

  int stages() const { return static_cast<int>(step_deltas.size()); }
};

/// Prop. 2 / Prop. 3 constants for a stage whose reverse step lands on
/// cumulative factor alpha0 and starts from alpha1 < alpha0.
struct ConvergenceBound {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double delta = 0.0;
  double lambda = 0.0;
  double C = 0.0;      // log((1/sqrt(alpha0) - 1) C1 + lambda C2)
  double n_raw = 0.0;  // 2 / log(alpha0) * (log(delta) - C)
  int n_min = 0;       // smallest integer n > n_raw, at least 0
  double kappa = 0.0;  // exp(C) / (1 - sqrt(alpha0))

  /// sqrt(alpha0)^n * exp(C), the per-stage step envelope.
  double envelope(int n) const;
};

/// One PIE stage: forward-noise x_prev to step stop_step + k with the
/// (seed, stage_index) stream, run the deterministic chain back to
/// stop_step, then composite inside/outside the ROI.
Tensor pie_stage(const Tensor& x_prev, const Tensor& x_origin,
                 const Condition& y, const PieConfig& cfg, const Denoiser& d,
                 const RoiMask& m, const NoiseSchedule& s, int stage_index);

/// Runs N stages from x0 with the condition fixed at y_target.
Trajectory pie_run(const Tensor& x0, const Condition& y_target,
                   const PieConfig& cfg, const Denoiser& d, const RoiMask& m,
                   const NoiseSchedule& s);

/// Elementwise mean of the states of equally long runs; deltas recomputed
/// from the averaged states.  The config of the first run is echoed.
Trajectory mean_trajectory(std::span<const Trajectory> runs);

/// Least-squares slope of log(delta_n) against n for stages n > burn_in.
/// Zero deltas are skipped.  Throws std::invalid_argument if fewer than 10
/// stages follow the burn-in or fewer than 2 usable points remain.
double decay_slope(std::span<const double> deltas, int burn_in);
double step_decay_fit(const Trajectory& traj, int burn_in);

/// Bound constants from explicit cumulative factors.  Throws
/// std::domain_error when alpha0 == 1 (zero log divisor) and
/// std::invalid_argument unless 0 < alpha1 < alpha0 <= 1 and
/// C1, C2, delta > 0.
ConvergenceBound prop2_bound_from_alphas(double alpha0, double alpha1,
                                         double C1, double C2, double delta);

/// Reads alpha0 = abar(stop_step), alpha1 = abar(stop_step + 1).
ConvergenceBound prop2_bound(const NoiseSchedule& s, double C1, double C2,
                             double delta, int stop_step = 0);

/// Random-walk baseline: stage n regenerates from forward_diffuse(x0, .)
/// with fresh noise under the condition interpolated n/N of the way from
/// y_source to y_target.  No compositing.
Trajectory svd_walk(const Tensor& x0, const Condition& y_source,
                    const Condition& y_target, const PieConfig& cfg,
                    const Denoiser& d, const NoiseSchedule& s);

/// Linear extrapolation baseline with identity latent:
/// states[n] = x0 + (n/N) (mean(b) - mean(a)).
Trajectory extrapolation_walk(const Tensor& x0,
                              std::span<const Tensor> manifold_a,
                              std::span<const Tensor> manifold_b, int N);

/// |a - b| divided by its maximum; all zeros when a == b.
Tensor diff_heatmap(const Tensor& a, const Tensor& b);

}  // namespace mvg
