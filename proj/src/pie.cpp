#include "mvg/pie.hpp"

#include "mvg/diffusion.hpp"
#include "mvg/random.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mvg {

namespace {

// beta * (gen - base) + base, exact at beta = 0 and beta = 1.
Tensor blend(const Tensor& base, const Tensor& gen, double beta) {
  if (beta == 0.0) return base;
  if (beta == 1.0) return gen;
  return base.with_values(beta * (gen.values() - base.values()) + base.values());
}

void fill_deltas(Trajectory& traj) {
  traj.step_deltas.clear();
  for (std::size_t n = 1; n < traj.states.size(); ++n) {
    traj.step_deltas.push_back(distance(traj.states[n], traj.states[n - 1]));
  }
}

}  // namespace

int PieConfig::k(const NoiseSchedule& s) const {
  return static_cast<int>(std::floor(gamma * s.steps() + 1e-9));
}

void PieConfig::validate(const NoiseSchedule& s) const {
  if (N < 0) throw std::invalid_argument("pie config: N must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("pie config: gamma must lie in (0,1]");
  }
  if (!(beta1 >= 0.0 && beta1 <= 1.0) || !(beta2 >= 0.0 && beta2 <= 1.0)) {
    throw std::invalid_argument("pie config: blends must lie in [0,1]");
  }
  if (stop_step < 0 || stop_step >= s.steps()) {
    throw std::invalid_argument("pie config: stop_step outside [0,T)");
  }
  if (N >= 1 && k(s) < 1) {
    throw std::invalid_argument("pie config: floor(gamma*T) = 0 with N >= 1");
  }
  if (stop_step + k(s) > s.steps()) {
    throw std::invalid_argument("pie config: stop_step + k = " +
                                std::to_string(stop_step + k(s)) +
                                " exceeds T = " + std::to_string(s.steps()));
  }
}

double ConvergenceBound::envelope(int n) const {
  return std::pow(std::sqrt(alpha0), n) * std::exp(C);
}

Tensor pie_stage(const Tensor& x_prev, const Tensor& x_origin,
                 const Condition& y, const PieConfig& cfg, const Denoiser& d,
                 const RoiMask& m, const NoiseSchedule& s, int stage_index) {
  require_same_shape(x_prev, x_origin, "pie_stage");
  cfg.validate(s);
  const int k = cfg.k(s);
  if (k < 1) throw std::invalid_argument("pie_stage: floor(gamma*T) = 0");
  const int top = cfg.stop_step + k;
  const Tensor eps = NoiseStream(cfg.seed).normal_tensor(
      x_prev.dims(), StreamTag::kForwardNoise,
      static_cast<std::uint32_t>(stage_index));
  const Tensor x_top = forward_diffuse(x_prev, top, eps, s);
  const Tensor gen = ddim_chain(x_top, top, d, y, s, cfg.stop_step);
  const Tensor& base = cfg.base == CompositeBase::kOrigin ? x_origin : x_prev;
  return roi_composite(blend(base, gen, cfg.beta1), blend(base, gen, cfg.beta2),
                       m);
}

Trajectory pie_run(const Tensor& x0, const Condition& y_target,
                   const PieConfig& cfg, const Denoiser& d, const RoiMask& m,
                   const NoiseSchedule& s) {
  cfg.validate(s);
  Trajectory traj;
  traj.config = cfg;
  traj.states.reserve(static_cast<std::size_t>(cfg.N) + 1);
  traj.states.push_back(x0);
  for (int n = 1; n <= cfg.N; ++n) {
    traj.states.push_back(
        pie_stage(traj.states.back(), x0, y_target, cfg, d, m, s, n));
  }
  fill_deltas(traj);
  return traj;
}

Trajectory mean_trajectory(std::span<const Trajectory> runs) {
  if (runs.empty()) throw std::invalid_argument("mean_trajectory: no runs");
  Trajectory mean;
  mean.config = runs.front().config;
  const std::size_t len = runs.front().states.size();
  for (const auto& r : runs) {
    if (r.states.size() != len) {
      throw std::invalid_argument("mean_trajectory: runs differ in length");
    }
  }
  const double inv = 1.0 / static_cast<double>(runs.size());
  for (std::size_t n = 0; n < len; ++n) {
    Tensor acc(runs.front().states[n].dims());
    for (const auto& r : runs) {
      require_same_shape(acc, r.states[n], "mean_trajectory");
      acc.values() += r.states[n].values();
    }
    acc.values() *= inv;
    mean.states.push_back(std::move(acc));
  }
  fill_deltas(mean);
  return mean;
}

double decay_slope(std::span<const double> deltas, int burn_in) {
  const int total = static_cast<int>(deltas.size());
  if (burn_in < 0 || total - burn_in < 10) {
    throw std::invalid_argument("decay fit: need at least 10 stages after burn-in");
  }
  // Stage n (1-based) has delta deltas[n-1].
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (int n = burn_in + 1; n <= total; ++n) {
    const double dlt = deltas[static_cast<std::size_t>(n - 1)];
    if (!(dlt > 0.0) || !std::isfinite(dlt)) continue;
    const double x = n;
    const double y = std::log(dlt);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) {
    throw std::invalid_argument("decay fit: fewer than 2 positive deltas");
  }
  const double c = count;
  return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

double step_decay_fit(const Trajectory& traj, int burn_in) {
  return decay_slope(traj.step_deltas, burn_in);
}

ConvergenceBound prop2_bound_from_alphas(double alpha0, double alpha1,
                                         double C1, double C2, double delta) {
  if (!(C1 > 0.0) || !(C2 > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("prop2_bound: C1, C2 and delta must be > 0");
  }
  if (alpha0 == 1.0) {
    throw std::domain_error("prop2_bound: alpha0 == 1 makes log(alpha0) zero");
  }
  if (!(alpha1 > 0.0 && alpha1 < alpha0 && alpha0 < 1.0)) {
    throw std::invalid_argument("prop2_bound: need 0 < alpha1 < alpha0 <= 1");
  }
  ConvergenceBound b;
  b.alpha0 = alpha0;
  b.alpha1 = alpha1;
  b.C1 = C1;
  b.C2 = C2;
  b.delta = delta;
  const double a01 = alpha0 * alpha1;
  b.lambda =
      std::abs(std::sqrt(alpha0 - a01) - std::sqrt(alpha1 - a01)) / std::sqrt(alpha1);
  const double sqrt_a0 = std::sqrt(alpha0);
  b.C = std::log((1.0 / sqrt_a0 - 1.0) * C1 + b.lambda * C2);
  b.n_raw = 2.0 / std::log(alpha0) * (std::log(delta) - b.C);
  // Strict inequality n > n_raw.
  b.n_min = b.n_raw < 0.0 ? 0 : static_cast<int>(std::floor(b.n_raw)) + 1;
  b.kappa = std::exp(b.C) / (1.0 - sqrt_a0);
  return b;
}

ConvergenceBound prop2_bound(const NoiseSchedule& s, double C1, double C2,
                             double delta, int stop_step) {
  s.check_step(stop_step, 0);
  s.check_step(stop_step + 1);
  return prop2_bound_from_alphas(s.alpha_bar(stop_step),
                                 s.alpha_bar(stop_step + 1), C1, C2, delta);
}

Trajectory svd_walk(const Tensor& x0, const Condition& y_source,
                    const Condition& y_target, const PieConfig& cfg,
                    const Denoiser& d, const NoiseSchedule& s) {
  cfg.validate(s);
  const int top = cfg.stop_step + cfg.k(s);
  const NoiseStream stream(cfg.seed);
  Trajectory traj;
  traj.config = cfg;
  traj.states.push_back(x0);
  for (int n = 1; n <= cfg.N; ++n) {
    const Condition y = interpolate_condition(
        y_source, y_target, static_cast<double>(n) / cfg.N);
    const Tensor eps = stream.normal_tensor(x0.dims(), StreamTag::kForwardNoise,
                                            static_cast<std::uint32_t>(n));
    traj.states.push_back(
        ddim_chain(forward_diffuse(x0, top, eps, s), top, d, y, s, cfg.stop_step));
  }
  fill_deltas(traj);
  return traj;
}

Trajectory extrapolation_walk(const Tensor& x0,
                              std::span<const Tensor> manifold_a,
                              std::span<const Tensor> manifold_b, int N) {
  if (manifold_a.empty() || manifold_b.empty()) {
    throw std::invalid_argument("extrapolation_walk: empty manifold");
  }
  if (N < 0) throw std::invalid_argument("extrapolation_walk: N must be >= 0");
  auto mean_of = [&](std::span<const Tensor> set) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(x0.size());
    for (const auto& t : set) {
      require_same_shape(x0, t, "extrapolation_walk");
      acc += t.values();
    }
    return Eigen::VectorXd(acc / static_cast<double>(set.size()));
  };
  const Eigen::VectorXd step = mean_of(manifold_b) - mean_of(manifold_a);
  Trajectory traj;
  traj.config.N = N;
  traj.states.push_back(x0);
  for (int n = 1; n <= N; ++n) {
    const double w = static_cast<double>(n) / N;
    traj.states.push_back(x0.with_values(x0.values() + w * step));
  }
  fill_deltas(traj);
  return traj;
}

Tensor diff_heatmap(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "diff_heatmap");
  Eigen::VectorXd diff = (a.values() - b.values()).cwiseAbs();
  const double peak = diff.size() > 0 ? diff.maxCoeff() : 0.0;
  if (peak > 0.0) diff /= peak;
  return a.with_values(std::move(diff));
}

}  // namespace mvg
