#include "mvg/cli.hpp"
#include "mvg/io.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace mvg::cli {

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex guard;
  auto body = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (!first) first = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

namespace {

std::unique_ptr<Denoiser> make_denoiser(const RunConfig& cfg, const GmmModel& model,
                                        const NoiseSchedule& s) {
  if (cfg.denoiser.kind == DenoiserSpec::Kind::kGmm) {
    return std::make_unique<GmmDenoiser>(model, s);
  }
  // Parzen data drawn evenly from the target condition and the source.
  const int half = std::max(1, cfg.denoiser.samples / 2);
  std::vector<Tensor> data = toy::sample(model, cfg.target, half, cfg.denoiser.seed);
  auto more = toy::sample(model, cfg.source, cfg.denoiser.samples - half > 0
                                                 ? cfg.denoiser.samples - half : 1,
                          cfg.denoiser.seed + 1);
  data.insert(data.end(), more.begin(), more.end());
  return std::make_unique<ParzenDenoiser>(std::move(data), s);
}

}  // namespace

Context::Context(RunConfig config)
    : cfg(std::move(config)),
      schedule(cfg.schedule.build()),
      model(toy::build_domain(cfg.domain)),
      mask(cfg.mask.build(cfg.domain)),
      denoiser(make_denoiser(cfg, model, schedule)),
      embedder(cfg.embedder.build(model.dim())) {}

Tensor Context::start_image() const {
  switch (cfg.start.kind) {
    case StartSpec::Kind::kMean:
      return model.conditional_mean(cfg.source);
    case StartSpec::Kind::kFile: {
      Tensor t = io::read_tensor(cfg.start.path);
      if (t.dims() != model.image_shape()) {
        throw std::invalid_argument("start image " + cfg.start.path + " has shape " +
                                    shape_string(t.dims()));
      }
      return t;
    }
    case StartSpec::Kind::kSample:
      break;
  }
  return toy::sample(model, cfg.source, 1, cfg.start.seed).front();
}

Tensor Context::mae_reference() const {
  if (cfg.mae_reference.empty()) return model.conditional_mean(cfg.target);
  Tensor t = io::read_tensor(cfg.mae_reference);
  if (t.dims() != model.image_shape()) {
    throw std::invalid_argument("mae reference " + cfg.mae_reference + " has shape " +
                                shape_string(t.dims()));
  }
  return t;
}

std::vector<StageMetrics> stage_metrics(const Context& ctx, const Trajectory& traj) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<StageMetrics> rows;
  const Eigen::VectorXd ref = ctx.embedder->embed(traj.states.front());
  const Tensor mae_ref = ctx.cfg.wants("mae") ? ctx.mae_reference() : Tensor();
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const Tensor& x = traj.states[n];
    StageMetrics r;
    r.stage = static_cast<int>(n);
    r.conf = ctx.cfg.wants("conf") ? confidence(x, ctx.cfg.target, ctx.model) : nan;
    if (ctx.cfg.wants("clip_i")) {
      const Eigen::VectorXd f = ctx.embedder->embed(x);
      r.clip_i = (f.norm() > 0 && ref.norm() > 0) ? f.dot(ref) : nan;
    } else {
      r.clip_i = nan;
    }
    r.kid = nan;
    r.mae = ctx.cfg.wants("mae") ? mae(x, mae_ref) : nan;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace mvg::cli
