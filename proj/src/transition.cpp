#include "mvg/transition.hpp"

#include "mvg/diffusion.hpp"
#include "mvg/random.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mvg {

void VideoClip::validate() const {
  if (frames.size() < 2) throw std::invalid_argument("clip: K must be >= 2");
  for (const auto& f : frames) {
    require_same_shape(frames.front(), f, "clip");
    if (!f.all_finite()) throw std::invalid_argument("clip: non-finite frame");
  }
}

Tensor VideoClip::stacked() const {
  if (frames.empty()) return Tensor();
  Shape dims{length()};
  const Shape& fd = frames.front().dims();
  dims.insert(dims.end(), fd.begin(), fd.end());
  Tensor out(dims);
  const Index n = frames.front().size();
  for (Index j = 0; j < length(); ++j) {
    require_same_shape(frames.front(), frames[static_cast<std::size_t>(j)],
                       "clip");
    out.values().segment(j * n, n) = frames[static_cast<std::size_t>(j)].values();
  }
  return out;
}

VideoClip make_clip_skeleton(const Tensor& x_start, const Tensor& x_end, int K,
                             std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("clip skeleton: K must be >= 2");
  require_same_shape(x_start, x_end, "clip skeleton");
  const NoiseStream stream(seed);
  VideoClip clip;
  clip.frames.reserve(static_cast<std::size_t>(K));
  clip.frames.push_back(x_start);
  for (int j = 1; j + 1 < K; ++j) {
    clip.frames.push_back(stream.normal_tensor(x_start.dims(), StreamTag::kClipNoise,
                                               static_cast<std::uint32_t>(j)));
  }
  clip.frames.push_back(x_end);
  return clip;
}

VideoClip generate_transition(const VideoClip& skel, const RoiMask& m,
                              const Denoiser& d, const NoiseSchedule& s,
                              const Condition& y_start, const Condition& y_end,
                              double gamma, std::uint64_t seed) {
  skel.validate();
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("transition: gamma must lie in (0,1]");
  }
  const int k = static_cast<int>(std::floor(gamma * s.steps() + 1e-9));
  if (k < 1) throw std::invalid_argument("transition: floor(gamma*T) = 0");

  const std::size_t K = skel.frames.size();
  const Tensor& x_start = skel.frames.front();
  const Tensor& x_end = skel.frames.back();
  const NoiseStream stream(seed);
  const Tensor eps_start = stream.normal_tensor(x_start.dims(), StreamTag::kClampNoise, 0);
  const Tensor eps_end = stream.normal_tensor(x_start.dims(), StreamTag::kClampNoise, 1);

  std::vector<Condition> conds(K);
  VideoClip work = skel;
  const double ab_k = s.alpha_bar(k);
  for (std::size_t j = 0; j < K; ++j) {
    const double w = static_cast<double>(j) / static_cast<double>(K - 1);
    conds[j] = interpolate_condition(y_start, y_end, w);
    if (j == 0 || j + 1 == K) continue;
    const Eigen::VectorXd lerp = (1.0 - w) * x_start.values() + w * x_end.values();
    work.frames[j] = x_start.with_values(std::sqrt(ab_k) * lerp +
                                         std::sqrt(1.0 - ab_k) * skel.frames[j].values());
  }

  for (int t = k; t >= 1; --t) {
    work.frames.front() = forward_diffuse(x_start, t, eps_start, s);
    work.frames.back() = forward_diffuse(x_end, t, eps_end, s);
    for (std::size_t j = 1; j + 1 < K; ++j) {
      const Tensor eps = d.predict(work.frames[j], t, conds[j]);
      work.frames[j] = ddim_step(work.frames[j], t, eps, s);
    }
  }

  const Tensor average =
      x_start.with_values(0.5 * (x_start.values() + x_end.values()));
  for (std::size_t j = 1; j + 1 < K; ++j) {
    work.frames[j] = roi_composite(average, work.frames[j], m);
  }
  work.frames.front() = x_start;
  work.frames.back() = x_end;
  return work;
}

VideoClip concat_clips(std::span<const VideoClip> clips) {
  if (clips.empty()) throw std::invalid_argument("concat_clips: no clips");
  VideoClip out;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    const VideoClip& c = clips[i];
    c.validate();
    if (i == 0) {
      out.frames = c.frames;
      continue;
    }
    const Tensor& tail = out.frames.back();
    const Tensor& head = c.frames.front();
    if (!tail.same_shape(head) ||
        (tail.values() - head.values()).cwiseAbs().maxCoeff() > 1e-9) {
      throw std::invalid_argument("concat_clips: seam mismatch between clip " +
                                  std::to_string(i - 1) + " and clip " +
                                  std::to_string(i));
    }
    out.frames.insert(out.frames.end(), c.frames.begin() + 1, c.frames.end());
  }
  return out;
}

}  // namespace mvg
