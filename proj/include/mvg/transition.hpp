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

/// K >= 2 frames of equal shape.
struct VideoClip {
  std::vector<Tensor> frames;

  Index length() const { return static_cast<Index>(frames.size()); }
  /// Throws std::invalid_argument unless K >= 2, shapes agree and all
  /// values are finite.
  void validate() const;
  /// Frames stacked into one K x (frame shape) tensor.
  Tensor stacked() const;
};

/// [x_start, noise_1, ..., noise_{K-2}, x_end] with unit-normal middle
/// frames from the seeded clip stream.
VideoClip make_clip_skeleton(const Tensor& x_start, const Tensor& x_end, int K,
                             std::uint64_t seed);

/// Fills the middle frames of `skel` with a transition between its
/// endpoints.
///
/// Middle frame j starts at step k = floor(gamma T) from
/// sqrt(abar_k) lerp(x_start, x_end, j/(K-1)) + sqrt(1 - abar_k) noise_j
/// and is denoised by ddim_step under the condition interpolated j/(K-1)
/// of the way from y_start to y_end.  At every step the endpoint frames are
/// re-clamped to forward_diffuse(endpoint, t, eps_fixed).  Afterwards, pixels
/// outside the ROI take the endpoint average and the endpoints are set back
/// to x_start and x_end exactly.  `seed` keys the clamp noise.
VideoClip generate_transition(const VideoClip& skel, const RoiMask& m,
                              const Denoiser& d, const NoiseSchedule& s,
                              const Condition& y_start, const Condition& y_end,
                              double gamma, std::uint64_t seed = 0);

/// Joins clips, dropping the duplicated frame at each seam.  Seams must
/// match within 1e-9 (max abs difference); a mismatch throws
/// std::invalid_argument naming the pair.
VideoClip concat_clips(std::span<const VideoClip> clips);

}  // namespace mvg
