#pragma once

#include "mvg/tensor.hpp"

#include <array>
#include <cstdint>

namespace mvg {

/// Philox4x32-10 block function (Salmon et al., SC'11).  Pure: the same
/// (counter, key) always maps to the same four words on every platform.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Which consumer a draw belongs to; keeps streams of different users of the
/// same seed disjoint.
enum class StreamTag : std::uint32_t {
  kForwardNoise = 1,
  kClipNoise = 2,
  kClampNoise = 3,
  kSample = 4,
  kProjection = 5,
  kTest = 99,
};

/// Counter-based standard-normal stream keyed by (seed, tag, stage, lane).
/// Draw i of a key is a pure function of the key and i, so results do not
/// depend on call order or thread scheduling.
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Standard-normal draw number `index` (Box-Muller on Philox output).
  double normal(StreamTag tag, std::uint32_t stage, std::uint32_t lane,
                std::uint64_t index) const;

  /// Uniform in (0, 1).
  double uniform(StreamTag tag, std::uint32_t stage, std::uint32_t lane,
                 std::uint64_t index) const;

  /// Tensor of i.i.d. standard normals, draws 0..n-1 of the key.
  Tensor normal_tensor(const Shape& dims, StreamTag tag, std::uint32_t stage,
                       std::uint32_t lane = 0) const;

 private:
  std::array<std::uint32_t, 4> block(StreamTag tag, std::uint32_t stage,
                                     std::uint32_t lane,
                                     std::uint64_t block_index) const;

  std::uint64_t seed_;
};

}  // namespace mvg
