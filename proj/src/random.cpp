#include "mvg/random.hpp"

#include <cmath>
#include <numbers>

namespace mvg {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// 53-bit uniform in (0, 1) from two words; never returns 0.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<std::uint32_t, 4> NoiseStream::block(StreamTag tag,
                                                std::uint32_t stage,
                                                std::uint32_t lane,
                                                std::uint64_t block_index) const {
  // Counter: (block index low, block index high ^ lane, stage, tag).
  const auto lo = static_cast<std::uint32_t>(block_index);
  const auto hi = static_cast<std::uint32_t>(block_index >> 32);
  const std::array<std::uint32_t, 4> ctr{lo, hi ^ (lane * 0x85EBCA6Bu), stage,
                                         static_cast<std::uint32_t>(tag)};
  const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                         static_cast<std::uint32_t>(seed_ >> 32)};
  return philox4x32(ctr, key);
}

double NoiseStream::normal(StreamTag tag, std::uint32_t stage,
                           std::uint32_t lane, std::uint64_t index) const {
  const auto w = block(tag, stage, lane, index / 2);
  const double u1 = to_unit(w[0], w[1]);
  const double u2 = to_unit(w[2], w[3]);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return (index % 2 == 0) ? r * std::cos(theta) : r * std::sin(theta);
}

double NoiseStream::uniform(StreamTag tag, std::uint32_t stage,
                            std::uint32_t lane, std::uint64_t index) const {
  const auto w = block(tag, stage, lane, index / 2);
  return (index % 2 == 0) ? to_unit(w[0], w[1]) : to_unit(w[2], w[3]);
}

Tensor NoiseStream::normal_tensor(const Shape& dims, StreamTag tag,
                                  std::uint32_t stage,
                                  std::uint32_t lane) const {
  Tensor out(dims);
  const Index n = out.size();
  for (Index i = 0; i + 1 < n; i += 2) {
    const auto w = block(tag, stage, lane, static_cast<std::uint64_t>(i / 2));
    const double r = std::sqrt(-2.0 * std::log(to_unit(w[0], w[1])));
    const double theta = 2.0 * std::numbers::pi * to_unit(w[2], w[3]);
    out[i] = r * std::cos(theta);
    out[i + 1] = r * std::sin(theta);
  }
  if (n % 2 == 1) {
    out[n - 1] = normal(tag, stage, lane, static_cast<std::uint64_t>(n - 1));
  }
  return out;
}

}  // namespace mvg
