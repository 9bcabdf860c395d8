#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., SC'11) and a
// Box-Muller normal stream keyed by (seed, path).

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace spdemoments {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

inline PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Independent N(0,1) stream for one path: counter = (block, path), key = seed.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t path)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        path_lo_(static_cast<std::uint32_t>(path)),
        path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

  double next() {
    if (lane_ == 4) refill();
    return cache_[lane_++];
  }

 private:
  void refill() {
    const PhiloxCounter bits = philox4x32_10(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), path_lo_, path_hi_}, key_);
    ++block_;
    for (int pair = 0; pair < 2; ++pair) {
      // uniforms in (0, 1), never 0
      const double u1 = (static_cast<double>(bits[2 * pair]) + 0.5) * 0x1p-32;
      const double u2 = (static_cast<double>(bits[2 * pair + 1]) + 0.5) * 0x1p-32;
      const double r = std::sqrt(-2.0 * std::log(u1));
      const double theta = 2.0 * std::numbers::pi * u2;
      cache_[2 * pair] = r * std::cos(theta);
      cache_[2 * pair + 1] = r * std::sin(theta);
    }
    lane_ = 0;
  }

  PhiloxKey key_;
  std::uint32_t path_lo_;
  std::uint32_t path_hi_;
  std::uint64_t block_ = 0;
  std::array<double, 4> cache_{};
  int lane_ = 4;
};

}  // namespace spdemoments
