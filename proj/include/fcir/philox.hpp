#pragma once

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
//
// A stream is identified by a 64-bit key. Draw i of a stream is a pure
// function of (key, i), so ensemble members seeded as master ^ index can be
// generated in any order or in parallel.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fcir {

class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t key) noexcept
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

  static Block encrypt(Block ctr, std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

  /// Random block number `index` of sub-stream `substream`.
  Block block(std::uint64_t index, std::uint64_t substream = 0) const noexcept {
    return encrypt({static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)},
                   key_);
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  std::array<std::uint32_t, 2> key_;
};

/// Standard normal variates from a Philox stream, two per block via Box-Muller.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed, std::uint64_t substream = 0) noexcept
      : rng_(seed), substream_(substream) {}

  double operator()() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const auto b = rng_.block(counter_++, substream_);
    const double u1 = to_open_unit((std::uint64_t{b[0]} << 32) | b[1]);
    const double u2 = to_open_unit((std::uint64_t{b[2]} << 32) | b[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  // 53 random bits mapped into the open interval (0, 1).
  static double to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  Philox4x32 rng_;
  std::uint64_t substream_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of ensemble member `index` under a master seed.
constexpr std::uint64_t member_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return master ^ index;
}

}  // namespace fcir
