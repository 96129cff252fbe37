#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

#include "ltg/errors.hpp"

namespace ltg {

// Counter-based generator: Philox4x32 with 10 rounds (Salmon et al.,
// "Parallel random numbers: as easy as 1, 2, 3", SC'11). The algorithm is
// pinned so that outputs written by one build can be regenerated by another.
inline constexpr std::string_view kRngAlgorithm = "philox4x32-10";
inline constexpr int kRngAlgorithmVersion = 1;

namespace detail {

inline constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

}  // namespace detail

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t{detail::kPhiloxM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{detail::kPhiloxM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += detail::kPhiloxW0;
    key[1] += detail::kPhiloxW1;
  }
  return ctr;
}

// Identifies one random stream. The 128-bit Philox counter is laid out as
// [block, substream, stream_index lo, stream_index hi] under the key
// master_seed, so distinct (stream_index, substream) pairs never share a
// counter value and cannot collide.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
  std::uint32_t substream = 0;

  [[nodiscard]] SeedSpec with_substream(std::uint32_t s) const {
    return SeedSpec{master_seed, stream_index, s};
  }
  [[nodiscard]] SeedSpec with_stream(std::uint64_t s) const {
    return SeedSpec{master_seed, s, 0};
  }
  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

// UniformRandomBitGenerator over one SeedSpec stream.
class RngStream {
 public:
  using result_type = std::uint32_t;

  explicit RngStream(const SeedSpec& seed)
      : key_{static_cast<std::uint32_t>(seed.master_seed),
             static_cast<std::uint32_t>(seed.master_seed >> 32)},
        substream_(seed.substream),
        stream_lo_(static_cast<std::uint32_t>(seed.stream_index)),
        stream_hi_(static_cast<std::uint32_t>(seed.stream_index >> 32)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (lane_ == 4) refill();
    return buffer_[lane_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    return (hi << 32) | lo;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Exponential waiting time with the given rate, by inversion.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  void refill() {
    if (block_ == std::numeric_limits<std::uint32_t>::max()) {
      throw NumericalError("random stream exhausted (2^32 Philox blocks)");
    }
    buffer_ = philox4x32_10({block_++, substream_, stream_lo_, stream_hi_}, key_);
    lane_ = 0;
  }

  PhiloxKey key_;
  std::uint32_t substream_;
  std::uint32_t stream_lo_;
  std::uint32_t stream_hi_;
  std::uint32_t block_ = 0;
  PhiloxCounter buffer_{};
  int lane_ = 4;
};

}  // namespace ltg
