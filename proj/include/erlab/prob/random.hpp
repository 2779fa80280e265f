// Counter-based random streams.
//
// Every random quantity in erlab is a pure function of (master_seed, stream_id,
// position).  The generator is Philox4x32-10: the 64-bit master seed is the
// key, the stream id occupies the upper half of the 128-bit counter and the
// block index the lower half.  Nothing is shared between streams, so Monte
// Carlo replicates can be evaluated on any number of workers and still produce
// the same bits.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace erlab::prob {

/// 64-bit finalizer from SplitMix64; used to derive child stream ids.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  /// Independent sub-stream labelled by `k`.  Children of distinct parents or
  /// distinct labels collide with probability ~2^-64.
  [[nodiscard]] constexpr SeedSpec child(std::uint64_t k) const noexcept {
    return {master_seed, mix64(stream_id ^ mix64(k + 0x632BE59BD9B4E019ULL))};
  }

  friend constexpr bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// One Philox4x32-10 block.
constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Sequential reader over one counter-based stream.  A Stream is cheap to
/// construct and owns no shared state; create one per replicate.
///
/// Each block yields two 64-bit words; `normal()` consumes one block per pair
/// of deviates (Box-Muller), so normals 2b and 2b+1 come from block b.
class Stream {
 public:
  explicit Stream(SeedSpec seed, std::uint64_t first_block = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed.master_seed),
             static_cast<std::uint32_t>(seed.master_seed >> 32)},
        stream_id_(seed.stream_id),
        block_(first_block) {}

  std::uint64_t next_u64() noexcept {
    if (buffered_ == 0) refill();
    return buf_[2 - buffered_--];
  }

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // Realign to a fresh block so that normals never straddle blocks.
    buffered_ = 0;
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Index in [0, m).
  std::uint64_t below(std::uint64_t m) noexcept {
    // Lemire's multiply-shift; bias < m / 2^64, immaterial at our sizes.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * m) >> 64);
  }

 private:
  void refill() noexcept {
    const PhiloxCounter out = philox4x32_10(
        {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
         static_cast<std::uint32_t>(stream_id_),
         static_cast<std::uint32_t>(stream_id_ >> 32)},
        key_);
    ++block_;
    buf_[0] = (std::uint64_t{out[1]} << 32) | out[0];
    buf_[1] = (std::uint64_t{out[3]} << 32) | out[2];
    buffered_ = 2;
  }

  PhiloxKey key_;
  std::uint64_t stream_id_;
  std::uint64_t block_;
  std::array<std::uint64_t, 2> buf_{};
  int buffered_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace erlab::prob
