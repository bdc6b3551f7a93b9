#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace nevlab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A block is a
/// pure function of (counter, key), which is what makes per-path streams
/// independent of scheduling.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Block generate(Block ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += 0x9E3779B9u;
        key[1] += 0xBB67AE85u;
      }
      const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }
};

/// Sequential view of the stream with key = seed and counter = (stream, block).
class PhiloxStream {
 public:
  PhiloxStream(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  Philox4x32::Block next() {
    const Philox4x32::Block ctr{static_cast<std::uint32_t>(stream_),
                                static_cast<std::uint32_t>(stream_ >> 32),
                                static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32)};
    ++block_;
    return Philox4x32::generate(ctr, key_);
  }

  std::uint64_t blocks_used() const { return block_; }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
};

/// Uniform in (0, 1) from 53 random bits; never 0, so log() is safe.
inline double uniform53(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Uniform in (0, 1) from 32 random bits.
inline double uniform32(std::uint32_t w) { return (static_cast<double>(w) + 0.5) * 0x1.0p-32; }

/// Pair of independent standard normals by Marsaglia's polar method. Each
/// block offers two candidate points; rejected blocks are skipped, so the
/// number of blocks consumed per pair is random but fixed by the stream.
inline std::array<double, 2> normal_pair(PhiloxStream& stream) {
  for (;;) {
    const Philox4x32::Block b = stream.next();
    for (int k = 0; k < 4; k += 2) {
      const double u = 2.0 * uniform32(b[k]) - 1.0;
      const double v = 2.0 * uniform32(b[k + 1]) - 1.0;
      const double s = u * u + v * v;
      if (s < 1.0) {
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        return {u * f, v * f};
      }
    }
  }
}

}  // namespace nevlab
