#pragma once

#include <array>
#include <cstdint>

namespace ldptails {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Stateless: the output is a pure function of counter and
/// key.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) noexcept {
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

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Independent uniform streams used by the library. The numeric values are
/// part of the reproducibility contract; do not renumber.
enum class Stream : std::uint32_t {
  kSample = 0,         // X_j draws
  kIndex = 1,          // big-jump index proposal
  kQuenchedTheta = 2,  // theta_j of a self-normalized scheme, keyed by scheme seed
  kAnnealedTheta = 3,  // theta_j redrawn per replication
};

/// Addressable uniform(0,1) variates: the value at (stream, n, i, j) depends on
/// nothing else, so any scheduling of replications sees the same draws.
class CounterUniforms {
 public:
  explicit constexpr CounterUniforms(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  /// Strictly inside (0,1); 53 random bits.
  constexpr double operator()(Stream stream, std::uint32_t n, std::uint64_t i,
                              std::uint32_t j) const noexcept {
    const Philox4x32::Counter ctr{
        j, static_cast<std::uint32_t>(i), n,
        (static_cast<std::uint32_t>(stream) << 24) ^ static_cast<std::uint32_t>(i >> 32)};
    const auto out = Philox4x32::generate(ctr, key_);
    const std::uint64_t bits =
        ((std::uint64_t{out[0]} << 32) | out[1]) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

 private:
  Philox4x32::Key key_;
};

}  // namespace ldptails
