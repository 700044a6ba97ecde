#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>

namespace dk::rng {

/// Philox4x32-10 block cipher (Salmon et al., SC'11): a counter-based
/// generator, so every draw is a pure function of (key, counter).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
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

/// SplitMix64 finalizer; used to derive sub-seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed for replica r of a run with top-level seed s: mix64(s ^ mix64(r + 1)).
inline std::uint64_t replica_seed(std::uint64_t seed, std::uint64_t replica) {
  return mix64(seed ^ mix64(replica + 1));
}

/// Named sub-stream of a seed (e.g. particle initial positions vs. increments).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_tag) {
  return mix64(mix64(seed) + stream_tag * 0xD1B54A32D192ED03ull);
}

/// Two 53-bit uniforms in (0, 1) from one Philox block.
inline std::pair<double, double> uniform_pair(const Philox4x32::Counter& block) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  const std::uint64_t a = (static_cast<std::uint64_t>(block[0] >> 5) << 26) | (block[1] >> 6);
  const std::uint64_t b = (static_cast<std::uint64_t>(block[2] >> 5) << 26) | (block[3] >> 6);
  return {(static_cast<double>(a) + 0.5) * scale, (static_cast<double>(b) + 0.5) * scale};
}

/// Two independent standard normals keyed by (seed, a, b, stream).
inline std::pair<double, double> normal_pair(std::uint64_t seed, std::uint64_t a, std::uint32_t b,
                                             std::uint32_t stream = 0) {
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), b, stream};
  const auto [u1, u2] = uniform_pair(Philox4x32::generate(ctr, key));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

/// Two uniforms in (0, 1) keyed like normal_pair.
inline std::pair<double, double> uniform_pair(std::uint64_t seed, std::uint64_t a, std::uint32_t b,
                                              std::uint32_t stream = 0) {
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32), b, stream};
  return uniform_pair(Philox4x32::generate(ctr, key));
}

}  // namespace dk::rng
