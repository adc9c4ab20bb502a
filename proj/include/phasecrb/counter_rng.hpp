#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace phasecrb {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: the output is a pure function of (counter, key), so any sample
/// of a Monte Carlo stream can be regenerated from its index alone.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    ctr = round(ctr, key);
    for (int i = 1; i < 10; ++i) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Random draws addressed by (seed, index, stream).
class CounterStream {
 public:
  explicit constexpr CounterStream(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Philox4x32::Counter block(std::uint64_t index, std::uint32_t stream) const {
    return Philox4x32::generate(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream, 0u}, key_);
  }

  /// 53-bit uniform in [0, 1) from two 32-bit words.
  static constexpr double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t{hi} << 21) ^ (std::uint64_t{lo} >> 11);
    return static_cast<double>(bits) * 0x1.0p-53;
  }

  /// Two independent standard normals (Box-Muller) for sample `index`.
  std::array<double, 2> normal_pair(std::uint64_t index, std::uint32_t stream) const {
    const auto w = block(index, stream);
    const double u1 = 1.0 - to_unit(w[0], w[1]);  // (0, 1]
    const double u2 = to_unit(w[2], w[3]);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  /// Uniform integer in [0, n) for n a power of two; biased otherwise.
  std::uint32_t index_below(std::uint64_t index, std::uint32_t stream, std::uint32_t n) const {
    return block(index, stream)[0] % n;
  }

 private:
  Philox4x32::Key key_;
};

}  // namespace phasecrb
