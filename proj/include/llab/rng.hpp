#pragma once

#include <array>
#include <cstdint>

namespace llab {

/// Philox4x32-10 (Salmon et al.). Stateless: every output block is a pure
/// function of (counter, key), so draw j of a stream never depends on draws < j.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) {
    for (int r = 0; r < 10; ++r) {
      if (r > 0) {
        key[0] += kW0;
        key[1] += kW1;
      }
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53u;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kW0 = 0x9E3779B9u;
  static constexpr std::uint32_t kW1 = 0xBB67AE85u;

  static Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Uniform doubles keyed by (seed, index, stream).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Two 64-bit words for the given index and stream.
  std::array<std::uint64_t, 2> bits(std::uint64_t index, std::uint32_t stream = 0) const {
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream,
                                  0u};
    const Philox4x32::Key key{static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
    const auto o = Philox4x32::block(ctr, key);
    return {(static_cast<std::uint64_t>(o[1]) << 32) | o[0], (static_cast<std::uint64_t>(o[3]) << 32) | o[2]};
  }

  /// Uniform on (0, 1]; 53 random bits.
  double uniform(std::uint64_t index, std::uint32_t stream = 0) const {
    return to_unit(bits(index, stream)[0]);
  }

  static double to_unit(std::uint64_t x) { return static_cast<double>((x >> 11) + 1) * 0x1.0p-53; }

 private:
  std::uint64_t seed_;
};

}  // namespace llab
