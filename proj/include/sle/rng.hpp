#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace sle {

using std::uint64_t;

namespace detail {
inline uint64_t mulhi64(uint64_t a, uint64_t b) {
  return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) >> 64);
}
}  // namespace detail

/// Philox 4x64-10 counter-block cipher (Salmon et al., "Parallel random
/// numbers: as easy as 1, 2, 3").  A pure function of (counter, key): the same
/// pair always yields the same 256-bit block, so every sampler built on it is
/// replayable and independent of evaluation order.
struct Philox4x64 {
  static constexpr uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
  static constexpr uint64_t kMul1 = 0xCA5A826395121157ull;
  static constexpr uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
  static constexpr uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

  static std::array<uint64_t, 4> block(std::array<uint64_t, 4> ctr,
                                       std::array<uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const uint64_t hi0 = detail::mulhi64(kMul0, ctr[0]);
      const uint64_t lo0 = kMul0 * ctr[0];
      const uint64_t hi1 = detail::mulhi64(kMul1, ctr[2]);
      const uint64_t lo1 = kMul1 * ctr[2];
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// Map 64 random bits to a double in [0, 1).
inline double bits_to_unit(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// One addressable stream of i.i.d. draws.  Draw i of stream (seed, stream) is
/// a fixed function of (seed, stream, index, slot); indices may be consumed in
/// any order, from any thread.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream = 0) : key_{seed, stream} {}

  double uniform(uint64_t index, uint64_t slot = 0) const {
    return bits_to_unit(Philox4x64::block({index, slot, 0, 0}, key_)[0]);
  }

  /// Standard normal via Box-Muller on lanes 0 and 1 of the block.
  double normal(uint64_t index, uint64_t slot = 0) const {
    const auto b = Philox4x64::block({index, slot, 0, 0}, key_);
    const double u1 = bits_to_unit(b[0]);
    const double u2 = bits_to_unit(b[1]);
    // 1 - u1 lies in (0, 1], keeping the log finite.
    const double radius = std::sqrt(-2.0 * std::log1p(-u1));
    return radius * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::array<uint64_t, 2> key_;
};

/// SplitMix64 step (Steele, Lea, Flood).
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Ensemble seed expansion: member i receives the i-th output of a SplitMix64
/// sequence started at `base`.  This is the documented (base, count) rule used
/// by the CLI's `--seeds base:count` form.
inline std::vector<uint64_t> expand_seeds(uint64_t base, std::size_t count) {
  std::vector<uint64_t> seeds(count);
  uint64_t state = base;
  for (auto& s : seeds) s = splitmix64(state);
  return seeds;
}

}  // namespace sle
