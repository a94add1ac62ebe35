#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <set>

#include "sle/rng.hpp"

using namespace sle;

TEST_CASE("philox4x64-10 known-answer blocks", "[rng]") {
  // Reference outputs of the philox4x64-10 block function (numpy's Philox
  // bit generator evaluates the same cipher).
  const auto b0 = Philox4x64::block({1, 0, 0, 0}, {0, 0});
  CHECK(b0 == std::array<uint64_t, 4>{0x02f4ba6408e4d89bull, 0x3dd62b0b9ca8c5b2ull,
                                      0x1c8667a55d902e79ull, 0x907d7a052fd5b4dcull});

  const auto b1 =
      Philox4x64::block({0, 0, 0, 0}, {0xffffffffffffffffull, 0xffffffffffffffffull});
  CHECK(b1 == std::array<uint64_t, 4>{0x44b7493d1acfc229ull, 0x6636af8e997921ddull,
                                      0x3f73e132b5b3780eull, 0x605644dde03b01b1ull});

  const auto b2 = Philox4x64::block(
      {0x243f6a8885a308d4ull, 0x13198a2e03707344ull, 0xa4093822299f31d0ull, 0x082efa98ec4e6c89ull},
      {0x452821e638d01377ull, 0xbe5466cf34e90c6cull});
  CHECK(b2 == std::array<uint64_t, 4>{0x4c8e672094922aa3ull, 0x527061cd2884102aull,
                                      0xf4c265b2d783d553ull, 0x0556e76cb0298c8dull});

  const auto b3 = Philox4x64::block({2, 0, 0, 0}, {0xdeadbeefcafebabeull, 0x0123456789abcdefull});
  CHECK(b3 == std::array<uint64_t, 4>{0xcf094a5ddd11c645ull, 0x0afd05afa2f2e7c5ull,
                                      0x6bcc8d9c840ee47eull, 0x01c2e264d38bbafbull});
}

TEST_CASE("counter rng is a pure function of its address", "[rng]") {
  const CounterRng a(42, 7), b(42, 7), c(42, 8);
  CHECK(a.normal(123) == b.normal(123));
  CHECK(a.uniform(9, 1) == b.uniform(9, 1));
  CHECK(a.normal(123) != c.normal(123));
  CHECK(a.normal(123) != a.normal(124));
}

TEST_CASE("normal draws have unit variance", "[rng]") {
  const CounterRng gen(2024, 0);
  const std::size_t n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = gen.normal(i);
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST_CASE("splitmix64 reference sequence", "[rng]") {
  uint64_t state = 0;
  CHECK(splitmix64(state) == 0xE220A8397B1DCDAFull);
  CHECK(splitmix64(state) == 0x6E789E6AA1B965F4ull);
  CHECK(splitmix64(state) == 0x06C45D188009454Full);
}

TEST_CASE("seed expansion is deterministic and collision-free", "[rng]") {
  const auto seeds = expand_seeds(1234567, 1000);
  CHECK(seeds == expand_seeds(1234567, 1000));
  CHECK(seeds[0] == 0x599ED017FB08FC85ull);
  const std::set<uint64_t> uniq(seeds.begin(), seeds.end());
  CHECK(uniq.size() == seeds.size());
}
