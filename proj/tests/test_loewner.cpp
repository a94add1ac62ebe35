#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "sle/driving.hpp"
#include "sle/loewner.hpp"
#include "sle/rng.hpp"

using namespace sle;
using Catch::Approx;

namespace {
const ElementarySlit kUnit{0.0, 1.0};
}

TEST_CASE("slit_forward maps the tip to the driving point", "[loewner]") {
  const Complex img = slit_forward({0.0, 2.0}, kUnit);
  CHECK(std::abs(img) < 1e-15);
}

TEST_CASE("slit_forward matches the Loewner ODE off the slit", "[loewner]") {
  const Complex got = slit_forward({1.0, 0.0}, kUnit);
  CHECK(got.real() == Approx(std::sqrt(5.0)).epsilon(1e-12));
  CHECK(got.imag() == 0.0);

  // Independent check: integrate the ODE with constant driving.
  const auto ode = oracles::ode_slit_forward({1.0, 0.0}, 0.0, 1.0);
  CHECK(std::abs(got - ode) < 1e-8);

  const auto interior = slit_forward({0.7, 1.3}, kUnit);
  const auto interior_ode = oracles::ode_slit_forward({0.7, 1.3}, 0.0, 1.0);
  CHECK(std::abs(interior - interior_ode) < 1e-8);
}

TEST_CASE("slit_forward respects the hydrodynamic normalization", "[loewner]") {
  const Complex z{0.0, 10.0};
  const Complex got = slit_forward(z, kUnit);
  CHECK(got.real() == Approx(0.0).margin(1e-15));
  CHECK(got.imag() == Approx(std::sqrt(96.0)).epsilon(1e-12));
  const Complex asym = z + 2.0 / z;
  CHECK(std::abs(got - asym) / std::abs(asym) < 0.003);
}

TEST_CASE("slit_forward branch keeps both real sides in place", "[loewner]") {
  CHECK(slit_forward({-1.0, 0.0}, kUnit).real() == Approx(-std::sqrt(5.0)));
  CHECK(slit_forward({3.0, 0.0}, kUnit).real() == Approx(std::sqrt(13.0)));
  // Points just left of the slit keep Re < u.
  const auto left = slit_forward({-1e-9, 1.0}, kUnit);
  CHECK(left.real() < 0.0);
  CHECK(left.imag() > 0.0);
}

TEST_CASE("slit_forward rejects points on the open slit", "[loewner]") {
  CHECK_THROWS_AS(slit_forward({0.0, 1.0}, kUnit), std::domain_error);
  CHECK_NOTHROW(slit_forward({0.0, 2.0}, kUnit));   // tip is fine
  CHECK_NOTHROW(slit_forward({0.0, 2.5}, kUnit));   // above the tip is fine
}

TEST_CASE("slit_inverse closed forms", "[loewner]") {
  CHECK(std::abs(slit_inverse({0.0, 0.0}, kUnit) - Complex{0.0, 2.0}) < 1e-15);
  CHECK(std::abs(slit_inverse({std::sqrt(5.0), 0.0}, kUnit) - Complex{1.0, 0.0}) < 1e-12);
  const auto z = slit_inverse({0.0, 3.0}, kUnit);
  CHECK(z.real() == Approx(0.0).margin(1e-15));
  CHECK(z.imag() == Approx(std::sqrt(13.0)).epsilon(1e-12));
}

TEST_CASE("slit maps are mutually inverse", "[loewner]") {
  const CounterRng gen(5150, 0);
  for (uint64_t i = 0; i < 200; ++i) {
    const Complex z{4.0 * gen.normal(i, 0), 0.05 + std::abs(gen.normal(i, 1))};
    const ElementarySlit s{gen.normal(i, 2), 0.1 + std::abs(gen.normal(i, 3))};
    const Complex back = slit_inverse(slit_forward(z, s), s);
    CHECK(std::abs(back - z) < 1e-11 * (1.0 + std::abs(z)));
  }
}

TEST_CASE("chain_forward identity and stepwise composition", "[loewner]") {
  ConformalChain chain;
  const Complex z{1.0, 1.0};
  CHECK(chain.forward(z) == z);

  chain.append({0.0, 1.0});
  chain.append({0.0, 1.0});
  const Complex stepwise = chain.forward({0.0, 10.0});
  // Two unit slits at the same base compose to one slit of capacity time 2.
  const Complex oneshot = slit_forward({0.0, 10.0}, {0.0, 2.0});
  CHECK(std::abs(stepwise - oneshot) < 1e-12);
  const auto ode = oracles::ode_slit_forward({0.0, 10.0}, 0.0, 2.0);
  CHECK(std::abs(stepwise - ode) < 1e-8);
}

TEST_CASE("chain_forward far-field expansion", "[loewner]") {
  const double R = 1e4;
  const Complex z{0.0, R};

  // Chain growing at a fixed base: the deviation from z + 2t/z is the pure
  // second-order term, bounded by 10 t^2 / R^3.
  ConformalChain centered;
  for (int i = 0; i < 500; ++i) centered.append({0.0, 0.002});
  const double t = centered.total_time();
  CHECK(std::abs(centered.forward_deviation(z) - 2.0 * t / z) <= 10.0 * t * t / (R * R * R));

  // Wandering base: the second-order coefficient picks up the driving scale,
  // so the deviation is O(t * max|u| / R^2).
  const auto path = sample_sle_driving(6.0, 1.0, 200, 77);
  const auto chain = chain_from_path(path);
  double umax = 0.0;
  for (const double u : path.u) umax = std::max(umax, std::abs(u));
  const double tc = chain.total_time();
  CHECK(std::abs(chain.forward_deviation(z) - 2.0 * tc / z) <=
        8.0 * tc * (umax + 2.0 * std::sqrt(tc)) / (R * R));
}

TEST_CASE("chain_pullback identity and single slit", "[loewner]") {
  ConformalChain chain;
  const Complex w{0.3, 0.7};
  CHECK(chain.pullback(w) == w);
  chain.append({0.0, 1.0});
  CHECK(std::abs(chain.pullback({0.0, 0.0}) - Complex{0.0, 2.0}) < 1e-15);
}

TEST_CASE("round-trip through a thousand-slit chain", "[loewner]") {
  // Capacity 0.002 keeps the hull inside {Im <= 0.09}, so every point with
  // Im >= 0.1 stays uniformly conditioned: Im g_t(z)^2 >= Im z^2 - 4t along
  // the whole orbit, for any driving.
  const auto path = sample_sle_driving(6.0, 0.002, 1000, 4242);
  const auto chain = chain_from_path(path);
  const CounterRng gen(99, 0);
  for (uint64_t i = 0; i < 100; ++i) {
    const Complex z{1.5 * gen.normal(i, 0), 0.1 + 2.0 * std::abs(gen.normal(i, 1))};
    const Complex back = chain.pullback(chain.forward(z));
    CHECK(std::abs(back - z) < 1e-9);
  }
}

TEST_CASE("round-trip degrades only near the hull", "[loewner]") {
  // Deep under a capacity-1 hull the forward image can graze the axis and the
  // pullback loses digits; that regime is documented, not guaranteed.  Points
  // in the bulk keep full precision.
  const auto path = sample_sle_driving(6.0, 1.0, 1000, 4242);
  const auto chain = chain_from_path(path);
  const CounterRng gen(99, 0);
  std::vector<double> errs;
  for (uint64_t i = 0; i < 100; ++i) {
    const Complex z{6.0 * gen.normal(i, 0), 0.1 + 2.0 * std::abs(gen.normal(i, 1))};
    errs.push_back(std::abs(chain.pullback(chain.forward(z)) - z));
  }
  std::sort(errs.begin(), errs.end());
  CHECK(errs[errs.size() / 2] < 1e-10);  // bulk points are exact to rounding
  CHECK(errs.back() < 1e-4);             // grazing points degrade, boundedly
}

TEST_CASE("half-plane capacity bookkeeping", "[loewner]") {
  ConformalChain empty;
  CHECK(half_plane_capacity(empty) == 0.0);

  ConformalChain one;
  one.append({0.0, 1.0});
  CHECK(half_plane_capacity(one) == 2.0);

  // Normalization: Re(z * (g(z) - z)) at z = 1e6i recovers hcap.  The
  // deviation form avoids the catastrophic cancellation of g(z) - z there.
  const auto path = sample_sle_driving(6.0, 1.0, 500, 31337);
  const auto chain = chain_from_path(path);
  const Complex z{0.0, 1e6};
  const Complex fitted = z * chain.forward_deviation(z);
  CHECK(std::abs(fitted.real() - half_plane_capacity(chain)) < 1e-6);

  // A vertical slit of Euclidean height y is reached at delta = y^2/4 and has
  // hcap y^2/2: its tip maps to the driving point at exactly that capacity.
  const double y = 1.6;
  ConformalChain vert;
  vert.append({0.0, y * y / 4.0});
  CHECK(std::abs(slit_forward({0.0, y}, vert.slit(0))) < 1e-15);
  CHECK(half_plane_capacity(vert) == Approx(y * y / 2.0));
}

TEST_CASE("capacity additivity is exact under concatenation", "[loewner]") {
  const auto p1 = sample_sle_driving(6.0, 0.7, 311, 1);
  const auto p2 = sample_sle_driving(6.0, 0.9, 733, 2);
  const auto c1 = chain_from_path(p1);
  const auto c2 = chain_from_path(p2);
  const auto c = ConformalChain::concat(c1, c2);
  CHECK(half_plane_capacity(c) == half_plane_capacity(c1) + half_plane_capacity(c2));
}

TEST_CASE("real axis stays real under the chain", "[loewner]") {
  const auto path = sample_sle_driving(6.0, 1.0, 300, 8);
  const auto chain = chain_from_path(path);
  for (const double x : {-25.0, -10.0, 10.0, 25.0}) {
    const Complex img = chain.forward({x, 0.0});
    CHECK(std::abs(img.imag()) <= 1e-12);
  }
}

TEST_CASE("compensated capacity over many slits", "[loewner]") {
  ConformalChain chain;
  const double dt = 1e-6;
  for (int i = 0; i < 1000000; ++i) chain.append({0.0, dt});
  CHECK(std::abs(chain.total_time() - 1.0) < 1e-12);
}
