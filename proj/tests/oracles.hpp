#pragma once

// Test-only reference implementations, kept independent of the library's
// computation paths: the Loewner ODE is integrated directly instead of using
// the closed-form slit map, and the diameter is brute force.

#include <cmath>
#include <complex>
#include <span>
#include <vector>

namespace oracles {

/// Integrate dg/dt = 2 / (g - u) with constant driving from g(0) = z0 over
/// [0, delta] by classical RK4 on a fixed fine grid.
inline std::complex<double> ode_slit_forward(std::complex<double> z0, double u, double delta,
                                             int substeps = 200000) {
  const std::complex<double> uc{u, 0.0};
  const auto f = [&](std::complex<double> g) { return 2.0 / (g - uc); };
  const double h = delta / substeps;
  std::complex<double> g = z0;
  for (int i = 0; i < substeps; ++i) {
    const auto k1 = f(g);
    const auto k2 = f(g + 0.5 * h * k1);
    const auto k3 = f(g + 0.5 * h * k2);
    const auto k4 = f(g + h * k3);
    g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return g;
}

/// O(n^2) diameter.
inline double brute_diameter(std::span<const std::complex<double>> pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      best = std::max(best, std::abs(pts[i] - pts[j]));
  return best;
}

}  // namespace oracles
