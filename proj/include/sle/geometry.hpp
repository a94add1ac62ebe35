#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <vector>

#include "sle/loewner.hpp"

namespace sle {

namespace detail {

inline double cross(const Complex& o, const Complex& a, const Complex& b) {
  return (a.real() - o.real()) * (b.imag() - o.imag()) -
         (a.imag() - o.imag()) * (b.real() - o.real());
}

/// Andrew monotone chain; returns hull vertices in counter-clockwise order,
/// collinear points dropped.
inline std::vector<Complex> convex_hull(std::vector<Complex> pts) {
  std::sort(pts.begin(), pts.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  std::vector<Complex> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = n - 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace detail

/// Maximum pairwise Euclidean distance of a nonempty point set, via convex
/// hull and rotating calipers.
inline double diameter(std::span<const Complex> points) {
  if (points.empty()) throw std::invalid_argument("diameter: empty point set");
  const auto hull = detail::convex_hull({points.begin(), points.end()});
  const std::size_t m = hull.size();
  if (m == 1) return 0.0;
  if (m == 2) return std::abs(hull[1] - hull[0]);
  double best = 0.0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < m; ++i) {
    const Complex& a = hull[i];
    const Complex& b = hull[(i + 1) % m];
    // Advance the antipodal point while it moves away from edge (a, b).
    while (true) {
      const std::size_t jn = (j + 1) % m;
      if (std::abs(detail::cross(a, b, hull[jn])) > std::abs(detail::cross(a, b, hull[j]))) {
        j = jn;
      } else {
        break;
      }
    }
    best = std::max({best, std::abs(hull[j] - a), std::abs(hull[j] - b)});
  }
  return best;
}

inline double diameter(const std::vector<Complex>& points) {
  return diameter(std::span<const Complex>(points));
}

}  // namespace sle
