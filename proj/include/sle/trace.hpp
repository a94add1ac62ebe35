#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sle/driving.hpp"
#include "sle/loewner.hpp"

namespace sle {

/// Time-ordered samples of the Loewner trace eta(t) in the closed upper
/// half-plane.  points[0] == 0; steps[i] is the driving-grid index of sample
/// i, so times[i] == steps[i] * dt.
struct Trace {
  std::vector<double> times;
  std::vector<Complex> points;
  std::vector<std::size_t> steps;
  double kappa = 0.0;
  double dt = 0.0;
};

/// Reconstruct the trace from a driving path.  The sample at grid step k is
/// the exact tip of the discrete hull: the driving value that grew the last
/// slit, pulled back through all k slits (the first inverse lifts it to the
/// slit tip u + 2i*sqrt(dt)).  Samples are taken every `sample_stride` steps
/// plus the final step.
///
/// Evaluation near deep fjords of the hull is ill-conditioned: the pulled-back
/// tip can lose relative accuracy where the inverse maps contract strongly.
/// This is inherent to evaluating g_t^{-1} and is not detected at runtime.
inline Trace compute_trace(const DrivingPath& path, std::size_t sample_stride = 1) {
  if (sample_stride < 1) throw std::invalid_argument("compute_trace: stride must be >= 1");
  const std::size_t n = path.step_count();

  Trace tr;
  tr.kappa = path.kappa;
  tr.dt = path.dt;
  std::vector<std::size_t> ks;
  for (std::size_t k = sample_stride; k <= n; k += sample_stride) ks.push_back(k);
  if (n > 0 && (ks.empty() || ks.back() != n)) ks.push_back(n);

  // One reverse sweep over the slits evaluates every sample: sample k joins
  // the active set at slit k-1 as the real point u[k-1] and then receives all
  // remaining inverse maps down to slit 0.
  std::vector<double> xs(ks.size()), ys(ks.size());
  std::size_t active = ks.size();
  const double d4 = 4.0 * path.dt;
  for (std::size_t j = n; j-- > 0;) {
    while (active > 0 && ks[active - 1] - 1 == j) {
      --active;
      xs[active] = path.u[j];
      ys[active] = 0.0;
    }
    const double uj = path.u[j];
    for (std::size_t i = active; i < ks.size(); ++i) {
      const double dr = xs[i] - uj;
      const double di = ys[i];
      const double wr = dr * dr - di * di - d4;
      const double wi = 2.0 * dr * di;
      double re, im;
      if (wi == 0.0) {
        if (wr >= 0.0) {
          re = std::copysign(std::sqrt(wr), dr >= 0.0 ? 1.0 : -1.0);
          im = 0.0;
        } else {
          re = 0.0;
          im = std::sqrt(-wr);
        }
      } else {
        const double r = std::sqrt(wr * wr + wi * wi);
        if (wr >= 0.0) {
          re = std::sqrt(0.5 * (r + wr));
          im = wi / (2.0 * re);
        } else {
          im = std::copysign(std::sqrt(0.5 * (r - wr)), wi);
          re = wi / (2.0 * im);
        }
        if (im < 0.0) {
          re = -re;
          im = -im;
        }
      }
      xs[i] = uj + re;
      ys[i] = im;
    }
  }

  tr.times.reserve(ks.size() + 1);
  tr.points.reserve(ks.size() + 1);
  tr.steps.reserve(ks.size() + 1);
  tr.times.push_back(0.0);
  tr.points.push_back({0.0, 0.0});
  tr.steps.push_back(0);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    tr.times.push_back(static_cast<double>(ks[i]) * path.dt);
    tr.points.push_back({xs[i], ys[i]});
    tr.steps.push_back(ks[i]);
  }
  return tr;
}

/// Median Euclidean gap between consecutive trace samples; 0 for traces with
/// fewer than two points.
inline double median_sample_gap(const Trace& tr) {
  if (tr.points.size() < 2) return 0.0;
  std::vector<double> gaps(tr.points.size() - 1);
  for (std::size_t i = 0; i + 1 < tr.points.size(); ++i)
    gaps[i] = std::abs(tr.points[i + 1] - tr.points[i]);
  auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
  std::nth_element(gaps.begin(), mid, gaps.end());
  return *mid;
}

}  // namespace sle
