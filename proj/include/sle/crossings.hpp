#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sle/errors.hpp"
#include "sle/geometry.hpp"
#include "sle/trace.hpp"

namespace sle {

/// Detection tolerances for real-axis hits: a sample is a hit when
/// Im eta <= delta and |Re eta| > delta0 (the dead zone suppresses sign flips
/// from sampling noise at the origin).
struct CrossingTolerances {
  double delta = 0.0;
  double delta0 = 0.0;
};

/// Default policy: delta = 4x the median consecutive-sample gap, dead zone
/// delta0 = 2*delta.
inline CrossingTolerances default_crossing_tolerances(const Trace& tr) {
  const double d = 4.0 * median_sample_gap(tr);
  return {d, 2.0 * d};
}

/// Left-right crossing times about the origin: tau_j is recorded whenever the
/// sign of the most recent real-axis hit flips.  sides[j] is the sign of the
/// half-axis just hit, so sides alternate by construction.
struct CrossingTimes {
  std::vector<double> taus;
  std::vector<int> sides;                 // +1 or -1
  std::vector<std::size_t> sample_index;  // trace sample at each tau
  double tol_axis = 0.0;
  double tol_origin = 0.0;
};

inline CrossingTimes crossing_times(const Trace& tr, double delta, double delta0) {
  if (!(delta > 0.0) || !(delta0 > 0.0))
    throw std::invalid_argument("crossing_times: tolerances must be > 0");
  CrossingTimes ct;
  ct.tol_axis = delta;
  ct.tol_origin = delta0;
  int last = 0;
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    const auto& p = tr.points[i];
    if (p.imag() > delta || std::abs(p.real()) <= delta0) continue;
    const int s = p.real() > 0.0 ? 1 : -1;
    if (last != 0 && s != last) {
      ct.taus.push_back(tr.times[i]);
      ct.sides.push_back(s);
      ct.sample_index.push_back(i);
    }
    last = s;
  }
  return ct;
}

inline CrossingTimes crossing_times(const Trace& tr, const CrossingTolerances& tol) {
  return crossing_times(tr, tol.delta, tol.delta0);
}

/// The j-th excursion eta|[tau_{j-1}, tau_j] (j is 1-based; excursion j ends
/// at the j-th recorded crossing).
struct ExcursionRecord {
  std::size_t j = 0;
  double t_begin = 0.0;
  double t_end = 0.0;
  double diam = 0.0;
};

/// n-th excursion, in time order, whose trace diameter is at least r.  Only
/// samples up to the candidate excursion's end are read, so the selection is
/// a stopping rule.
inline ExcursionRecord select_excursion(const CrossingTimes& ct, const Trace& tr, double r,
                                        std::size_t n) {
  if (!(r > 0.0)) throw std::invalid_argument("select_excursion: r must be > 0");
  if (n < 1) throw std::invalid_argument("select_excursion: n must be >= 1");
  std::size_t found = 0;
  for (std::size_t j = 1; j < ct.taus.size(); ++j) {
    const std::size_t lo = ct.sample_index[j - 1];
    const std::size_t hi = ct.sample_index[j];
    const double d =
        diameter(std::span<const Complex>(tr.points.data() + lo, hi - lo + 1));
    if (d >= r && ++found == n) return {j, ct.taus[j - 1], ct.taus[j], d};
  }
  throw not_found_error("select_excursion: fewer than n excursions of diameter >= r");
}

/// Marked points of one excursion: images of the within-excursion tips under
/// the time-tau_J map, shifted by the driving value.  xs accumulates toward 0
/// (the mapped tip).
struct MarkedPointSet {
  std::size_t J = 0;
  std::vector<double> xs;
  std::vector<double> sigma_times;
  double tau_J = 0.0;
  std::size_t tau_step = 0;  // driving-grid index of tau_J
};

/// For each sample time s in (tau_{J-1}, tau_J], the tip image under the
/// time-tau_J map is w(s) = (slits index(s) .. index(tau_J)) applied to U_s,
/// minus U_{tau_J} — exact in the discrete model since eta(s) = g_s^{-1}(U_s).
/// Values landing left of the dead zone are clustered with separation
/// eps_sep; cluster representatives, in order of first landing, are the
/// marked points, and the first-landing times are the sigma hit times.
inline MarkedPointSet marked_points(const Trace& tr, const DrivingPath& path,
                                    const ExcursionRecord& exc, double eps_sep, double delta0) {
  if (!(eps_sep > 0.0)) throw std::invalid_argument("marked_points: eps_sep must be > 0");
  MarkedPointSet out;
  out.J = exc.j;
  out.tau_J = exc.t_end;

  const std::size_t k_end = static_cast<std::size_t>(std::llround(exc.t_end / path.dt));
  out.tau_step = k_end;
  const double u_end = path.u[k_end];

  // Walk samples inside the excursion; apply the remaining slits to each tip
  // value.  The prong of the first slit (the tip sits exactly at its base) is
  // taken opposite to the driving's departure; the ambiguity is O(sqrt(dt)),
  // far below any sensible eps_sep.
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const double t = tr.times[i];
    if (t <= exc.t_begin || t > exc.t_end) continue;
    const std::size_t ks = tr.steps[i];
    double w = path.u[ks];
    for (std::size_t j = ks; j < k_end; ++j) {
      const double d = w - path.u[j];
      const double m = std::sqrt(d * d + 4.0 * path.dt);
      if (d == 0.0) {
        const double dir = (j + 1 < path.u.size() && path.u[j + 1] >= path.u[j]) ? -1.0 : 1.0;
        w = path.u[j] + dir * m;
      } else {
        w = path.u[j] + std::copysign(m, d);
      }
    }
    const double landing = w - u_end;
    if (landing >= -delta0) continue;
    bool merged = false;
    for (const double rep : out.xs) {
      if (std::abs(landing - rep) < eps_sep) {
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.xs.push_back(landing);
      out.sigma_times.push_back(t);
    }
  }
  return out;
}

/// Counts of future crossing endpoints per marked-point interval.
struct CountVector {
  std::vector<long> counts;  // counts[k]: endpoints in [xs[k], xs[k+1])
  double horizon = 0.0;
  std::size_t outside = 0;  // endpoints in no interval
  std::size_t total = 0;    // all detected negative-side endpoints
};

/// Bin endpoints into the consecutive marked-point intervals (half-open,
/// lower edge included).
inline CountVector bin_crossing_endpoints(const std::vector<double>& endpoints,
                                          const std::vector<double>& xs, double horizon) {
  CountVector cv;
  cv.horizon = horizon;
  if (xs.size() >= 2) cv.counts.assign(xs.size() - 1, 0);
  cv.total = endpoints.size();
  for (const double e : endpoints) {
    bool binned = false;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
      const double lo = std::min(xs[k], xs[k + 1]);
      const double hi = std::max(xs[k], xs[k + 1]);
      if (e >= lo && e < hi) {
        ++cv.counts[k];
        binned = true;
        break;
      }
    }
    if (!binned) ++cv.outside;
  }
  return cv;
}

/// Crossing endpoints of the future curve, observed in the time-tau_J chart.
/// By the domain Markov property the driving increments after tau_J define a
/// fresh SLE from 0 in that chart, so the future crossings are detected by
/// re-running the trace and crossing scan on the re-based driving.  Each
/// left-to-negative crossing contributes its landing point (the first
/// real-axis hit after the sign flip).
inline std::vector<double> future_crossing_endpoints(const DrivingPath& path,
                                                     std::size_t from_step, double horizon,
                                                     std::size_t stride,
                                                     const CrossingTolerances& tol) {
  const std::size_t avail = path.step_count() - from_step;
  const auto want = static_cast<std::size_t>(std::llround(horizon / path.dt));
  if (want > avail)
    throw std::invalid_argument("future_crossing_endpoints: trace shorter than future horizon");
  DrivingPath fut;
  fut.kappa = path.kappa;
  fut.dt = path.dt;
  fut.noise_seed = path.noise_seed;
  fut.u.resize(want + 1);
  const double base = path.u[from_step];
  for (std::size_t m = 0; m <= want; ++m) fut.u[m] = path.u[from_step + m] - base;
  const Trace ftr = compute_trace(fut, stride);
  const CrossingTimes fct = crossing_times(ftr, tol);
  std::vector<double> endpoints;
  for (std::size_t j = 0; j < fct.taus.size(); ++j) {
    if (fct.sides[j] < 0) endpoints.push_back(ftr.points[fct.sample_index[j]].real());
  }
  return endpoints;
}

/// N_k of the selected excursion: future crossing endpoints per interval
/// [xs[k], xs[k+1]) over the given capacity-time window after tau_J.
inline CountVector crossing_counts(const Trace& tr, const DrivingPath& path,
                                   const MarkedPointSet& mps, double future_horizon,
                                   const CrossingTolerances& tol, std::size_t stride = 1) {
  (void)tr;
  const auto endpoints =
      future_crossing_endpoints(path, mps.tau_step, future_horizon, stride, tol);
  return bin_crossing_endpoints(endpoints, mps.xs, future_horizon);
}

/// Harmonic measure from infinity of a real interval [a, b] in the complement
/// of the chain's hull: the Euclidean length of its image on R.  Endpoints
/// exactly at a slit base are carried along the hull boundary on their
/// approach side, so an interval containing the hull base measures the hull
/// boundary as well (e.g. the two sides of a single slit measure 4*sqrt(delta)
/// x 2).  An endpoint with no side preference that collides with a base is a
/// swallowed point and raises std::domain_error (see slit_forward_real).
inline double harmonic_measure_from_infinity(const ConformalChain& chain, double a, double b) {
  if (!(a <= b)) throw std::invalid_argument("harmonic_measure_from_infinity: need a <= b");
  const double fa = chain.forward_real(a, 0, chain.size(), -1.0);
  const double fb = chain.forward_real(b, 0, chain.size(), +1.0);
  return fb - fa;
}

}  // namespace sle
