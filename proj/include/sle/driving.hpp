#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sle/errors.hpp"
#include "sle/loewner.hpp"
#include "sle/rng.hpp"

namespace sle {

enum class Side { left, right };

/// Marked boundary point of an SLE_kappa(rho) process.  Left force points sit
/// at x <= 0 and must be listed nearest-the-origin first (decreasing x); right
/// force points at x >= 0, increasing x.
struct ForcePoint {
  double x = 0.0;
  double rho = 0.0;
  Side side = Side::right;
};

/// Sampled driving function on a uniform capacity-time grid, together with the
/// force-point trajectories when present.  u[k] is U at time k*dt; u and every
/// v row share one length.  Immutable after sampling.
struct DrivingPath {
  double kappa = 0.0;
  double dt = 0.0;
  std::vector<double> u;
  std::vector<std::vector<double>> v;  // one row per force point
  std::uint64_t noise_seed = 0;
  std::optional<double> continuation_time;

  std::size_t step_count() const { return u.empty() ? 0 : u.size() - 1; }
  double horizon() const { return static_cast<double>(step_count()) * dt; }
};

/// Collision window used for force points and swallowed boundary points: the
/// sub-step overshoot scale of the driving noise.
inline double collision_tolerance(double kappa, double dt) { return std::sqrt(kappa * dt); }

/// Brownian increments on a uniform n-step grid over [0, horizon], addressed
/// dyadically.  Write n = m * 2^L with m odd: level 0 draws the m coarse
/// increments, and each level l > 0 splits every interval with a midpoint
/// bridge keyed by (l, index).  Sampling the same seed at 2n steps therefore
/// refines the same Brownian path: each coarse increment equals the sum of its
/// two children exactly.
inline std::vector<double> brownian_increments(std::uint64_t seed, std::uint64_t stream,
                                               double horizon, std::size_t steps) {
  if (steps < 1) throw std::invalid_argument("brownian_increments: steps must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("brownian_increments: horizon must be > 0");
  std::size_t m = steps;
  int levels = 0;
  while (m % 2 == 0) {
    m /= 2;
    ++levels;
  }
  const CounterRng gen(seed, stream);
  double h = horizon / static_cast<double>(m);
  std::vector<double> inc(m);
  const double s0 = std::sqrt(h);
  for (std::size_t k = 0; k < m; ++k) inc[k] = s0 * gen.normal(k, 0);
  for (int level = 1; level <= levels; ++level) {
    h *= 0.5;
    const double amp = std::sqrt(0.5 * h);
    std::vector<double> fine(inc.size() * 2);
    for (std::size_t k = 0; k < inc.size(); ++k) {
      const double left = 0.5 * inc[k] + amp * gen.normal(k, static_cast<std::uint64_t>(level));
      fine[2 * k] = left;
      fine[2 * k + 1] = inc[k] - left;  // exact pair sum
    }
    inc = std::move(fine);
  }
  return inc;
}

/// Plain SLE_kappa driving: U_0 = 0 and increments sqrt(kappa) * dB on the
/// uniform grid.  Identical (parameters, seed) give a bit-identical path.
inline DrivingPath sample_sle_driving(double kappa, double horizon, std::size_t steps,
                                      std::uint64_t seed) {
  if (!(kappa > 0.0)) throw std::invalid_argument("sample_sle_driving: kappa must be > 0");
  if (steps < 1) throw std::invalid_argument("sample_sle_driving: steps must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_sle_driving: horizon must be > 0");
  const auto inc = brownian_increments(seed, 0, horizon, steps);
  DrivingPath path;
  path.kappa = kappa;
  path.dt = horizon / static_cast<double>(steps);
  path.noise_seed = seed;
  path.u.resize(steps + 1);
  path.u[0] = 0.0;
  const double scale = std::sqrt(kappa);
  for (std::size_t k = 0; k < steps; ++k) path.u[k + 1] = path.u[k] + scale * inc[k];
  return path;
}

namespace detail {

inline double side_sign(Side s) { return s == Side::right ? 1.0 : -1.0; }

/// Partial weight sums in the nearest-origin-first order, per side, aligned
/// with the input list.
inline std::vector<double> partial_weight_sums(const std::vector<ForcePoint>& fps) {
  std::vector<double> sums(fps.size(), 0.0);
  double left = 0.0, right = 0.0;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    if (fps[i].side == Side::left) {
      left += fps[i].rho;
      sums[i] = left;
    } else {
      right += fps[i].rho;
      sums[i] = right;
    }
  }
  return sums;
}

inline void validate_force_points(const std::vector<ForcePoint>& fps) {
  double last_left = 0.0, last_right = 0.0;
  bool seen_left = false, seen_right = false;
  for (const auto& fp : fps) {
    if (fp.side == Side::left) {
      if (fp.x > 0.0) throw std::invalid_argument("force point: left side requires x <= 0");
      if (seen_left && fp.x > last_left)
        throw std::invalid_argument("force points: left list must decrease away from 0");
      last_left = fp.x;
      seen_left = true;
    } else {
      if (fp.x < 0.0) throw std::invalid_argument("force point: right side requires x >= 0");
      if (seen_right && fp.x < last_right)
        throw std::invalid_argument("force points: right list must increase away from 0");
      last_right = fp.x;
      seen_right = true;
    }
  }
}

}  // namespace detail

/// SLE_kappa(rho_L; rho_R) driving via Euler-Maruyama on the driving SDE with
/// drift sum_i rho_i / (U - V^i), force points advected by the Loewner flow
/// dV = 2/(V - U) dt.  Within the collision window |U - V| < eps_c the force
/// point advances by the exact elementary-slit image instead of the Euler
/// drift, and a step that would carry U across a surviving force point
/// (partial weight sum > -2) is reflected back across it.  A collision where
/// the partial weight sum is <= -2 sets continuation_time and truncates the
/// path at that grid time.
inline DrivingPath sample_sle_rho_driving(double kappa, const std::vector<ForcePoint>& fps,
                                          double horizon, std::size_t steps,
                                          std::uint64_t seed) {
  if (!(kappa > 0.0)) throw std::invalid_argument("sample_sle_rho_driving: kappa must be > 0");
  if (steps < 1) throw std::invalid_argument("sample_sle_rho_driving: steps must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_sle_rho_driving: horizon must be > 0");
  detail::validate_force_points(fps);

  const auto inc = brownian_increments(seed, 0, horizon, steps);
  const double dt = horizon / static_cast<double>(steps);
  const double eps_c = collision_tolerance(kappa, dt);
  const double scale = std::sqrt(kappa);
  const auto sums = detail::partial_weight_sums(fps);

  DrivingPath path;
  path.kappa = kappa;
  path.dt = dt;
  path.noise_seed = seed;
  path.u.reserve(steps + 1);
  path.u.push_back(0.0);
  path.v.resize(fps.size());
  for (std::size_t i = 0; i < fps.size(); ++i) {
    path.v[i].reserve(steps + 1);
    path.v[i].push_back(fps[i].x);
  }

  for (std::size_t k = 0; k <= steps; ++k) {
    const double uk = path.u[k];
    // Continuation threshold: collision at a grid time with cumulative weight
    // <= -2 stops the process here.
    for (std::size_t i = 0; i < fps.size(); ++i) {
      if (sums[i] <= -2.0 && std::abs(uk - path.v[i][k]) <= eps_c) {
        path.continuation_time = static_cast<double>(k) * dt;
        return path;
      }
    }
    if (k == steps) break;

    double drift = 0.0;
    for (std::size_t i = 0; i < fps.size(); ++i) {
      double d = uk - path.v[i][k];
      if (std::abs(d) < eps_c) {
        // Regularize the integrable singularity; U sits on the hull side of V.
        const double s = d != 0.0 ? d : -detail::side_sign(fps[i].side);
        d = std::copysign(eps_c, s);
      }
      drift += fps[i].rho / d;
    }
    if (std::abs(drift) * dt > 10.0 * std::sqrt(kappa * dt))
      throw step_size_error("sample_sle_rho_driving: drift exceeds stability bound", k);

    const double u_next = uk + drift * dt + scale * inc[k];
    bool threshold_hit = false;
    for (std::size_t i = 0; i < fps.size(); ++i) {
      const double vk = path.v[i][k];
      const double d = vk - uk;
      double v_next;
      if (std::abs(d) < eps_c) {
        const double s = d != 0.0 ? std::copysign(1.0, d) : detail::side_sign(fps[i].side);
        v_next = uk + s * std::sqrt(d * d + 4.0 * dt);  // exact slit image
      } else {
        v_next = vk + 2.0 * dt / d;
      }
      const double s = detail::side_sign(fps[i].side);
      if ((v_next - u_next) * s < 0.0) {
        if (sums[i] > -2.0) {
          v_next = u_next + s * std::abs(v_next - u_next);  // reflect, keep the side
        } else {
          threshold_hit = true;
        }
      }
      path.v[i].push_back(v_next);
    }
    path.u.push_back(u_next);
    if (threshold_hit) {
      path.continuation_time = static_cast<double>(k + 1) * dt;
      return path;
    }
  }
  return path;
}

/// Earliest grid time at which the driving collides with a force point whose
/// cumulative weight is <= -2; std::nullopt when no such time exists.
inline std::optional<double> detect_continuation_threshold(const DrivingPath& path,
                                                           const std::vector<ForcePoint>& fps) {
  if (path.v.size() != fps.size())
    throw std::invalid_argument("detect_continuation_threshold: path/force-point mismatch");
  const double eps_c = collision_tolerance(path.kappa, path.dt);
  const auto sums = detail::partial_weight_sums(fps);
  for (std::size_t k = 0; k < path.u.size(); ++k) {
    for (std::size_t i = 0; i < fps.size(); ++i) {
      if (sums[i] <= -2.0 && std::abs(path.u[k] - path.v[i][k]) <= eps_c)
        return static_cast<double>(k) * path.dt;
    }
  }
  return std::nullopt;
}

/// The elementary-slit chain realizing the path's Loewner evolution.
inline ConformalChain chain_from_path(const DrivingPath& path) {
  ConformalChain chain;
  for (std::size_t k = 0; k < path.step_count(); ++k) chain.append({path.u[k], path.dt});
  return chain;
}

}  // namespace sle
