#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sle/driving.hpp"
#include "sle/rng.hpp"

namespace sle {

/// Boundary hitting query: does the trace visit [c, oo) before (-oo, a]?
/// Meaningful for kappa > 4; below that the curve a.s. hits neither half-line.
struct HittingQuery {
  double kappa;
  double a;  // < 0
  double c;  // > 0
};

namespace detail {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence.
struct GaussRule {
  std::vector<double> x, w;
};

inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.x.resize(n);
  rule.w.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    rule.x[i] = -z;
    rule.x[n - 1 - i] = z;
    rule.w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.w[n - 1 - i] = rule.w[i];
  }
  return rule;
}

/// Integral of u^(beta-1) (1-u)^(beta-1) du over [0, x] for x <= 1/2, via the
/// substitution u = s^(1/beta) which removes the endpoint singularity:
/// the integrand becomes (1/beta) (1 - s^(1/beta))^(beta-1) on [0, x^beta].
inline double beta_panel(double beta, double x, const GaussRule& rule) {
  if (x <= 0.0) return 0.0;
  const double upper = std::pow(x, beta);
  const double half = 0.5 * upper;
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) {
    const double s = half * (rule.x[i] + 1.0);
    acc += rule.w[i] * std::pow(1.0 - std::pow(s, 1.0 / beta), beta - 1.0);
  }
  return acc * half / beta;
}

}  // namespace detail

/// Normalization Z_kappa: the full integral of u^(-4/kappa) (1-u)^(-4/kappa)
/// over [0, 1], so that F(1) = 1.
inline double beffara_normalization(double kappa, int nodes = 64) {
  if (!(kappa > 4.0)) throw std::invalid_argument("beffara_normalization: kappa must be > 4");
  const double beta = 1.0 - 4.0 / kappa;
  const auto rule = detail::gauss_legendre(nodes);
  return 2.0 * detail::beta_panel(beta, 0.5, rule);
}

/// F(x) = (1/Z_kappa) * integral_0^x du / (u^(4/kappa) (1-u)^(4/kappa)): the
/// probability that the trace visits [c, oo) before (-oo, a] at x = -a/(c-a).
/// Singularity-removing substitution plus Gauss-Legendre; the x > 1/2 half is
/// evaluated by the mirror identity, which also makes F(x) + F(1-x) = 1 hold
/// to rounding.
inline double beffara_F(double kappa, double x, int nodes = 64) {
  if (!(kappa > 4.0)) throw std::invalid_argument("beffara_F: kappa must be > 4");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("beffara_F: x must lie in [0, 1]");
  const double beta = 1.0 - 4.0 / kappa;
  const auto rule = detail::gauss_legendre(nodes);
  const double half_mass = detail::beta_panel(beta, 0.5, rule);
  const double z = 2.0 * half_mass;
  if (x <= 0.5) return detail::beta_panel(beta, x, rule) / z;
  return (z - detail::beta_panel(beta, 1.0 - x, rule)) / z;
}

/// Monte Carlo estimate of the hitting probability together with the
/// quadrature value it should match.
struct HittingEstimate {
  double p_hat = 0.0;
  double stderr_ = 0.0;
  std::size_t n_traces = 0;  // resolved trials
  double f_theory = 0.0;
  double z_kappa = 0.0;
  std::size_t unresolved = 0;  // trials that exhausted the horizon
};

/// Estimate P[visit [c, oo) before (-oo, a]] by evolving the boundary images
/// Y^x_t = g_t(x) - U_t alongside the driving.  Each Loewner step uses the
/// exact elementary-slit image sign(Y) * sqrt(Y^2 + 4 dt) - dU; a trial
/// resolves when one image first enters the collision window (that boundary
/// point is swallowed, i.e. the trace has visited the corresponding
/// half-line).  Trial i draws its own increment stream (seed, stream = i).
inline HittingEstimate mc_hitting(const HittingQuery& q, std::size_t n_traces, std::size_t steps,
                                  double horizon, std::uint64_t seed) {
  if (!(q.kappa > 4.0)) throw std::invalid_argument("mc_hitting: kappa must be > 4");
  if (!(q.a < 0.0 && q.c > 0.0)) throw std::invalid_argument("mc_hitting: need a < 0 < c");
  if (n_traces < 1 || steps < 1) throw std::invalid_argument("mc_hitting: empty run");
  if (!(horizon > 0.0)) throw std::invalid_argument("mc_hitting: horizon must be > 0");

  const double dt = horizon / static_cast<double>(steps);
  const double eps = collision_tolerance(q.kappa, dt);
  const double scale = std::sqrt(q.kappa);

  std::size_t c_first = 0, resolved = 0, unresolved = 0;
  for (std::size_t trial = 0; trial < n_traces; ++trial) {
    const auto inc = brownian_increments(seed, trial, horizon, steps);
    double ya = q.a, yc = q.c;
    bool done = false;
    for (std::size_t j = 0; j < steps && !done; ++j) {
      const double du = scale * inc[j];
      ya = -std::sqrt(ya * ya + 4.0 * dt) - du;
      yc = std::sqrt(yc * yc + 4.0 * dt) - du;
      const bool c_hit = yc <= eps;
      const bool a_hit = ya >= -eps;
      if (c_hit || a_hit) {
        ++resolved;
        // Simultaneous hits resolve to the deeper violation.
        if (c_hit && (!a_hit || eps - yc >= ya + eps)) ++c_first;
        done = true;
      }
    }
    if (!done) ++unresolved;
  }

  HittingEstimate est;
  est.n_traces = resolved;
  est.unresolved = unresolved;
  est.p_hat = resolved ? static_cast<double>(c_first) / static_cast<double>(resolved) : 0.0;
  est.stderr_ =
      resolved ? std::sqrt(est.p_hat * (1.0 - est.p_hat) / static_cast<double>(resolved)) : 0.0;
  est.f_theory = beffara_F(q.kappa, -q.a / (q.c - q.a));
  est.z_kappa = beffara_normalization(q.kappa);
  return est;
}

/// Elementary lower bound P(n) >= 1/(n+1) for the probability of reaching n
/// before -1 along the real line.
inline double recursion_lower_bound(std::size_t n) {
  if (n < 1) throw std::invalid_argument("recursion_lower_bound: n must be >= 1");
  return 1.0 / static_cast<double>(n + 1);
}

}  // namespace sle
