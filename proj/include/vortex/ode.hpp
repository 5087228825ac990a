#pragma once

// Adaptive embedded Runge-Kutta 5(4) integration (Dormand-Prince pair, FSAL)
// for complex-valued vortex states, with a pairwise-distance step cap and a
// near-collapse stopping guard.  Integrates forward or backward in time.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vortex/core.hpp"
#include "vortex/trajectory.hpp"

namespace vortex {

struct IntegratorConfig {
  double tol = 1e-10;            // absolute and relative accuracy per step
  double step_cap_factor = 1.0;  // |h| <= factor * d_min^2 (0 disables)
  double collapse_eps = 1e-5;    // stop when min pair distance falls below
  std::size_t max_steps = 4000000;

  void validate() const {
    if (!(tol > 0.0) || !(collapse_eps >= 0.0) || !(step_cap_factor >= 0.0))
      throw std::invalid_argument("IntegratorConfig: bad parameters");
  }
};

enum class StopReason { reached_end, collapse, step_underflow, max_steps };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::reached_end: return "reached_end";
    case StopReason::collapse: return "collapse";
    case StopReason::step_underflow: return "step_underflow";
    default: return "max_steps";
  }
}

struct IntegrationResult {
  Trajectory trajectory;
  StopReason reason = StopReason::reached_end;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

namespace detail {

inline double min_pair_distance(const std::vector<cplx>& z) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < z.size(); ++j)
    for (std::size_t k = j + 1; k < z.size(); ++k)
      d = std::min(d, std::abs(z[j] - z[k]));
  return d;
}

}  // namespace detail

/// Integrate dz/dt = rhs(t, z) from t0 to t1 (either direction).  The rhs is
/// evaluated at most 6 times per step (first-same-as-last reuse).  Every
/// accepted node is stored together with its exact velocity.
template <class Rhs>
IntegrationResult integrate_ode(const std::vector<double>& intensities,
                                std::vector<cplx> z0, double t0, double t1,
                                const Rhs& rhs, const IntegratorConfig& cfg = {}) {
  cfg.validate();
  // Dormand-Prince coefficients.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                   e4 = b4 - 393.0 / 640, e5 = b5 + 92097.0 / 339200,
                   e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

  const std::size_t n = z0.size();
  const double dir = t1 >= t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);

  IntegrationResult out;
  Trajectory& traj = out.trajectory;
  traj.intensities = intensities;
  traj.tolerance = cfg.tol;

  if (n == 0) {
    // Zero-dimensional state: nothing evolves, but callers still expect a
    // trajectory covering [t0, t1].
    traj.push_node(t0, {}, {});
    traj.push_node(t1, {}, {});
    out.reason = StopReason::reached_end;
    out.accepted_steps = 1;
    return out;
  }

  std::vector<cplx> k1 = rhs(t0, z0), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  std::vector<cplx> y(n), ynew(n);
  traj.push_node(t0, z0, k1);

  auto cap = [&](const std::vector<cplx>& z) {
    if (cfg.step_cap_factor <= 0.0 || n < 2) return span;
    const double d = detail::min_pair_distance(z);
    return cfg.step_cap_factor * d * d;
  };

  // Initial step from the rhs magnitude at the start.
  double h;
  {
    double fy = 0.0, yy = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      fy = std::max(fy, std::abs(k1[j]));
      yy = std::max(yy, std::abs(z0[j]));
    }
    h = fy > 0.0 ? 0.01 * std::max(yy, 1.0) / fy : 0.01 * span;
    h = std::min({h, span, cap(z0)});
    if (!(h > 0.0)) h = std::numeric_limits<double>::min();
  }

  double t = t0;
  double err_prev = 1.0;
  std::vector<cplx> zc = std::move(z0);

  while (out.accepted_steps + out.rejected_steps < cfg.max_steps) {
    if (cfg.collapse_eps > 0.0 && n >= 2 &&
        detail::min_pair_distance(zc) < cfg.collapse_eps) {
      out.reason = StopReason::collapse;
      return out;
    }
    const double remaining = std::abs(t1 - t);
    if (remaining <= 1e-14 * (std::abs(t1) + std::abs(t0) + span)) {
      out.reason = StopReason::reached_end;
      return out;
    }
    h = std::min({h, remaining, cap(zc)});
    if (!(h > std::abs(t) * 1e-16) || !(t + dir * h != t)) {
      out.reason = StopReason::step_underflow;
      return out;
    }
    const double hd = dir * h;

    for (std::size_t j = 0; j < n; ++j) y[j] = zc[j] + hd * a21 * k1[j];
    k2 = rhs(t + c2 * hd, y);
    for (std::size_t j = 0; j < n; ++j)
      y[j] = zc[j] + hd * (a31 * k1[j] + a32 * k2[j]);
    k3 = rhs(t + c3 * hd, y);
    for (std::size_t j = 0; j < n; ++j)
      y[j] = zc[j] + hd * (a41 * k1[j] + a42 * k2[j] + a43 * k3[j]);
    k4 = rhs(t + c4 * hd, y);
    for (std::size_t j = 0; j < n; ++j)
      y[j] = zc[j] + hd * (a51 * k1[j] + a52 * k2[j] + a53 * k3[j] + a54 * k4[j]);
    k5 = rhs(t + c5 * hd, y);
    for (std::size_t j = 0; j < n; ++j)
      y[j] = zc[j] + hd * (a61 * k1[j] + a62 * k2[j] + a63 * k3[j] + a64 * k4[j] +
                           a65 * k5[j]);
    k6 = rhs(t + hd, y);
    for (std::size_t j = 0; j < n; ++j)
      ynew[j] = zc[j] + hd * (b1 * k1[j] + b3 * k3[j] + b4 * k4[j] + b5 * k5[j] +
                              b6 * k6[j]);
    k7 = rhs(t + hd, ynew);

    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const cplx e = hd * (e1 * k1[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] +
                           e6 * k6[j] + e7 * k7[j]);
      const double sc =
          cfg.tol + cfg.tol * std::max(std::abs(zc[j]), std::abs(ynew[j]));
      err = std::max(err, std::abs(e) / sc);
    }

    if (err <= 1.0) {
      t += hd;
      zc = ynew;
      k1 = k7;  // first-same-as-last
      traj.push_node(t, zc, k1);
      ++out.accepted_steps;
      const double safe = std::max(1e-16, err);
      double fac = 0.9 * std::pow(safe, -0.14) * std::pow(err_prev, 0.08);
      fac = std::min(5.0, std::max(0.2, fac));
      err_prev = safe;
      h *= fac;
    } else {
      ++out.rejected_steps;
      h *= std::min(0.9, std::max(0.2, 0.9 * std::pow(err, -0.2)));
    }
  }
  out.reason = StopReason::max_steps;
  return out;
}

}  // namespace vortex
