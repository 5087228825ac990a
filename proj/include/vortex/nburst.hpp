#pragma once

// Singular bursts embedded in regular surroundings: a three-vortex burst
// inside an N-vortex background (the background enters the burst as a
// smoothly cut-off external field, the burst children drive the background
// as moving point vortices), and a burst inside the unit disk (the children's
// own image field plays the background role).  The two sub-problems are
// solved alternately until the composite is a fixed point; the composite is
// then an exact solution of the full system wherever the cut-off is 1.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortex/burst_solver.hpp"
#include "vortex/selfsimilar.hpp"
#include "vortex/core.hpp"
#include "vortex/dynamics.hpp"
#include "vortex/field.hpp"
#include "vortex/ode.hpp"
#include "vortex/trajectory.hpp"

namespace vortex {

/// Smooth cut-off: 1 for r <= 1, 0 for r >= 2, C^infinity in between.
inline double bump_chi(double r) {
  auto B = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  const double num = B(2.0 - r);
  const double den = num + B(r - 1.0);
  return den == 0.0 ? 0.0 : num / den;
}

/// The three child intensities of a split as a vector.
inline std::vector<double> split_vector(const SelfSimilarParams& p) {
  return std::vector<double>(p.intensities.begin(), p.intensities.end());
}

/// Burst-horizon bound for a burst of parent intensity split s inside a
/// background with intensities zeta: T* = 2 pi rho^2 / ((N + 2) M) with
/// M = max(max_j |s_j|, max_l |zeta_l|).
inline double tstar_bound(double rho, const std::vector<double>& split,
                          const std::vector<double>& zetas) {
  double M = 0.0;
  for (double s : split) M = std::max(M, std::abs(s));
  for (double z : zetas) M = std::max(M, std::abs(z));
  if (M == 0.0 || rho <= 0.0)
    throw std::invalid_argument("tstar_bound: need positive radius and intensity");
  return 2.0 * pi * rho * rho / ((double(zetas.size()) + 2.0) * M);
}

/// Regular background surrounding a burst.
struct BackgroundSpec {
  std::vector<double> zetas;  // background intensities
  std::vector<cplx> y0;       // background positions at the burst time
  double rho = 0.1;           // cut-off radius around the burst point

  void validate() const {
    if (zetas.size() != y0.size())
      throw std::invalid_argument("BackgroundSpec: size mismatch");
    if (!(rho > 0.0)) throw std::invalid_argument("BackgroundSpec: rho <= 0");
  }
};

/// The cut-off field of a moving background, in the frame of a burst at
/// z_v: f(t, w) = chi(|w|/rho) (1/2pi i) sum_l zeta_l / (w + z_v - y_l(t)).
inline FieldSpec background_field(std::shared_ptr<const Trajectory> bg, cplx z_v,
                                  double rho) {
  const double t_lo = std::min(bg->t_front(), bg->t_back());
  const double t_hi = std::max(bg->t_front(), bg->t_back());
  // Diagnostic bound: nearest background approach to the cut-off support.
  double gap = std::numeric_limits<double>::infinity();
  double zsum = 0.0;
  for (std::size_t i = 0; i < bg->nodes(); ++i)
    for (std::size_t l = 0; l < bg->size(); ++l)
      gap = std::min(gap, std::abs(bg->positions[i][l] - z_v));
  for (double z : bg->intensities) zsum += std::abs(z);
  gap = std::max(gap - 2.0 * rho, 1e-12);

  auto zetas = bg->intensities;
  auto fn = [bg, z_v, rho, zetas, t_lo, t_hi](double t, cplx w) -> cplx {
    const double chi = bump_chi(std::abs(w) / rho);
    if (chi == 0.0) return cplx{0.0, 0.0};
    const auto y = bg->positions_at(std::clamp(t, t_lo, t_hi));
    cplx s{0.0, 0.0};
    for (std::size_t l = 0; l < y.size(); ++l) s += zetas[l] / (w + z_v - y[l]);
    return cplx{0.0, -1.0 / (2.0 * pi)} * s * chi;
  };
  return FieldSpec::custom(std::move(fn), zsum / (2.0 * pi * gap),
                           zsum / (2.0 * pi * gap * gap), 2.0 * rho);
}

struct NBurstConfig {
  GammaConfig gamma;            // inner burst solves
  IntegratorConfig integrator;  // background integration
  int max_outer = 40;
  double outer_tol_factor = 10.0;  // outer tol = factor * gamma.picard_tol
  bool cap_horizon_by_tstar = true;

  NBurstConfig() {
    integrator.tol = 1e-11;
    integrator.collapse_eps = 0.0;  // background vortices may pass closely
  }
};

struct NBurstSolution {
  BurstSolution burst;      // burst-frame construction (origin at z_v)
  cplx origin{0.0, 0.0};    // z_v
  Trajectory background;    // absolute coordinates, ascending over [0, T]
  std::vector<double> zetas;
  double rho = 0.0;
  double tstar = 0.0;
  double T = 0.0;
  int outer_iterations = 0;
  double outer_residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  double children_max_radius = 0.0;  // max |z_j(t) - z_v|; must stay <= rho
  std::string note;

  std::array<cplx, 3> children(double t) const {
    auto z = burst.positions(t);
    for (auto& w : z) w += origin;
    return z;
  }

  /// Children plus background as one configuration (children first).
  VortexConfiguration combined_at(double t) const {
    VortexConfiguration c;
    c.intensities = split_vector(burst.params);
    const auto z = children(t);
    c.positions.assign(z.begin(), z.end());
    const auto y = background.positions_at(t);
    for (std::size_t l = 0; l < y.size(); ++l) {
      c.intensities.push_back(zetas[l]);
      c.positions.push_back(y[l]);
    }
    return c;
  }
};

namespace detail {

/// Integrate the background under its own interaction plus the influence of
/// three moving children (given as a callable t -> array<cplx,3> absolute).
template <class Children>
Trajectory integrate_background(const std::vector<double>& zetas,
                                const std::vector<cplx>& y0,
                                const std::vector<double>& child_xi,
                                const Children& children, double T,
                                const IntegratorConfig& icfg) {
  auto rhs = [&](double t, const std::vector<cplx>& y) {
    const auto z = children(std::max(t, 0.0));
    std::vector<cplx> v(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) {
      cplx s{0.0, 0.0};
      for (std::size_t l = 0; l < y.size(); ++l)
        if (l != k) s += zetas[l] / (y[k] - y[l]);
      for (int j = 0; j < 3; ++j) s += child_xi[j] / (y[k] - z[j]);
      v[k] = std::conj(cplx{0.0, -1.0 / (2.0 * pi)} * s);
    }
    return v;
  };
  IntegrationResult res = integrate_ode(zetas, y0, 0.0, T, rhs, icfg);
  if (res.reason != StopReason::reached_end)
    throw std::runtime_error(std::string("background integration stopped: ") +
                             to_string(res.reason));
  return std::move(res.trajectory);
}

}  // namespace detail

/// Construct a burst of parent intensity xi at z_v inside the given
/// background, by alternating exact sub-solves until the pair is consistent.
inline NBurstSolution solve_nburst(double xi, cplx z_v, const BackgroundSpec& bg,
                                   NBurstConfig cfg = {}) {
  bg.validate();
  cfg.gamma.validate();
  const SelfSimilarParams params = params_for(xi);

  NBurstSolution out;
  out.origin = z_v;
  out.zetas = bg.zetas;
  out.rho = bg.rho;
  out.tstar = tstar_bound(bg.rho, split_vector(params), bg.zetas);
  for (const cplx& y : bg.y0)
    if (std::abs(y - z_v) <= 2.0 * bg.rho)
      throw std::invalid_argument("solve_nburst: background inside cut-off ring");

  GammaConfig gcfg = cfg.gamma;
  if (cfg.cap_horizon_by_tstar) gcfg.T = std::min(gcfg.T, out.tstar);
  const double outer_tol = cfg.outer_tol_factor * gcfg.picard_tol;

  // Children model for the first background pass: the unsplit parent.
  bool have_children = false;
  BurstSolution cur;
  double T = gcfg.T;

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    out.outer_iterations = outer + 1;
    auto children = [&](double t) -> std::array<cplx, 3> {
      if (!have_children || t <= 0.0) return {z_v, z_v, z_v};
      auto z = cur.positions(std::min(t, T));
      for (auto& w : z) w += z_v;
      return z;
    };
    auto bgptr = std::make_shared<const Trajectory>(detail::integrate_background(
        bg.zetas, bg.y0, split_vector(params), children, T, cfg.integrator));
    const FieldSpec field = background_field(bgptr, z_v, bg.rho);
    GammaConfig pass = gcfg;
    pass.T = T;
    BurstSolution next = solve_burst(xi, field, pass);
    if (!next.converged) {
      out.note = "inner burst solve failed";
      out.burst = std::move(next);
      out.background = *bgptr;
      return out;
    }

    double delta = std::numeric_limits<double>::infinity();
    const bool same_T = next.T == T;
    if (have_children && same_T) {
      delta = 0.0;
      for (double t : next.curve.t) {
        const auto a = next.positions(t);
        const auto b = cur.positions(t);
        for (int j = 0; j < 3; ++j) delta = std::max(delta, std::abs(a[j] - b[j]));
      }
    }
    T = next.T;
    cur = std::move(next);
    have_children = true;
    out.outer_residual = delta;
    if (delta <= outer_tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    if (out.note.empty()) out.note = "outer alternation did not converge";
    return out;
  }
  // Final self-consistent background under the converged children.
  {
    auto children = [&](double t) -> std::array<cplx, 3> {
      if (t <= 0.0) return {z_v, z_v, z_v};
      auto z = cur.positions(std::min(t, T));
      for (auto& w : z) w += z_v;
      return z;
    };
    out.background = detail::integrate_background(bg.zetas, bg.y0, split_vector(params),
                                                  children, T, cfg.integrator);
  }
  out.burst = std::move(cur);
  out.T = T;

  // The composite solves the full system only while the children remain in
  // the chi = 1 core.
  for (double t : out.burst.curve.t) {
    const auto z = out.burst.positions(t);
    for (const auto& w : z)
      out.children_max_radius = std::max(out.children_max_radius, std::abs(w));
  }
  if (out.children_max_radius > bg.rho) {
    out.converged = false;
    out.note = "children left the cut-off core";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Burst inside the unit disk.
// ---------------------------------------------------------------------------

struct DiskBurstSolution {
  BurstSolution burst;    // burst-frame construction (origin at z0)
  cplx origin{0.0, 0.0};  // z0, |z0| < 1
  double T = 0.0;
  int outer_iterations = 0;
  double outer_residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  double center_rate = 0.0;  // max |sum xi_j z_j(t) - xi z0| / t (diagnostic)
  std::string note;

  std::array<cplx, 3> children(double t) const {
    auto z = burst.positions(t);
    for (auto& w : z) w += origin;
    return z;
  }

  VortexConfiguration config_at(double t) const {
    const auto z = children(t);
    return VortexConfiguration{split_vector(burst.params), {z[0], z[1], z[2]}};
  }
};

/// Construct a burst at z0 inside the unit disk: the external field is the
/// image field of the three children themselves, so the construction is a
/// fixed point in the children curve alone.
inline DiskBurstSolution solve_disk_burst(double xi, cplx z0, NBurstConfig cfg = {}) {
  if (!(std::abs(z0) < 1.0))
    throw std::invalid_argument("solve_disk_burst: z0 outside the unit disk");
  const SelfSimilarParams params = params_for(xi);
  DiskBurstSolution out;
  out.origin = z0;

  GammaConfig gcfg = cfg.gamma;
  // Keep the burst well inside the wall; reuse the horizon bound with the
  // gap to the boundary as the cut-off radius and the parent as background.
  const double gap = 0.25 * (1.0 - std::abs(z0));
  gcfg.T = std::min(gcfg.T, tstar_bound(gap, split_vector(params), {xi}));
  const double outer_tol = cfg.outer_tol_factor * gcfg.picard_tol;

  bool have_children = false;
  BurstSolution cur;
  double T = gcfg.T;

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    out.outer_iterations = outer + 1;
    // Image field of the current children model, evaluated in burst frame.
    const std::vector<double> xis = split_vector(params);
    auto field_fn = [&, xis](double t, cplx w) -> cplx {
      VortexConfiguration c;
      c.intensities = xis;
      if (!have_children || t <= 0.0) {
        c.positions = {z0, z0, z0};
      } else {
        const auto z = cur.positions(std::min(t, T));
        c.positions = {z[0] + z0, z[1] + z0, z[2] + z0};
      }
      return disk_image_field(c, w + z0);
    };
    const double img_gap = 1.0 / std::abs(z0) - std::abs(z0);  // to own image
    const FieldSpec field = FieldSpec::custom(
        field_fn, std::abs(xi) / (2.0 * pi * std::max(img_gap, 1e-12)),
        std::abs(xi) / (2.0 * pi * std::max(img_gap * img_gap, 1e-12)), 2.0 * gap);

    GammaConfig pass = gcfg;
    pass.T = T;
    BurstSolution next = solve_burst(xi, field, pass);
    if (!next.converged) {
      out.note = "inner burst solve failed";
      out.burst = std::move(next);
      return out;
    }
    double delta = std::numeric_limits<double>::infinity();
    const bool same_T = next.T == T;
    if (have_children && same_T) {
      delta = 0.0;
      for (double t : next.curve.t) {
        const auto a = next.positions(t);
        const auto b = cur.positions(t);
        for (int j = 0; j < 3; ++j) delta = std::max(delta, std::abs(a[j] - b[j]));
      }
    }
    T = next.T;
    cur = std::move(next);
    have_children = true;
    out.outer_residual = delta;
    if (delta <= outer_tol) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged) {
    if (out.note.empty()) out.note = "outer alternation did not converge";
    return out;
  }
  out.burst = std::move(cur);
  out.T = T;

  // Weighted-centre drift: the image field moves sum xi_j z_j at a bounded
  // rate; |sum xi_j z_j(t) - xi z0| / t should stay of the order of the
  // parent drift speed.
  for (double t : out.burst.curve.t) {
    const auto z = out.children(t);
    cplx c{0.0, 0.0};
    for (int j = 0; j < 3; ++j) c += out.burst.params.intensities[j] * z[j];
    out.center_rate = std::max(out.center_rate, std::abs(c - xi * z0) / t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event-trajectory assembly around the singular time.
// ---------------------------------------------------------------------------

namespace detail {

/// Emission schedule for sampling a burst solution into Cartesian nodes:
/// the solver grid plus geometric subdivision of any panel with
/// t_{i+1}/t_i > 1.2, so that cubic Hermite interpolation of the sqrt(t)
/// scaling stays accurate all the way down to the first node.
inline std::vector<double> burst_emit_times(const std::vector<double>& grid) {
  std::vector<double> out;
  out.reserve(grid.size() + 64);
  if (grid.empty()) return out;
  out.push_back(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double prev = grid[i - 1], next = grid[i];
    const double ratio = next / prev;
    if (ratio > 1.2 && prev > 0.0) {
      const int extra = int(std::ceil(std::log(ratio) / std::log(1.2))) - 1;
      for (int m = 1; m <= extra; ++m)
        out.push_back(prev * std::pow(ratio, double(m) / (extra + 1.0)));
    }
    out.push_back(next);
  }
  return out;
}

inline Trajectory ascending_nodes(Trajectory tr) {
  if (tr.ascending()) return tr;
  std::reverse(tr.times.begin(), tr.times.end());
  std::reverse(tr.positions.begin(), tr.positions.end());
  std::reverse(tr.velocities.begin(), tr.velocities.end());
  return tr;
}

}  // namespace detail

/// Assemble the full picture of a burst embedded in a background: a pre-burst
/// segment on [-t_pre, 0] (unsplit parent plus background, integrated
/// backward from the event), a burst event at t = 0, and the composite
/// children-plus-background segment on (0, T] extended by regular integration
/// to T + t_post.  Vortex order after the event: children 0..2, background
/// following; before the event: parent 0, background following.
inline EventTrajectory assemble_embedded(const NBurstSolution& ns, double xi,
                                         double t_pre, double t_post,
                                         IntegratorConfig icfg = {}) {
  if (!ns.converged) throw std::invalid_argument("assemble_embedded: not converged");
  icfg.collapse_eps = 0.0;
  EventTrajectory out;

  // Pre segment: parent + background, integrated backward from 0.
  {
    VortexConfiguration c;
    c.intensities = {xi};
    c.positions = {ns.origin};
    for (std::size_t l = 0; l < ns.zetas.size(); ++l) {
      c.intensities.push_back(ns.zetas[l]);
      c.positions.push_back(ns.background.positions[0][l]);
    }
    IntegrationResult res = integrate(c, 0.0, -t_pre, FieldSpec::zero(), icfg);
    if (res.reason != StopReason::reached_end)
      throw std::runtime_error("assemble_embedded: pre-segment integration failed");
    out.segments.push_back(detail::ascending_nodes(std::move(res.trajectory)));
  }

  // Burst event at t = 0.
  {
    Event ev;
    ev.kind = Event::Kind::burst;
    ev.t = 0.0;
    ev.position = ns.origin;
    ev.before = {0};
    ev.after = {0, 1, 2};
    ev.intensity = xi;
    out.events.push_back(ev);
  }

  // Composite segment on the solver grid, extended to T + t_post.
  {
    Trajectory seg;
    seg.tolerance = ns.burst.gamma_residual;
    VortexConfiguration probe = ns.combined_at(ns.T);
    seg.intensities = probe.intensities;
    for (double t : detail::burst_emit_times(ns.burst.curve.t)) {
      VortexConfiguration c = ns.combined_at(t);
      seg.push_node(t, c.positions, rhs_free(c));
    }
    if (t_post > 0.0) {
      VortexConfiguration c = ns.combined_at(ns.T);
      IntegrationResult res = integrate(c, ns.T, ns.T + t_post, FieldSpec::zero(), icfg);
      if (res.reason != StopReason::reached_end)
        throw std::runtime_error("assemble_embedded: post-segment integration failed");
      for (std::size_t i = 1; i < res.trajectory.nodes(); ++i)
        seg.push_node(res.trajectory.times[i], res.trajectory.positions[i],
                      res.trajectory.velocities[i]);
    }
    out.segments.push_back(std::move(seg));
  }
  return out;
}

/// Disk counterpart of assemble_embedded: the parent drifts inside the disk
/// before the event, the three children (with their images) after it.
inline EventTrajectory assemble_disk(const DiskBurstSolution& ds, double xi,
                                     double t_pre, double t_post,
                                     IntegratorConfig icfg = {}) {
  if (!ds.converged) throw std::invalid_argument("assemble_disk: not converged");
  icfg.collapse_eps = 0.0;
  EventTrajectory out;
  {
    VortexConfiguration c{{xi}, {ds.origin}};
    IntegrationResult res =
        integrate(c, 0.0, -t_pre, FieldSpec::zero(), icfg, Domain::disk);
    if (res.reason != StopReason::reached_end)
      throw std::runtime_error("assemble_disk: pre-segment integration failed");
    out.segments.push_back(detail::ascending_nodes(std::move(res.trajectory)));
  }
  {
    Event ev;
    ev.kind = Event::Kind::burst;
    ev.t = 0.0;
    ev.position = ds.origin;
    ev.before = {0};
    ev.after = {0, 1, 2};
    ev.intensity = xi;
    out.events.push_back(ev);
  }
  {
    Trajectory seg;
    seg.tolerance = ds.burst.gamma_residual;
    seg.intensities = split_vector(ds.burst.params);
    for (double t : detail::burst_emit_times(ds.burst.curve.t)) {
      VortexConfiguration c = ds.config_at(t);
      seg.push_node(t, c.positions, rhs_disk(c));
    }
    if (t_post > 0.0) {
      VortexConfiguration c = ds.config_at(ds.T);
      IntegrationResult res =
          integrate(c, ds.T, ds.T + t_post, FieldSpec::zero(), icfg, Domain::disk);
      if (res.reason != StopReason::reached_end)
        throw std::runtime_error("assemble_disk: post-segment integration failed");
      for (std::size_t i = 1; i < res.trajectory.nodes(); ++i)
        seg.push_node(res.trajectory.times[i], res.trajectory.positions[i],
                      res.trajectory.velocities[i]);
    }
    out.segments.push_back(std::move(seg));
  }
  return out;
}

}  // namespace vortex
