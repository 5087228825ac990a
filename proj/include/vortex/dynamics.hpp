#pragma once

// Regular N-vortex dynamics away from singular times: right-hand sides for
// the free plane, external velocity fields, and the unit disk (image/Green
// function form); first-integral drift along trajectories; collapse-group
// detection with singular-time extrapolation; and a simulation driver that
// performs admissible merges and restarts.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortex/core.hpp"
#include "vortex/field.hpp"
#include "vortex/ode.hpp"
#include "vortex/trajectory.hpp"

namespace vortex {

/// Velocities with an external field: the field enters the conjugated
/// velocity, so each vortex gains conj(f(t, z_j)).
inline std::vector<cplx> rhs_field(const VortexConfiguration& c, double t,
                                   const FieldSpec& f) {
  std::vector<cplx> v = rhs_free(c);
  for (std::size_t j = 0; j < c.size(); ++j) v[j] += std::conj(f(t, c.positions[j]));
  return v;
}

// ---------------------------------------------------------------------------
// Unit disk.
// ---------------------------------------------------------------------------

/// Regular part of the disk Green function,
///   gamma(x, y) = (1/2pi) log(|y| |x - y/|y|^2|) = (1/2pi) log| |y| x - y/|y| |,
/// symmetric in x and y, with gamma(x, 0) = 0 and
/// gamma(x, x) = (1/2pi) log(1 - |x|^2).
inline double disk_gamma(cplx x, cplx y) {
  const double r = std::abs(y);
  if (r == 0.0) return 0.0;
  return std::log(std::abs(r * x - y / r)) / (2.0 * pi);
}

/// The image field of the configuration in the unit disk, as seen by a probe
/// point p.  Every vortex (including a vortex sitting at p itself)
/// contributes the field of its image of opposite intensity at z_k / |z_k|^2.
/// Written on the conjugated side of the velocity relation, the contribution
/// is xi_k (i/2pi) s_k / (p s_k - z_k) with s_k = |z_k|^2, a form that stays
/// finite as z_k -> 0.
inline cplx disk_image_field(const VortexConfiguration& c, cplx p) {
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double s = std::norm(c.positions[k]);
    if (s == 0.0) continue;
    acc += c.intensities[k] * s / (p * s - c.positions[k]);
  }
  return cplx{0.0, 1.0 / (2.0 * pi)} * acc;
}

/// Velocities of vortices inside the unit disk: the free interaction plus
/// the image field of the whole configuration (self-image included).
inline std::vector<cplx> rhs_disk(const VortexConfiguration& c) {
  std::vector<cplx> v = rhs_free(c);
  for (std::size_t j = 0; j < c.size(); ++j)
    v[j] += std::conj(disk_image_field(c, c.positions[j]));
  return v;
}

/// Conserved energy of the disk system:
///   H = -(1/2pi) sum_{j != k} xi_j xi_k log|z_j - z_k|
///       + sum_{j,k} xi_j xi_k gamma(z_j, z_k),
/// where the second sum runs over all ordered pairs including j = k (the
/// self-image energy drives the single-vortex wall drift).
inline double disk_hamiltonian(const VortexConfiguration& c) {
  double h = hamiltonian(c);
  for (std::size_t j = 0; j < c.size(); ++j)
    for (std::size_t k = 0; k < c.size(); ++k)
      h += c.intensities[j] * c.intensities[k] *
           disk_gamma(c.positions[j], c.positions[k]);
  return h;
}

/// Conserved angular impulse of the disk system, sum_j xi_j |z_j|^2: the
/// domain is rotation invariant, and the image contributions to its time
/// derivative cancel pairwise (the self-image moves each vortex along its
/// own circle).  Note the free-plane pairwise moment of inertia is *not*
/// conserved in the disk, since the center of vorticity is not.
inline double disk_angular_impulse(const VortexConfiguration& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j)
    s += c.intensities[j] * std::norm(c.positions[j]);
  return s;
}

// ---------------------------------------------------------------------------
// Integration front ends.
// ---------------------------------------------------------------------------

enum class Domain { plane, disk };

inline IntegrationResult integrate(const VortexConfiguration& c, double t0,
                                   double t1, const FieldSpec& f = FieldSpec::zero(),
                                   const IntegratorConfig& cfg = {},
                                   Domain domain = Domain::plane) {
  VortexConfiguration work = c;
  if (domain == Domain::disk) {
    auto rhs = [&work](double, const std::vector<cplx>& z) {
      work.positions = z;
      return rhs_disk(work);
    };
    return integrate_ode(c.intensities, c.positions, t0, t1, rhs, cfg);
  }
  auto rhs = [&work, &f](double t, const std::vector<cplx>& z) {
    work.positions = z;
    return rhs_field(work, t, f);
  };
  return integrate_ode(c.intensities, c.positions, t0, t1, rhs, cfg);
}

/// First-integral drift along a stored trajectory (free plane integrals;
/// meaningful as conservation checks only for field-free plane dynamics).
inline InvariantReport trajectory_invariants(const Trajectory& traj,
                                             std::size_t max_samples = 200) {
  std::vector<VortexConfiguration> samples;
  const std::size_t n = traj.nodes();
  const std::size_t stride = std::max<std::size_t>(1, n / max_samples);
  for (std::size_t i = 0; i < n; i += stride)
    samples.push_back(VortexConfiguration{traj.intensities, traj.positions[i]});
  samples.push_back(VortexConfiguration{traj.intensities, traj.positions.back()});
  return invariant_report(samples);
}

// ---------------------------------------------------------------------------
// Collapse detection and merging.
// ---------------------------------------------------------------------------

struct CollapseInfo {
  bool detected = false;      // a shrinking group was identified
  bool admissible = false;    // its intensities satisfy the degeneracy
  std::vector<std::size_t> group;
  double t_c = 0.0;           // extrapolated singular time
  double fit_residual = std::numeric_limits<double>::infinity();
  cplx center{0.0, 0.0};      // intensity-weighted centre of the group
  double intensity = 0.0;     // net intensity of the group
  std::string note;
};

/// Identify the minimal mutually-shrinking group at the final node of a
/// collapse-flagged trajectory and extrapolate its singular time by a linear
/// fit of the squared group diameter over the trailing nodes (the squared
/// diameter of a self-similar collapse is exactly linear in time).
inline CollapseInfo analyze_collapse(const Trajectory& traj,
                                     std::size_t fit_nodes = 20,
                                     double group_factor = 4.0,
                                     double admissible_tol = 1e-9) {
  CollapseInfo info;
  if (traj.nodes() < 3 || traj.size() < 2) {
    info.note = "trajectory too short";
    return info;
  }
  const auto& z = traj.positions.back();
  const std::size_t n = traj.size();

  // Seed with the closest pair.
  double dmin = std::numeric_limits<double>::infinity();
  std::size_t pj = 0, pk = 1;
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) {
      const double d = std::abs(z[j] - z[k]);
      if (d < dmin) dmin = d, pj = j, pk = k;
    }
  std::vector<bool> in(n, false);
  in[pj] = in[pk] = true;
  // Closure: join any vortex within group_factor * dmin of a member.
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (in[j]) continue;
      for (std::size_t k = 0; k < n; ++k)
        if (in[k] && std::abs(z[j] - z[k]) <= group_factor * dmin) {
          in[j] = true;
          grew = true;
          break;
        }
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    if (in[j]) info.group.push_back(j);
  info.detected = true;

  std::vector<double> gxi;
  for (std::size_t j : info.group) {
    gxi.push_back(traj.intensities[j]);
    info.intensity += traj.intensities[j];
    info.center += traj.intensities[j] * z[j];
  }
  if (info.intensity == 0.0) {
    info.note = "zero net intensity";
    return info;
  }
  info.center /= info.intensity;
  double ximax = 0.0;
  for (double g : gxi) ximax = std::max(ximax, g * g);
  info.admissible = collapse_admissible(gxi, admissible_tol * ximax);
  if (!info.admissible) {
    info.note = "interaction degeneracy violated";
    return info;
  }

  // Linear fit of diam^2 over the trailing nodes: diam^2 ~ d0 + c1 (t - tm).
  // The window is tiny compared to |t|, so the fit is centred to avoid
  // cancellation in the normal equations.
  const std::size_t m = std::min(fit_nodes, traj.nodes());
  std::vector<double> ts(m), ds(m);
  double tm = 0.0, dm = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t idx = traj.nodes() - m + i;
    double diam = 0.0;
    for (std::size_t aa = 0; aa < info.group.size(); ++aa)
      for (std::size_t bb = aa + 1; bb < info.group.size(); ++bb)
        diam = std::max(diam, std::abs(traj.positions[idx][info.group[aa]] -
                                       traj.positions[idx][info.group[bb]]));
    ts[i] = traj.times[idx];
    ds[i] = diam * diam;
    tm += ts[i];
    dm += ds[i];
  }
  tm /= m;
  dm /= m;
  double stt = 0.0, std_ = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    stt += (ts[i] - tm) * (ts[i] - tm);
    std_ += (ts[i] - tm) * (ds[i] - dm);
  }
  if (stt == 0.0) {
    info.note = "degenerate fit window";
    return info;
  }
  const double c1 = std_ / stt;
  const bool fwd = traj.t_back() >= traj.t_front();
  if ((fwd && c1 >= 0.0) || (!fwd && c1 <= 0.0)) {
    info.note = "group diameter not shrinking";
    info.admissible = false;
    return info;
  }
  info.t_c = tm - dm / c1;
  double res = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    res = std::max(res, std::abs(dm + c1 * (ts[i] - tm) - ds[i]));
    scale = std::max(scale, std::abs(ds[i]));
  }
  info.fit_residual = res / std::max(scale, 1e-300);
  return info;
}

/// Replace the collapsing group by one vortex of the summed intensity at the
/// intensity-weighted centre.  Returns the reduced configuration and fills
/// `after_index` with the new index of each surviving pre-merge vortex.
inline VortexConfiguration apply_merge(const VortexConfiguration& c,
                                       const CollapseInfo& info,
                                       std::vector<std::size_t>* after_index = nullptr) {
  std::vector<bool> in(c.size(), false);
  for (std::size_t j : info.group) in[j] = true;
  VortexConfiguration out;
  if (after_index) after_index->assign(c.size(), std::size_t(-1));
  bool placed = false;
  for (std::size_t j = 0; j < c.size(); ++j) {
    if (in[j]) {
      if (!placed) {
        out.intensities.push_back(info.intensity);
        out.positions.push_back(info.center);
        placed = true;
      }
      continue;
    }
    if (after_index) (*after_index)[j] = out.size();
    out.intensities.push_back(c.intensities[j]);
    out.positions.push_back(c.positions[j]);
  }
  return out;
}

struct MergeSimulationConfig {
  IntegratorConfig integrator;
  std::size_t fit_nodes = 20;
  double group_factor = 4.0;
  double admissible_tol = 1e-9;
  std::size_t max_merges = 16;
};

struct MergeSimulation {
  EventTrajectory trajectory;
  StopReason last_stop = StopReason::reached_end;
  bool completed = false;   // reached t1 (possibly through merges)
  std::string note;
};

/// Integrate from t0 to t1 (free plane or disk), detecting admissible total
/// collapses, merging the shrinking group at the extrapolated singular time
/// and restarting, until the horizon is reached.  Inadmissible near-misses
/// stop the simulation with the offending segment retained.
inline MergeSimulation simulate_merging(const VortexConfiguration& c, double t0,
                                        double t1,
                                        const FieldSpec& f = FieldSpec::zero(),
                                        const MergeSimulationConfig& cfg = {},
                                        Domain domain = Domain::plane) {
  MergeSimulation sim;
  VortexConfiguration cur = c;
  double t = t0;
  for (std::size_t pass = 0; pass <= cfg.max_merges; ++pass) {
    IntegrationResult res = integrate(cur, t, t1, f, cfg.integrator, domain);
    sim.last_stop = res.reason;
    if (res.reason == StopReason::reached_end) {
      sim.trajectory.segments.push_back(std::move(res.trajectory));
      sim.completed = true;
      return sim;
    }
    if (res.reason != StopReason::collapse) {
      sim.trajectory.segments.push_back(std::move(res.trajectory));
      sim.note = std::string("integration stopped: ") + to_string(res.reason);
      return sim;
    }
    CollapseInfo info = analyze_collapse(res.trajectory, cfg.fit_nodes,
                                         cfg.group_factor, cfg.admissible_tol);
    if (!info.detected || !info.admissible) {
      sim.trajectory.segments.push_back(std::move(res.trajectory));
      sim.note = "collapse not mergeable: " + info.note;
      return sim;
    }
    const bool fwd = t1 >= t0;
    if ((fwd && (info.t_c <= t || info.t_c > t1)) ||
        (!fwd && (info.t_c >= t || info.t_c < t1))) {
      sim.trajectory.segments.push_back(std::move(res.trajectory));
      sim.note = "extrapolated singular time outside window";
      return sim;
    }

    const VortexConfiguration at_stop = res.trajectory.config_at(res.trajectory.t_back());
    Event ev;
    ev.kind = Event::Kind::merge;
    ev.t = info.t_c;
    ev.position = info.center;
    ev.before = info.group;
    ev.intensity = info.intensity;
    ev.fit_residual = info.fit_residual;

    std::vector<std::size_t> after_index;
    VortexConfiguration merged = apply_merge(at_stop, info, &after_index);
    // apply_merge places the merged vortex at the slot of the first group
    // member, i.e. after as many vortices as precede it outside the group.
    // Everything before the first group member is outside the group, so the
    // merged vortex lands exactly at that member's original index.
    ev.after = {info.group.front()};

    sim.trajectory.segments.push_back(std::move(res.trajectory));
    sim.trajectory.events.push_back(std::move(ev));
    cur = std::move(merged);
    t = info.t_c;
  }
  sim.note = "merge limit exceeded";
  return sim;
}

}  // namespace vortex
