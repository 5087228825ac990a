#pragma once

// Trajectory containers: dense node storage for integrated vortex systems,
// cubic Hermite interpolation between nodes, event bookkeeping for bursts and
// merges, and exact time reversal.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortex/core.hpp"

namespace vortex {

/// Dense output of one integration segment.  Nodes are strictly monotone in
/// time (ascending or descending); velocities are the exact right-hand side
/// at the nodes, enabling cubic Hermite interpolation between them.
struct Trajectory {
  std::vector<double> intensities;
  std::vector<double> times;
  std::vector<std::vector<cplx>> positions;   // one entry per node
  std::vector<std::vector<cplx>> velocities;  // matching dz/dt per node
  double tolerance = 0.0;                     // integrator accuracy used

  std::size_t nodes() const { return times.size(); }
  std::size_t size() const { return intensities.size(); }
  bool empty() const { return times.empty(); }
  double t_front() const { return times.front(); }
  double t_back() const { return times.back(); }
  bool ascending() const { return times.size() < 2 || times[1] > times[0]; }

  void push_node(double t, std::vector<cplx> z, std::vector<cplx> v) {
    times.push_back(t);
    positions.push_back(std::move(z));
    velocities.push_back(std::move(v));
  }

  /// Positions at time t by per-panel cubic Hermite interpolation.
  std::vector<cplx> positions_at(double t) const;

  VortexConfiguration config_at(double t) const {
    return VortexConfiguration{intensities, positions_at(t)};
  }

  /// Reverse the time axis about the segment midpoint: the returned
  /// trajectory runs over the same [t_min, t_max] window, carries negated
  /// intensities, and is again a solution of the same vortex system.
  Trajectory time_reversed() const;
};

inline std::vector<cplx> Trajectory::positions_at(double t) const {
  if (empty()) throw std::invalid_argument("positions_at: empty trajectory");
  const bool asc = ascending();
  const double lo = asc ? times.front() : times.back();
  const double hi = asc ? times.back() : times.front();
  const double pad = 1e-12 * (1.0 + std::abs(lo) + std::abs(hi));
  if (t < lo - pad || t > hi + pad)
    throw std::invalid_argument("positions_at: time outside segment");
  if (times.size() == 1) return positions[0];
  // Locate the panel [i, i+1] containing t.
  std::size_t i;
  if (asc) {
    i = std::upper_bound(times.begin(), times.end(), t) - times.begin();
  } else {
    i = std::upper_bound(times.begin(), times.end(), t,
                         [](double a, double b) { return a > b; }) -
        times.begin();
  }
  if (i > 0) --i;
  if (i + 1 >= times.size()) i = times.size() - 2;

  const double t0 = times[i], t1 = times[i + 1];
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  // Hermite basis.
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  std::vector<cplx> out(size());
  for (std::size_t j = 0; j < size(); ++j)
    out[j] = h00 * positions[i][j] + h * h10 * velocities[i][j] +
             h01 * positions[i + 1][j] + h * h11 * velocities[i + 1][j];
  return out;
}

inline Trajectory Trajectory::time_reversed() const {
  Trajectory r;
  r.tolerance = tolerance;
  r.intensities.reserve(size());
  for (double xi : intensities) r.intensities.push_back(-xi);
  const double c = empty() ? 0.0 : times.front() + times.back();
  r.times.resize(nodes());
  r.positions.resize(nodes());
  r.velocities.resize(nodes());
  for (std::size_t i = 0; i < nodes(); ++i) {
    const std::size_t k = nodes() - 1 - i;
    r.times[i] = c - times[k];
    r.positions[i] = positions[k];
    r.velocities[i].resize(size());
    for (std::size_t j = 0; j < size(); ++j) r.velocities[i][j] = -velocities[k][j];
  }
  return r;
}

/// A singular event separating two trajectory segments.
struct Event {
  enum class Kind { burst, merge };
  Kind kind = Kind::merge;
  double t = 0.0;                       // singular time
  cplx position{0.0, 0.0};              // location of the event
  std::vector<std::size_t> before;      // indices in the earlier segment
  std::vector<std::size_t> after;       // indices in the later segment
  double intensity = 0.0;               // net intensity through the event
  double fit_residual = 0.0;            // quality of the singular-time fit
};

inline const char* to_string(Event::Kind k) {
  return k == Event::Kind::burst ? "burst" : "merge";
}

/// A piecewise trajectory with singular events between segments.  Segments
/// are stored in ascending time order; segment k spans
/// [events[k-1].t, events[k].t] (with the outer ends open).
struct EventTrajectory {
  std::vector<Trajectory> segments;
  std::vector<Event> events;

  bool empty() const { return segments.empty(); }
  double t_front() const { return segments.front().t_front(); }
  double t_back() const { return segments.back().t_back(); }

  /// Index of the segment whose time window contains t.
  std::size_t segment_index(double t) const {
    if (empty()) throw std::invalid_argument("segment_index: empty trajectory");
    std::size_t k = 0;
    while (k < events.size() && t > events[k].t) ++k;
    // At an event time, prefer the segment that actually covers t.
    while (k + 1 < segments.size() && t > segments[k].t_back() + 1e-300) ++k;
    return k;
  }

  VortexConfiguration config_at(double t) const {
    const auto& seg = segments[segment_index(t)];
    const double lo = std::min(seg.t_front(), seg.t_back());
    const double hi = std::max(seg.t_front(), seg.t_back());
    return seg.config_at(std::clamp(t, lo, hi));
  }

  /// Time reversal: segments reverse order and orientation, bursts become
  /// merges and vice versa.
  EventTrajectory time_reversed() const {
    EventTrajectory r;
    const double c = t_front() + t_back();
    r.segments.reserve(segments.size());
    for (auto it = segments.rbegin(); it != segments.rend(); ++it) {
      Trajectory s = it->time_reversed();
      // Re-center on the global window rather than the segment's own.
      const double own = it->times.front() + it->times.back();
      for (double& t : s.times) t += c - own;
      r.segments.push_back(std::move(s));
    }
    r.events.reserve(events.size());
    for (auto it = events.rbegin(); it != events.rend(); ++it) {
      Event e = *it;
      e.kind = e.kind == Event::Kind::burst ? Event::Kind::merge : Event::Kind::burst;
      e.t = c - it->t;
      e.intensity = -it->intensity;
      std::swap(e.before, e.after);
      r.events.push_back(std::move(e));
    }
    return r;
  }
};

}  // namespace vortex
