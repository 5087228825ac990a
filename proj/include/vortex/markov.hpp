#pragma once

// Sampler for the intrinsically stochastic weak solutions built from
// Poisson-timed bursts: arrivals follow a Poisson process of rate lambda on
// [0, horizon]; at each arrival a uniformly chosen vortex splits into the
// standard self-similar triple (constructed by solve_nburst with the
// remaining vortices as the background), and between arrivals the
// configuration follows the regular dynamics with merge-on-collapse
// continuation.  Every sample is a deterministic function of
// (scenario, seed, sample index).
//
// RNG stream layout (part of the determinism contract):
//   state  = scenario.seed + sample_index * 0x9E3779B97F4A7C15
//   arrivals stream seed = splitmix64(state)   [first output]
//   indices  stream seed = splitmix64(state)   [second output]
// Both streams are std::mt19937_64.  Uniform doubles are (x >> 11) * 2^-53,
// exponentials are -log1p(-u)/lambda, and uniform indices use the
// multiply-shift reduction (x * n) >> 64.  Adding samples never perturbs
// earlier ones because each sample owns its two streams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vortex/dynamics.hpp"
#include "vortex/nburst.hpp"
#include "vortex/trajectory.hpp"
#include "vortex/weakform.hpp"

namespace vortex {

namespace rng {

/// splitmix64 step: advances the state and returns one mixed output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// One of the two per-sample random streams.
struct Stream {
  std::mt19937_64 gen;
  explicit Stream(std::uint64_t seed) : gen(seed) {}

  double uniform() { return double(gen() >> 11) * 0x1.0p-53; } // in [0, 1)

  double exponential(double lambda) { return -std::log1p(-uniform()) / lambda; }

  /// Uniform index in {0, ..., n-1} by multiply-shift reduction.
  std::size_t index(std::size_t n) {
    return std::size_t((static_cast<unsigned __int128>(gen()) * n) >> 64);
  }
};

struct StreamSeeds {
  std::uint64_t arrivals = 0;
  std::uint64_t indices = 0;
};

inline StreamSeeds stream_seeds(std::uint64_t scenario_seed, std::uint64_t sample_index) {
  std::uint64_t state = scenario_seed + sample_index * 0x9E3779B97F4A7C15ULL;
  StreamSeeds s;
  s.arrivals = splitmix64(state);
  s.indices = splitmix64(state);
  return s;
}

} // namespace rng

// ---------------------------------------------------------------------------
// Scenario and sample record
// ---------------------------------------------------------------------------

struct MarkovScenario {
  VortexConfiguration initial;
  double lambda = 1.0;   ///< burst rate (1/time)
  double horizon = 1.0;
  std::uint64_t seed = 0;
  double burst_T = 1e-2; ///< per-burst construction window (upper bound)

  void validate() const {
    initial.validate();
    if (initial.size() == 0)
      throw std::invalid_argument("MarkovScenario: empty initial configuration");
    if (!(lambda > 0.0)) throw std::invalid_argument("MarkovScenario: lambda must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("MarkovScenario: horizon must be > 0");
    if (!(burst_T > 0.0)) throw std::invalid_argument("MarkovScenario: burst_T must be > 0");
  }
};

/// Construction certificate for one executed burst.
struct BurstCertificate {
  double raw_arrival = 0.0;   ///< Poisson arrival time
  double t = 0.0;             ///< execution time (== raw_arrival unless deferred)
  bool deferred = false;
  std::size_t index = 0;      ///< chosen vortex (position in the configuration)
  cplx position{0.0, 0.0};
  double intensity = 0.0;
  double T = 0.0;             ///< realised construction window
  double rho = 0.0;           ///< cut-off radius used
  double tstar = 0.0;
  double gamma_residual = 0.0;
  int outer_iterations = 0;
  double children_max_radius = 0.0;
  bool converged = false;
};

struct SampleRecord {
  EventTrajectory trajectory;
  std::size_t arrival_count = 0;           ///< Poisson arrivals in [0, horizon]
  std::vector<double> jump_times;          ///< executed burst times
  std::vector<std::size_t> chosen_indices; ///< uniform vortex choices
  std::vector<BurstCertificate> certificates;
  std::size_t deferrals = 0;
  bool complete = true;
  std::string failure; ///< nonempty when complete == false

  // The sample's burst count is its arrival count: every arrival in
  // [0, horizon] bursts (possibly deferred past a running window).  For a
  // complete sample jump_times.size() == arrival_count; a truncated sample
  // executed only a prefix.

  /// Vortex count per segment, in order (the count changes only at events).
  std::vector<std::size_t> vortex_count_trace() const {
    std::vector<std::size_t> tr;
    tr.reserve(trajectory.segments.size());
    for (const auto& s : trajectory.segments) tr.push_back(s.intensities.size());
    return tr;
  }
};

// ---------------------------------------------------------------------------
// Sampler
// ---------------------------------------------------------------------------

namespace detail {

/// Append the nodes of src to dst, skipping a leading node that duplicates
/// dst's current tail time.
inline void append_nodes(Trajectory& dst, const Trajectory& src) {
  for (std::size_t i = 0; i < src.nodes(); ++i) {
    if (!dst.times.empty() && src.times[i] == dst.times.back()) continue;
    dst.push_node(src.times[i], src.positions[i], src.velocities[i]);
  }
}

/// Cut-off radius for a burst at z_v: a quarter of the nearest background
/// distance, capped at 0.1, and never below the scale the children need.
inline double burst_rho(cplx z_v, const VortexConfiguration& c, std::size_t skip) {
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < c.size(); ++l)
    if (l != skip) dmin = std::min(dmin, std::abs(c.positions[l] - z_v));
  const double rho = std::min(0.1, dmin / 4.0);
  return rho;
}

/// Largest window for which the children certainly stay inside 0.8 * rho:
/// the children span max_j |a_j| sqrt(2 a t) with max |a_j| = |a_1| = 4.
inline double radius_window_cap(double xi, double rho) {
  const SelfSimilarParams p = params_for(xi);
  const double amax = 4.0;
  const double r = 0.8 * rho / amax;
  return r * r / (2.0 * p.a);
}

} // namespace detail

/// Draw one sample: a deterministic function of (sc, sample_index).  The
/// trajectory covers [0, max(horizon, end of the last burst window)]; a burst
/// whose window straddles the horizon is finished rather than cut.
inline SampleRecord sample(const MarkovScenario& sc, std::uint64_t sample_index = 0) {
  sc.validate();
  const rng::StreamSeeds seeds = rng::stream_seeds(sc.seed, sample_index);
  rng::Stream arrivals(seeds.arrivals);
  rng::Stream indices(seeds.indices);

  // The Poisson arrival times on [0, horizon], independent of the dynamics.
  std::vector<double> raw;
  for (double tau = arrivals.exponential(sc.lambda); tau <= sc.horizon;
       tau += arrivals.exponential(sc.lambda))
    raw.push_back(tau);

  SampleRecord rec;
  rec.arrival_count = raw.size();
  VortexConfiguration c = sc.initial;
  double t_now = 0.0;
  double window_end = 0.0;

  Trajectory open; // segment currently being extended
  open.intensities = c.intensities;
  open.tolerance = 0.0;

  MergeSimulationConfig mcfg;
  mcfg.integrator.tol = 1e-10;

  const auto fail = [&](std::string why) {
    rec.complete = false;
    rec.failure = std::move(why);
  };

  // Integrate (with merge-on-collapse continuation) from t_now to t_target,
  // folding the result into the open segment / event list.  Returns false on
  // failure.
  const auto advance_to = [&](double t_target) -> bool {
    if (!(t_target > t_now)) return true;
    MergeSimulation sim = simulate_merging(c, t_now, t_target, FieldSpec::zero(), mcfg);
    if (!sim.completed) {
      fail("regular dynamics failed: " + std::string(to_string(sim.last_stop)) +
           (sim.note.empty() ? "" : " (" + sim.note + ")"));
      return false;
    }
    for (std::size_t s = 0; s < sim.trajectory.segments.size(); ++s) {
      detail::append_nodes(open, sim.trajectory.segments[s]);
      if (s < sim.trajectory.events.size()) {
        rec.trajectory.segments.push_back(std::move(open));
        rec.trajectory.events.push_back(sim.trajectory.events[s]);
        open = Trajectory{};
        open.intensities = sim.trajectory.segments[s + 1].intensities;
      }
    }
    c = sim.trajectory.config_at(t_target);
    t_now = t_target;
    return true;
  };

  for (double tau : raw) {
    const double t_exec = std::max(tau, window_end);
    const bool deferred = t_exec > tau;
    if (deferred) ++rec.deferrals;

    if (!advance_to(t_exec)) break;

    // One index draw per arrival keeps the stream layout stable.
    const std::size_t j = indices.index(c.size());

    BurstCertificate cert;
    cert.raw_arrival = tau;
    cert.t = t_exec;
    cert.deferred = deferred;
    cert.index = j;
    cert.position = c.positions[j];
    cert.intensity = c.intensities[j];

    if (c.intensities[j] == 0.0) {
      rec.certificates.push_back(cert);
      fail("zero-intensity vortex cannot burst");
      break;
    }

    // Background = the remaining vortices; cut-off radius from the local
    // geometry, window capped so the children stay inside the core.
    BackgroundSpec bg;
    for (std::size_t l = 0; l < c.size(); ++l) {
      if (l == j) continue;
      bg.zetas.push_back(c.intensities[l]);
      bg.y0.push_back(c.positions[l]);
    }
    bg.rho = detail::burst_rho(c.positions[j], c, j);
    cert.rho = bg.rho;

    NBurstConfig ncfg;
    ncfg.gamma.T = std::min(sc.burst_T,
                            detail::radius_window_cap(c.intensities[j], bg.rho));

    NBurstSolution ns;
    try {
      ns = solve_nburst(c.intensities[j], c.positions[j], bg, ncfg);
    } catch (const std::exception& e) {
      rec.certificates.push_back(cert);
      fail(std::string("burst construction failed: ") + e.what());
      break;
    }
    cert.T = ns.T;
    cert.tstar = ns.tstar;
    cert.gamma_residual = ns.burst.gamma_residual;
    cert.outer_iterations = ns.outer_iterations;
    cert.children_max_radius = ns.children_max_radius;
    cert.converged = ns.converged;
    rec.certificates.push_back(cert);
    if (!ns.converged) {
      fail("burst construction failed: " + (ns.note.empty() ? "not converged" : ns.note));
      break;
    }

    // Close the open segment with the burst event ...
    Event ev;
    ev.kind = Event::Kind::burst;
    ev.t = t_exec;
    ev.position = c.positions[j];
    ev.before = {j};
    ev.after = {0, 1, 2}; // children come first in the composite ordering
    ev.intensity = c.intensities[j];
    rec.trajectory.segments.push_back(std::move(open));
    rec.trajectory.events.push_back(ev);
    rec.jump_times.push_back(t_exec);
    rec.chosen_indices.push_back(j);

    // ... and open the composite segment on the construction window.
    open = Trajectory{};
    open.tolerance = ns.burst.gamma_residual;
    {
      VortexConfiguration probe = ns.combined_at(ns.T);
      open.intensities = probe.intensities;
    }
    for (double tl : detail::burst_emit_times(ns.burst.curve.t)) {
      VortexConfiguration cc = ns.combined_at(tl);
      open.push_node(t_exec + tl, cc.positions, rhs_free(cc));
    }
    c = ns.combined_at(ns.T);
    t_now = t_exec + ns.T;
    window_end = t_now;
  }

  if (rec.complete) {
    const double t_end = std::max(sc.horizon, t_now);
    advance_to(t_end);
  }

  // Close the trajectory; the invariant segments == events + 1 must hold even
  // for truncated samples.
  if (open.nodes() == 0) {
    open.intensities = c.intensities;
    open.push_node(t_now, c.positions, rhs_free(c));
  }
  rec.trajectory.segments.push_back(std::move(open));
  return rec;
}

// ---------------------------------------------------------------------------
// Ensemble statistics
// ---------------------------------------------------------------------------

struct EnsembleStats {
  std::size_t n_samples = 0;
  std::size_t completed = 0;
  std::vector<std::size_t> burst_counts; ///< per sample: Poisson arrivals in [0, horizon]
  double mean_burst_count = 0.0;         ///< mean arrival count (Poisson(lambda*horizon))
  double mean_executed_count = 0.0;      ///< mean executed bursts (< mean on truncation)
  std::size_t total_deferrals = 0;
  std::size_t max_vortex_count = 0;
  double mean_total_jump = 0.0;     ///< measured energy jump total, completed samples
  double max_ledger_mismatch = 0.0; ///< |measured - expected| totals, worst sample
};

inline EnsembleStats ensemble_stats(const MarkovScenario& sc, std::size_t n_samples) {
  EnsembleStats st;
  st.n_samples = n_samples;
  double jump_sum = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const SampleRecord rec = sample(sc, k);
    st.burst_counts.push_back(rec.arrival_count);
    st.mean_burst_count += double(rec.arrival_count);
    st.mean_executed_count += double(rec.jump_times.size());
    st.total_deferrals += rec.deferrals;
    for (const auto& seg : rec.trajectory.segments)
      st.max_vortex_count = std::max(st.max_vortex_count, seg.intensities.size());
    if (!rec.complete) continue;
    ++st.completed;

    const EnergyLedger ledger = energy_ledger(rec.trajectory);
    double expected = 0.0;
    for (const Event& ev : rec.trajectory.events)
      expected += (ev.kind == Event::Kind::burst ? energy_jump_constant(ev.intensity)
                                                 : -energy_jump_constant(ev.intensity));
    jump_sum += ledger.total_jump;
    st.max_ledger_mismatch =
        std::max(st.max_ledger_mismatch, std::abs(ledger.total_jump - expected));
  }
  if (n_samples > 0) {
    st.mean_burst_count /= double(n_samples);
    st.mean_executed_count /= double(n_samples);
  }
  if (st.completed > 0) st.mean_total_jump = jump_sum / double(st.completed);
  return st;
}

// ---------------------------------------------------------------------------
// Stream diagnostics
// ---------------------------------------------------------------------------

struct KSReport {
  std::size_t n = 0;
  double statistic = 0.0;
  double critical = 0.0; ///< asymptotic critical value at the 0.01 level
  bool pass = false;
};

/// Kolmogorov-Smirnov test of draws against Exponential(lambda).
inline KSReport ks_exponential(std::vector<double> draws, double lambda) {
  KSReport rep;
  rep.n = draws.size();
  if (draws.empty()) return rep;
  std::sort(draws.begin(), draws.end());
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = 1.0 - std::exp(-lambda * draws[i]);
    d = std::max(d, std::abs(f - double(i) / draws.size()));
    d = std::max(d, std::abs(double(i + 1) / draws.size() - f));
  }
  rep.statistic = d;
  rep.critical = 1.62762 / std::sqrt(double(draws.size()));
  rep.pass = rep.statistic <= rep.critical;
  return rep;
}

/// First inter-arrival waiting time of each sample stream, without running
/// any dynamics: across sample indices these are iid Exponential(lambda) by
/// the stream layout, which is what the distributional test certifies.
inline std::vector<double> first_arrival_waits(const MarkovScenario& sc, std::size_t n) {
  std::vector<double> w;
  w.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    rng::Stream arr(rng::stream_seeds(sc.seed, k).arrivals);
    w.push_back(arr.exponential(sc.lambda));
  }
  return w;
}

} // namespace vortex
