#pragma once

// Scenario files: a small JSON dialect describing the runs the command-line
// driver can perform, plus the builders that turn a parsed scenario into an
// event trajectory.  Parsing is strict: unknown keys anywhere in the document
// are rejected, so typos fail loudly instead of silently falling back to
// defaults.
//
// Top-level shape:
//
//   { "version": 1, "kind": "burst" | "collapse" | "simulate" | "markov", ... }
//
// kind "burst" / "collapse" (collapse = time-reversed burst):
//   intensity   number (required, nonzero)     parent intensity
//   at          [re, im] (default [0, 0])      burst location
//   domain      "plane" | "disk"               (default "plane")
//   background  [{intensity, position}, ...]   (plane only, default [])
//   rho         number                         cut-off radius (default 0.1)
//   field       {kind, value, slope, radius}   external field (plane only)
//   window      {T, pre, post}                 horizons (pre/post default to
//                                              the effective horizon)
//   solver      inner/outer solver knobs       (see parse_solver)
//   integrator  {tol, step_cap_factor, collapse_eps, max_steps}
//
// kind "simulate":
//   vortices    [{intensity, position}, ...]   (required)
//   domain      "plane" | "disk"
//   field       external field (plane only)
//   time        {from (default 0), to (required)}
//   integrator  as above
//   merge       {enabled, fit_nodes, group_factor, admissible_tol, max_merges}
//
// kind "markov":
//   vortices    [{intensity, position}, ...]   (required)
//   lambda      arrival rate   (default 1)
//   horizon     time horizon   (default 1)
//   seed        RNG seed       (default 0)
//   burst_window  requested per-burst horizon (default 1e-2)

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vortex/dynamics.hpp"
#include "vortex/markov.hpp"
#include "vortex/nburst.hpp"
#include "vortex/trajectory.hpp"

namespace vortex {

namespace detail {

using nlohmann::json;

[[noreturn]] inline void scenario_fail(const std::string& where,
                                       const std::string& msg) {
  throw std::runtime_error("scenario: " + where + ": " + msg);
}

inline void require_object(const json& v, const std::string& where) {
  if (!v.is_object()) scenario_fail(where, "expected an object");
}

/// Reject keys outside the allowed set.
inline void check_keys(const json& obj, const std::string& where,
                       std::initializer_list<const char*> allowed) {
  require_object(obj, where);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) scenario_fail(where, "unknown key '" + it.key() + "'");
  }
}

inline double get_number(const json& obj, const std::string& where,
                         const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) scenario_fail(where, std::string{key} + " must be a number");
  return v.get<double>();
}

inline double require_number(const json& obj, const std::string& where,
                             const char* key) {
  if (!obj.contains(key)) scenario_fail(where, std::string{key} + " is required");
  const json& v = obj.at(key);
  if (!v.is_number()) scenario_fail(where, std::string{key} + " must be a number");
  return v.get<double>();
}

inline long long get_integer(const json& obj, const std::string& where,
                             const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer())
    scenario_fail(where, std::string{key} + " must be an integer");
  return v.get<long long>();
}

inline bool get_bool(const json& obj, const std::string& where, const char* key,
                     bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) scenario_fail(where, std::string{key} + " must be a boolean");
  return v.get<bool>();
}

inline cplx parse_complex(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    scenario_fail(where, "expected [re, im]");
  return cplx{v[0].get<double>(), v[1].get<double>()};
}

inline cplx get_complex(const json& obj, const std::string& where, const char* key,
                        cplx fallback) {
  if (!obj.contains(key)) return fallback;
  return parse_complex(obj.at(key), where + "." + key);
}

inline Domain parse_domain(const json& obj, const std::string& where) {
  if (!obj.contains("domain")) return Domain::plane;
  const json& v = obj.at("domain");
  if (v.is_string() && v.get<std::string>() == "plane") return Domain::plane;
  if (v.is_string() && v.get<std::string>() == "disk") return Domain::disk;
  scenario_fail(where, "domain must be \"plane\" or \"disk\"");
}

inline FieldSpec parse_field(const json& obj, const std::string& where) {
  if (!obj.contains("field")) return FieldSpec::zero();
  const json& f = obj.at("field");
  const std::string fw = where + ".field";
  check_keys(f, fw, {"kind", "value", "slope", "radius"});
  if (!f.contains("kind") || !f.at("kind").is_string())
    scenario_fail(fw, "kind is required (\"zero\", \"constant\" or \"affine\")");
  const std::string kind = f.at("kind").get<std::string>();
  if (kind == "zero") {
    check_keys(f, fw, {"kind"});
    return FieldSpec::zero();
  }
  if (kind == "constant") {
    check_keys(f, fw, {"kind", "value"});
    return FieldSpec::constant(get_complex(f, fw, "value", cplx{}));
  }
  if (kind == "affine") {
    const cplx value = get_complex(f, fw, "value", cplx{});
    const cplx slope = get_complex(f, fw, "slope", cplx{});
    const double radius = get_number(f, fw, "radius", 1.0);
    if (!(radius > 0.0)) scenario_fail(fw, "radius must be positive");
    return FieldSpec::affine(value, slope, radius);
  }
  scenario_fail(fw, "unknown field kind '" + kind + "'");
}

inline IntegratorConfig parse_integrator(const json& obj, const std::string& where,
                                         IntegratorConfig base = {}) {
  if (!obj.contains("integrator")) return base;
  const json& v = obj.at("integrator");
  const std::string w = where + ".integrator";
  check_keys(v, w, {"tol", "step_cap_factor", "collapse_eps", "max_steps"});
  base.tol = get_number(v, w, "tol", base.tol);
  base.step_cap_factor = get_number(v, w, "step_cap_factor", base.step_cap_factor);
  base.collapse_eps = get_number(v, w, "collapse_eps", base.collapse_eps);
  const long long ms = get_integer(v, w, "max_steps",
                                   static_cast<long long>(base.max_steps));
  if (ms <= 0) scenario_fail(w, "max_steps must be positive");
  base.max_steps = static_cast<std::size_t>(ms);
  base.validate();
  return base;
}

/// Inner (Picard) and outer (alternation) solver knobs for burst scenarios.
inline void parse_solver(const json& obj, const std::string& where,
                         NBurstConfig& cfg) {
  if (!obj.contains("solver")) return;
  const json& v = obj.at("solver");
  const std::string w = where + ".solver";
  check_keys(v, w,
             {"grid_nodes", "grading", "picard_tol", "picard_max_iter", "damping",
              "max_halvings", "max_outer", "outer_tol_factor", "cap_by_tstar"});
  cfg.gamma.grid_nodes = static_cast<int>(
      get_integer(v, w, "grid_nodes", cfg.gamma.grid_nodes));
  cfg.gamma.grading = get_number(v, w, "grading", cfg.gamma.grading);
  cfg.gamma.picard_tol = get_number(v, w, "picard_tol", cfg.gamma.picard_tol);
  cfg.gamma.picard_max_iter = static_cast<int>(
      get_integer(v, w, "picard_max_iter", cfg.gamma.picard_max_iter));
  cfg.gamma.damping = get_number(v, w, "damping", cfg.gamma.damping);
  cfg.gamma.max_halvings = static_cast<int>(
      get_integer(v, w, "max_halvings", cfg.gamma.max_halvings));
  cfg.max_outer = static_cast<int>(get_integer(v, w, "max_outer", cfg.max_outer));
  cfg.outer_tol_factor = get_number(v, w, "outer_tol_factor", cfg.outer_tol_factor);
  cfg.cap_horizon_by_tstar = get_bool(v, w, "cap_by_tstar", cfg.cap_horizon_by_tstar);
  cfg.gamma.validate();
}

inline std::vector<std::pair<double, cplx>> parse_vortex_list(
    const json& obj, const std::string& where, const char* key) {
  std::vector<std::pair<double, cplx>> out;
  if (!obj.contains(key)) return out;
  const json& arr = obj.at(key);
  const std::string w = where + "." + key;
  if (!arr.is_array()) scenario_fail(w, "expected an array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& item = arr[i];
    const std::string iw = w + "[" + std::to_string(i) + "]";
    check_keys(item, iw, {"intensity", "position"});
    const double xi = require_number(item, iw, "intensity");
    if (!item.contains("position")) scenario_fail(iw, "position is required");
    out.emplace_back(xi, parse_complex(item.at("position"), iw + ".position"));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parsed scenarios
// ---------------------------------------------------------------------------

struct BurstScenario {
  double intensity = 1.0;
  cplx at{0.0, 0.0};
  Domain domain = Domain::plane;
  std::vector<double> zetas;  // background intensities
  std::vector<cplx> y0;       // background positions at the event time
  double rho = 0.1;
  FieldSpec field;       // plane only; exclusive with a nonempty background
  double pre = -1.0;     // pre-event horizon; < 0 means "effective horizon"
  double post = -1.0;    // post-event extension; < 0 means "effective horizon"
  NBurstConfig config;   // gamma.T is the requested horizon
  bool reversed = false; // collapse scenarios: time-reverse the assembly
};

struct SimulateScenario {
  VortexConfiguration vortices;
  Domain domain = Domain::plane;
  FieldSpec field;
  double t0 = 0.0;
  double t1 = 1.0;
  bool merging = true;
  MergeSimulationConfig merge;
};

struct Scenario {
  enum class Kind { burst, collapse, simulate, markov };
  Kind kind = Kind::burst;
  BurstScenario burst;      // kinds burst / collapse
  SimulateScenario run;     // kind simulate
  MarkovScenario markov;    // kind markov
};

inline const char* to_string(Scenario::Kind k) {
  switch (k) {
    case Scenario::Kind::burst: return "burst";
    case Scenario::Kind::collapse: return "collapse";
    case Scenario::Kind::simulate: return "simulate";
    case Scenario::Kind::markov: return "markov";
  }
  return "?";
}

inline Scenario parse_scenario(const nlohmann::json& doc) {
  using detail::check_keys;
  using detail::scenario_fail;
  const std::string top = "top level";
  detail::require_object(doc, top);
  if (!doc.contains("version") || !doc.at("version").is_number_integer() ||
      doc.at("version").get<long long>() != 1)
    scenario_fail(top, "version must be the integer 1");
  if (!doc.contains("kind") || !doc.at("kind").is_string())
    scenario_fail(top, "kind is required");
  const std::string kind = doc.at("kind").get<std::string>();

  Scenario sc;
  if (kind == "burst" || kind == "collapse") {
    sc.kind = kind == "burst" ? Scenario::Kind::burst : Scenario::Kind::collapse;
    BurstScenario& b = sc.burst;
    b.reversed = sc.kind == Scenario::Kind::collapse;
    check_keys(doc, top,
               {"version", "kind", "intensity", "at", "domain", "background",
                "rho", "field", "window", "solver", "integrator"});
    b.intensity = detail::require_number(doc, top, "intensity");
    if (b.intensity == 0.0) scenario_fail(top, "intensity must be nonzero");
    b.at = detail::get_complex(doc, top, "at", cplx{});
    b.domain = detail::parse_domain(doc, top);
    for (const auto& [zeta, y] : detail::parse_vortex_list(doc, top, "background")) {
      if (zeta == 0.0) scenario_fail(top, "background intensities must be nonzero");
      b.zetas.push_back(zeta);
      b.y0.push_back(y);
    }
    b.rho = detail::get_number(doc, top, "rho", b.rho);
    if (!(b.rho > 0.0)) scenario_fail(top, "rho must be positive");
    b.field = detail::parse_field(doc, top);
    if (doc.contains("window")) {
      const std::string w = "window";
      const nlohmann::json& win = doc.at("window");
      check_keys(win, w, {"T", "pre", "post"});
      b.config.gamma.T = detail::get_number(win, w, "T", b.config.gamma.T);
      b.pre = detail::get_number(win, w, "pre", b.pre);
      b.post = detail::get_number(win, w, "post", b.post);
      if (!(b.config.gamma.T > 0.0)) scenario_fail(w, "T must be positive");
    }
    detail::parse_solver(doc, top, b.config);
    b.config.integrator = detail::parse_integrator(doc, top, b.config.integrator);
    if (b.domain == Domain::disk) {
      if (!b.zetas.empty())
        scenario_fail(top, "disk bursts do not admit a background");
      if (!b.field.is_zero())
        scenario_fail(top, "disk bursts do not admit an external field");
      if (!(std::abs(b.at) < 1.0))
        scenario_fail(top, "disk bursts require |at| < 1");
    }
    if (!b.field.is_zero() && !b.zetas.empty())
      scenario_fail(top, "field and background are mutually exclusive");
    if (b.field.kind == FieldSpec::Kind::affine &&
        std::abs(b.at) + 1e-12 > b.field.radius)
      scenario_fail(top, "affine field: burst point outside the stated radius");
    return sc;
  }

  if (kind == "simulate") {
    sc.kind = Scenario::Kind::simulate;
    SimulateScenario& s = sc.run;
    check_keys(doc, top, {"version", "kind", "vortices", "domain", "field", "time",
                          "integrator", "merge"});
    for (const auto& [xi, z] : detail::parse_vortex_list(doc, top, "vortices")) {
      s.vortices.intensities.push_back(xi);
      s.vortices.positions.push_back(z);
    }
    if (s.vortices.size() == 0) scenario_fail(top, "vortices must be nonempty");
    s.domain = detail::parse_domain(doc, top);
    s.field = detail::parse_field(doc, top);
    if (s.domain == Domain::disk && !s.field.is_zero())
      scenario_fail(top, "disk simulations do not admit an external field");
    if (!doc.contains("time")) scenario_fail(top, "time is required");
    {
      const nlohmann::json& tv = doc.at("time");
      check_keys(tv, "time", {"from", "to"});
      s.t0 = detail::get_number(tv, "time", "from", 0.0);
      s.t1 = detail::require_number(tv, "time", "to");
      if (!(s.t1 > s.t0)) scenario_fail("time", "to must exceed from");
    }
    s.merge.integrator = detail::parse_integrator(doc, top, s.merge.integrator);
    if (doc.contains("merge")) {
      const nlohmann::json& m = doc.at("merge");
      const std::string w = "merge";
      check_keys(m, w, {"enabled", "fit_nodes", "group_factor", "admissible_tol",
                        "max_merges"});
      s.merging = detail::get_bool(m, w, "enabled", s.merging);
      s.merge.fit_nodes = static_cast<std::size_t>(detail::get_integer(
          m, w, "fit_nodes", static_cast<long long>(s.merge.fit_nodes)));
      s.merge.group_factor = detail::get_number(m, w, "group_factor",
                                                s.merge.group_factor);
      s.merge.admissible_tol = detail::get_number(m, w, "admissible_tol",
                                                  s.merge.admissible_tol);
      s.merge.max_merges = static_cast<std::size_t>(detail::get_integer(
          m, w, "max_merges", static_cast<long long>(s.merge.max_merges)));
    }
    return sc;
  }

  if (kind == "markov") {
    sc.kind = Scenario::Kind::markov;
    MarkovScenario& m = sc.markov;
    check_keys(doc, top, {"version", "kind", "vortices", "lambda", "horizon",
                          "seed", "burst_window"});
    for (const auto& [xi, z] : detail::parse_vortex_list(doc, top, "vortices")) {
      m.initial.intensities.push_back(xi);
      m.initial.positions.push_back(z);
    }
    if (m.initial.size() == 0) scenario_fail(top, "vortices must be nonempty");
    m.lambda = detail::get_number(doc, top, "lambda", m.lambda);
    m.horizon = detail::get_number(doc, top, "horizon", m.horizon);
    m.seed = static_cast<std::uint64_t>(
        detail::get_integer(doc, top, "seed", static_cast<long long>(m.seed)));
    m.burst_T = detail::get_number(doc, top, "burst_window", m.burst_T);
    m.validate();
    return sc;
  }

  scenario_fail(top, "unknown kind '" + kind + "'");
}

inline Scenario parse_scenario_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string{"scenario: invalid JSON: "} + e.what());
  }
  return parse_scenario(doc);
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("scenario: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << is.rdbuf();
  return parse_scenario_text(buf.str());
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

struct BurstBuildResult {
  EventTrajectory trajectory;  // valid only when converged
  bool forced = false;         // built under a nonzero external field
  bool converged = false;
  std::string note;            // failure description when not converged
  cplx origin{};
  double T = 0.0;              // effective burst horizon
  double rho = 0.0;            // cut-off radius (embedded bursts)
  double tstar = 0.0;          // membership bound on the horizon (embedded)
  double gamma_residual = 0.0;
  double outer_residual = 0.0;
  int outer_iterations = 0;
  double children_max_radius = 0.0;
};

/// Build the event trajectory of a single burst (or collapse) scenario.
/// Dispatches on domain and field/background content.  A non-converged
/// construction reports converged = false with a note instead of throwing;
/// hard contract violations (e.g. a background vortex inside the cut-off
/// ring) still throw.
inline BurstBuildResult build_burst(const BurstScenario& sc) {
  BurstBuildResult out;
  out.origin = sc.at;
  IntegratorConfig icfg = sc.config.integrator;
  icfg.collapse_eps = 0.0;

  const auto finish = [&](EventTrajectory tr) {
    if (sc.reversed) tr = tr.time_reversed();
    out.trajectory = std::move(tr);
  };

  if (sc.domain == Domain::disk) {
    DiskBurstSolution ds = solve_disk_burst(sc.intensity, sc.at, sc.config);
    out.converged = ds.converged;
    out.note = ds.note;
    out.T = ds.T;
    out.gamma_residual = ds.burst.gamma_residual;
    out.outer_residual = ds.outer_residual;
    out.outer_iterations = ds.outer_iterations;
    if (!ds.converged) return out;
    const double pre = sc.pre >= 0.0 ? sc.pre : ds.T;
    const double post = sc.post >= 0.0 ? sc.post : ds.T;
    finish(assemble_disk(ds, sc.intensity, pre, post, icfg));
    return out;
  }

  if (!sc.field.is_zero()) {
    // Burst driven by an explicit external field.  The solver works in the
    // frame of the burst point; constant and affine fields translate
    // analytically.
    FieldSpec local = sc.field;
    if (local.kind == FieldSpec::Kind::affine)
      local = FieldSpec::affine(local.value + local.slope * sc.at, local.slope,
                                local.radius);
    BurstSolution sol = solve_burst(sc.intensity, local, sc.config.gamma);
    out.converged = sol.converged;
    out.T = sol.T;
    out.gamma_residual = sol.gamma_residual;
    if (!sol.converged) {
      out.note = "burst fixed-point iteration did not converge";
      return out;
    }
    out.forced = true;
    const double pre = sc.pre >= 0.0 ? sc.pre : sol.T;
    const double post = sc.post >= 0.0 ? sc.post : sol.T;

    EventTrajectory tr;
    {
      VortexConfiguration parent{{sc.intensity}, {sc.at}};
      IntegrationResult res = integrate(parent, 0.0, -pre, sc.field, icfg);
      if (res.reason != StopReason::reached_end)
        throw std::runtime_error("build_burst: pre-segment integration failed");
      tr.segments.push_back(detail::ascending_nodes(std::move(res.trajectory)));
    }
    {
      Event ev;
      ev.kind = Event::Kind::burst;
      ev.t = 0.0;
      ev.position = sc.at;
      ev.before = {0};
      ev.after = {0, 1, 2};
      ev.intensity = sc.intensity;
      tr.events.push_back(ev);
    }
    {
      Trajectory seg;
      seg.tolerance = sol.gamma_residual;
      seg.intensities = split_vector(sol.params);
      for (double t : detail::burst_emit_times(sol.curve.t)) {
        VortexConfiguration c = sol.configuration(t);
        for (cplx& z : c.positions) z += sc.at;
        seg.push_node(t, c.positions, rhs_field(c, t, sc.field));
      }
      if (post > 0.0) {
        VortexConfiguration c = sol.configuration(sol.T);
        for (cplx& z : c.positions) z += sc.at;
        IntegrationResult res = integrate(c, sol.T, sol.T + post, sc.field, icfg);
        if (res.reason != StopReason::reached_end)
          throw std::runtime_error("build_burst: post-segment integration failed");
        for (std::size_t i = 1; i < res.trajectory.nodes(); ++i)
          seg.push_node(res.trajectory.times[i], res.trajectory.positions[i],
                        res.trajectory.velocities[i]);
      }
      tr.segments.push_back(std::move(seg));
    }
    finish(std::move(tr));
    return out;
  }

  // Free plane, with or without a background.
  BackgroundSpec bg;
  bg.zetas = sc.zetas;
  bg.y0 = sc.y0;
  bg.rho = sc.rho;
  NBurstSolution ns = solve_nburst(sc.intensity, sc.at, bg, sc.config);
  out.converged = ns.converged;
  out.note = ns.note;
  out.T = ns.T;
  out.rho = ns.rho;
  out.tstar = ns.tstar;
  out.gamma_residual = ns.burst.gamma_residual;
  out.outer_residual = ns.outer_residual;
  out.outer_iterations = ns.outer_iterations;
  out.children_max_radius = ns.children_max_radius;
  if (!ns.converged) return out;
  const double pre = sc.pre >= 0.0 ? sc.pre : ns.T;
  const double post = sc.post >= 0.0 ? sc.post : ns.T;
  finish(assemble_embedded(ns, sc.intensity, pre, post, icfg));
  return out;
}

struct SimulateBuildResult {
  EventTrajectory trajectory;
  bool forced = false;
  bool completed = false;
  std::string note;
};

/// Integrate a plain simulation scenario, folding admissible collapses into
/// merge events when merging is enabled.
inline SimulateBuildResult build_simulation(const SimulateScenario& sc) {
  SimulateBuildResult out;
  out.forced = !sc.field.is_zero();
  if (sc.domain == Domain::disk)
    for (const cplx& z : sc.vortices.positions)
      if (!(std::abs(z) < 1.0))
        throw std::runtime_error("simulate: vortex outside the unit disk");
  if (sc.merging) {
    MergeSimulation sim = simulate_merging(sc.vortices, sc.t0, sc.t1, sc.field,
                                           sc.merge, sc.domain);
    out.trajectory = std::move(sim.trajectory);
    out.completed = sim.completed;
    out.note = sim.note.empty() ? std::string{to_string(sim.last_stop)} : sim.note;
  } else {
    IntegrationResult res = integrate(sc.vortices, sc.t0, sc.t1, sc.field,
                                      sc.merge.integrator, sc.domain);
    out.completed = res.reason == StopReason::reached_end;
    out.note = to_string(res.reason);
    out.trajectory.segments.push_back(std::move(res.trajectory));
  }
  return out;
}

}  // namespace vortex
