// Acceptance gate: twelve numbered criteria over the whole library, each
// printing exactly one line
//   [ k] PASS <name> (<measured values>; <elapsed>s)
//   [ k] FAIL <name> (<measured values>; <elapsed>s)
// and the process exit code is the number of failed criteria.  Run one
// criterion with `acceptance --criterion <k>`, or all of them with no
// arguments.  Every tolerance and reference constant is pinned inline next
// to the check that uses it; measured values are always printed so a failure
// line shows the actual numbers, not just the verdict.
//
// Criteria 2, 5 and 8 compare against pinned reference constants that the
// measurements do not reproduce; they fail with the measured values and the
// structural reason printed.  See README.md for the analysis.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "vortex/core.hpp"
#include "vortex/dynamics.hpp"
#include "vortex/markov.hpp"
#include "vortex/nburst.hpp"
#include "vortex/scenario.hpp"
#include "vortex/selfsimilar.hpp"
#include "vortex/weakform.hpp"

using namespace vortex;

namespace {

using clk = std::chrono::steady_clock;

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

std::string strf(const char* fmt, ...) {
  char buf[1536];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return std::string{buf};
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

const double kXis[] = {1.0, -1.0, 84.0 * pi, -84.0 * pi};

/// Exact velocity of the self-similar triple: d/dt (a_j Z) with
/// Z = sqrt(2at) e^{i (b/2a) log t}, so dZ/dt = Z (a + i b) / (2 a t).
cplx exact_velocity(const SelfSimilarParams& p, double t, int j) {
  return p.positions[j] * z_of_t(p, t) * cplx{p.a, p.b} / (2.0 * p.a * t);
}

// ---------------------------------------------------------------------------
// 1. Self-similar exactness
// ---------------------------------------------------------------------------

Outcome criterion_selfsimilar_exactness() {
  const double tol = 1e-10;
  double worst = 0.0;
  for (double xi : kXis) {
    const auto p = params_for(xi);
    for (int k = 0; k < 50; ++k) {
      const double t = std::pow(10.0, -6.0 + 6.0 * k / 49.0);
      const auto conf = similarity_configuration(p, t);
      const auto vel = rhs_free(conf);
      double scale = 0.0, err = 0.0;
      for (int j = 0; j < 3; ++j) {
        const cplx ex = exact_velocity(p, t, j);
        scale = std::max(scale, std::abs(ex));
        err = std::max(err, std::abs(vel[j] - ex));
      }
      worst = std::max(worst, err / scale);
    }
  }
  return {worst <= tol,
          strf("max relative ODE residual %.3e over 4 intensities x 50 times, "
               "tolerance %.0e", worst, tol)};
}

// ---------------------------------------------------------------------------
// 2. Linearization algebra
// ---------------------------------------------------------------------------

Outcome criterion_linearization_algebra() {
  // Pinned reference constants for the closed-form family.
  const double ref_d1 = 3.4463e-4;  // expected d1 / xi^2
  const double ref_d2 = 2.7035e-9;  // expected d2 / xi^4
  double worst_asrel = 0.0, worst_re = 0.0, worst_r1 = 0.0, worst_r2 = 0.0;
  double m1 = 0.0, m2 = 0.0;
  for (double xi : kXis) {
    const auto p = params_for(xi);
    worst_asrel = std::max(worst_asrel, asrelation_residual(p));
    const LMatrix L = build_L(p);
    for (const cplx ev : eigenvalues(L))
      worst_re = std::max(worst_re, std::abs(ev.real() + p.a) / p.a);
    const auto [d1, d2] = eigen_discriminants(L);
    m1 = d1 / (xi * xi);
    m2 = d2 / (xi * xi * xi * xi);
    worst_r1 = std::max(worst_r1, std::abs(m1 - ref_d1) / ref_d1);
    worst_r2 = std::max(worst_r2, std::abs(m2 - ref_d2) / ref_d2);
  }
  const bool sub_asrel = worst_asrel <= 1e-12;
  const bool sub_re = worst_re <= 1e-9;
  const bool sub_disc = worst_r1 <= 1e-3 && worst_r2 <= 1e-3;
  // The measured discriminants have closed forms 22 xi^2/(84 pi)^2 and
  // -75 xi^4/(84 pi)^4, equivalent to the spectrum {0, -2a, -a+ib, -a-ib}:
  // the zero and -2a modes are forced by the family's own symmetries
  // (rescaling of the shape coefficients and time translation), so a
  // spectrum with all real parts equal to -a is not attainable for this L.
  const double u = 84.0 * pi;
  return {sub_asrel && sub_re && sub_disc,
          strf("algebra residual %.2e (tol 1e-12); eigenvalue real-part "
               "deviation %.2e*a (tol 1e-9*a, spectrum {0, -2a, -a+/-ib}); "
               "d1 = %.5e xi^2 (= %.3f/(84pi)^2) vs pinned %.5e, d2 = %.5e "
               "xi^4 (= %.3f/(84pi)^4) vs pinned %.5e, rel tol 1e-3",
               worst_asrel, worst_re, m1, m1 * u * u, ref_d1, m2,
               m2 * u * u * u * u, ref_d2)};
}

// ---------------------------------------------------------------------------
// 3. Degenerate invariants of the burst triple
// ---------------------------------------------------------------------------

Outcome criterion_burst_triple_invariants() {
  double worst = 0.0;
  for (double xi : kXis) {
    const auto p = params_for(xi);
    double psum = 0.0;
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        if (k != j) psum += p.intensities[j] * p.intensities[k];
    worst = std::max(worst, std::abs(psum) / (xi * xi));
    for (double t : {1e-6, 1e-3, 1.0}) {
      const auto conf = similarity_configuration(p, t);
      double inertia_scale = 0.0, center_scale = 0.0;
      for (std::size_t j = 0; j < 3; ++j) {
        center_scale += std::abs(conf.intensities[j] * conf.positions[j]);
        for (std::size_t k = j + 1; k < 3; ++k)
          inertia_scale += 2.0 *
                           std::abs(conf.intensities[j] * conf.intensities[k]) *
                           std::norm(conf.positions[j] - conf.positions[k]);
      }
      worst = std::max(worst, std::abs(moment_of_inertia(conf)) / inertia_scale);
      worst = std::max(worst,
                       std::abs(center_of_vorticity(conf)) / center_scale);
    }
  }
  return {worst <= 1e-12,
          strf("worst scale-normalised degeneracy %.3e over {pair sum, "
               "inertia, center} x 4 intensities x 3 times, tolerance 1e-12",
               worst)};
}

// ---------------------------------------------------------------------------
// 4. Fixed-point recovery
// ---------------------------------------------------------------------------

Outcome criterion_fixed_point_recovery() {
  GammaConfig cfg;
  cfg.T = 1e-2;
  const auto p = params_for(1.0);

  const BurstSolution s0 = solve_burst(1.0, FieldSpec::zero(), cfg);
  if (!s0.converged || s0.T < cfg.T)
    return {false, strf("zero-field solve converged=%d T=%g", s0.converged, s0.T)};
  double sup0 = 0.0;
  for (double t : s0.curve.t) {
    const cplx Z = z_of_t(p, t);
    const auto z = s0.positions(t);
    for (int j = 0; j < 3; ++j)
      sup0 = std::max(sup0, std::abs(z[j] - p.positions[j] * Z));
  }

  const cplx c{0.3, -0.2};
  const BurstSolution sc = solve_burst(1.0, FieldSpec::constant(c), cfg);
  if (!sc.converged || sc.T < cfg.T)
    return {false, strf("constant-field solve converged=%d T=%g", sc.converged, sc.T)};
  double supc = 0.0;
  for (double t : sc.curve.t) {
    const cplx Z = z_of_t(p, t);
    const auto z = sc.positions(t);
    for (int j = 0; j < 3; ++j)
      supc = std::max(supc,
                      std::abs(z[j] - (p.positions[j] * Z + std::conj(c) * t)));
  }
  return {sup0 <= 1e-8 && supc <= 1e-6,
          strf("f = 0: sup distance to the self-similar solution %.3e on "
               "(0, 1e-2] (tol 1e-8); f = c: sup distance to a_j Z + "
               "conj(c) t %.3e (tol 1e-6)", sup0, supc)};
}

// ---------------------------------------------------------------------------
// 5. Field sensitivity
// ---------------------------------------------------------------------------

Outcome criterion_field_sensitivity() {
  // Probe pair: constant fields differing by eps * u, so ||f-g||_inf = eps
  // globally.  Quotients are measured in Cartesian positions (as stated) and
  // in the similarity chart x_j = z_j/z_1 - a_j/a_1 (where the underlying
  // estimate is sharp).
  const cplx c0{0.05, -0.03};
  const cplx u{0.6, 0.8};
  const double horizons[] = {1e-2, 5e-3, 2.5e-3};
  const double epss[] = {1e-4, 1e-3, 1e-2};
  const auto p = params_for(1.0);

  double cart[3][3] = {}, chart[3][3] = {};
  for (int a = 0; a < 3; ++a) {
    GammaConfig cfg;
    cfg.T = horizons[a];
    for (int b = 0; b < 3; ++b) {
      const double eps = epss[b];
      const BurstSolution sf = solve_burst(1.0, FieldSpec::constant(c0), cfg);
      const BurstSolution sg =
          solve_burst(1.0, FieldSpec::constant(c0 + eps * u), cfg);
      if (!sf.converged || !sg.converged)
        return {false, strf("solve at T=%g eps=%g did not converge",
                            horizons[a], eps)};
      double supz = 0.0, supx = 0.0;
      const double T = std::min(sf.T, sg.T);
      for (double t : sf.curve.t) {
        if (t > T) break;
        const auto zf = sf.positions(t);
        const auto zg = sg.positions(t);
        for (int j = 0; j < 3; ++j)
          supz = std::max(supz, std::abs(zf[j] - zg[j]));
        for (int j = 1; j < 3; ++j)
          supx = std::max(supx, std::abs(zf[j] / zf[0] - zg[j] / zg[0]));
      }
      cart[a][b] = supz / (std::sqrt(T) * eps);
      chart[a][b] = supx / (std::sqrt(T) * eps);
    }
  }
  // Stability under two halvings of T, at each eps, relative to the T=1e-2
  // quotient; linearity across two decades of eps, at each T.
  auto stability = [](double q[3][3]) {
    double worst = 0.0;
    for (int b = 0; b < 3; ++b)
      for (int a = 1; a < 3; ++a)
        worst = std::max(worst, std::abs(q[a][b] / q[0][b] - 1.0));
    return worst;
  };
  auto linearity = [](double q[3][3]) {
    double worst = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double lo = std::min({q[a][0], q[a][1], q[a][2]});
      const double hi = std::max({q[a][0], q[a][1], q[a][2]});
      worst = std::max(worst, (hi - lo) / q[a][1]);
    }
    return worst;
  };
  const double cart_stab = stability(cart), cart_lin = linearity(cart);
  const double chart_stab = stability(chart), chart_lin = linearity(chart);
  // Gate: the stated Cartesian quotient must be stable to +-20% and linear
  // to 10%.  The Cartesian response to a bounded field difference is
  // proportional to T (shape response ~ sqrt(t) times the cluster radius
  // ~ sqrt(t)), so this quotient decays by 1/sqrt(2) per halving; the
  // chart quotient is the one that stabilises.
  const bool pass = cart_stab <= 0.2 && cart_lin <= 0.1;
  (void)p;
  return {pass,
          strf("cartesian quotient sup|z-z'|/(sqrt(T)||f-g||) = "
               "%.4f -> %.4f -> %.4f under halvings (drift %.1f%%, limit "
               "20%%), linear to %.2f%% (limit 10%%); chart quotient = "
               "%.3f -> %.3f -> %.3f (drift %.1f%%, linear to %.2f%%)",
               cart[0][1], cart[1][1], cart[2][1], 100.0 * cart_stab,
               100.0 * cart_lin, chart[0][1], chart[1][1], chart[2][1],
               100.0 * chart_stab, 100.0 * chart_lin)};
}

// ---------------------------------------------------------------------------
// 6. Conservation
// ---------------------------------------------------------------------------

Outcome criterion_conservation() {
  IntegratorConfig icfg;
  icfg.tol = 1e-10;

  double worst_plane = 0.0;
  for (unsigned seed : {11u, 12u, 13u}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pos(-1.0, 1.0), mag(0.5, 1.5);
    VortexConfiguration c;
    for (int j = 0; j < 4; ++j) {
      const double s = (rng() & 1) ? 1.0 : -1.0;
      c.intensities.push_back(s * mag(rng));
      c.positions.push_back(cplx{pos(rng), pos(rng)});
    }
    const auto res = integrate(c, 0.0, 1.0, FieldSpec::zero(), icfg);
    if (res.reason != StopReason::reached_end)
      return {false, strf("plane run (seed %u) stopped early: %s", seed,
                          to_string(res.reason))};
    double h0 = 0.0, i0 = 0.0, c0 = 0.0;
    for (std::size_t i = 0; i < res.trajectory.nodes(); ++i) {
      const VortexConfiguration cf{res.trajectory.intensities,
                                   res.trajectory.positions[i]};
      const double h = hamiltonian(cf);
      const double I = moment_of_inertia(cf);
      const double C2 = std::norm(center_of_vorticity(cf));
      if (i == 0) {
        h0 = h;
        i0 = I;
        c0 = C2;
        continue;
      }
      worst_plane = std::max(
          {worst_plane, std::abs(h - h0) / std::max(1.0, std::abs(h0)),
           std::abs(I - i0) / std::max(1.0, std::abs(i0)),
           std::abs(C2 - c0) / std::max(1.0, std::abs(c0))});
    }
  }

  double worst_disk = 0.0;
  for (unsigned seed : {21u, 22u}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * pi), rad(0.1, 0.6),
        mag(0.5, 1.5);
    VortexConfiguration c;
    for (int j = 0; j < 3; ++j) {
      const double s = (rng() & 1) ? 1.0 : -1.0;
      c.intensities.push_back(s * mag(rng));
      const double r = rad(rng), th = ang(rng);
      c.positions.push_back(r * cplx{std::cos(th), std::sin(th)});
    }
    const auto res = integrate(c, 0.0, 1.0, FieldSpec::zero(), icfg, Domain::disk);
    if (res.reason != StopReason::reached_end)
      return {false, strf("disk run (seed %u) stopped early: %s", seed,
                          to_string(res.reason))};
    double h0 = 0.0;
    for (std::size_t i = 0; i < res.trajectory.nodes(); ++i) {
      const VortexConfiguration cf{res.trajectory.intensities,
                                   res.trajectory.positions[i]};
      const double h = disk_hamiltonian(cf);
      if (i == 0) {
        h0 = h;
        continue;
      }
      worst_disk =
          std::max(worst_disk, std::abs(h - h0) / std::max(1.0, std::abs(h0)));
    }
  }
  return {worst_plane <= 1e-8 && worst_disk <= 1e-7,
          strf("plane {H, I, |C|^2} drift %.3e over unit time at tol 1e-10 "
               "(3 random 4-vortex runs, tol 1e-8); disk H drift %.3e "
               "(2 runs, tol 1e-7)", worst_plane, worst_disk)};
}

// ---------------------------------------------------------------------------
// 7. Burst inside a three-vortex background
// ---------------------------------------------------------------------------

BackgroundSpec distant_triangle() {
  BackgroundSpec bg;
  bg.zetas = {0.5, -0.3, 0.8};
  for (int m = 0; m < 3; ++m) {
    const double th = 2.0 * pi * m / 3.0;
    bg.y0.push_back(6.0 * cplx{std::cos(th), std::sin(th)});
  }
  return bg;
}

Outcome criterion_embedded_burst() {
  NBurstConfig cfg;
  cfg.gamma.T = 1e-2;
  const auto ns = solve_nburst(1.0, cplx{0.0, 0.0}, distant_triangle(), cfg);
  if (!ns.converged)
    return {false, strf("solve did not converge: %s", ns.note.c_str())};

  double hmin = 1e300, hmax = -1e300, imin = 1e300, imax = -1e300;
  for (int k = 0; k <= 60; ++k) {
    const double t = std::min(ns.T, (ns.T / 100.0) * std::pow(100.0, k / 60.0));
    const auto cf = ns.combined_at(t);
    const double h = hamiltonian(cf), I = moment_of_inertia(cf);
    hmin = std::min(hmin, h);
    hmax = std::max(hmax, h);
    imin = std::min(imin, I);
    imax = std::max(imax, I);
  }
  const double rel_h = (hmax - hmin) / std::abs(0.5 * (hmax + hmin));
  const double rel_i = (imax - imin) / std::abs(0.5 * (imax + imin));

  const auto& p = ns.burst.params;
  const double tmin = ns.T / 100.0;
  const auto z = ns.children(tmin);
  double worst_frac = 0.0;
  for (int j = 0; j < 3; ++j)
    worst_frac = std::max(
        worst_frac, std::abs(z[j]) / (2.0 * std::abs(p.positions[j]) *
                                      std::sqrt(2.0 * p.a * tmin)));
  return {rel_h <= 1e-6 && rel_i <= 1e-6 && worst_frac <= 1.0,
          strf("converged (T = %g); full-system relative variation on "
               "(T/100, T]: H %.2e, I %.2e (tol 1e-6); |z_j(T/100)| at most "
               "%.3f of the allowed 2|a_j|sqrt(2a t) radius", ns.T, rel_h,
               rel_i, worst_frac)};
}

// ---------------------------------------------------------------------------
// 8. Energy jump at the burst
// ---------------------------------------------------------------------------

Outcome criterion_energy_jump() {
  // Pinned reference: jump equals (xi^2/9)(log 3 + log 21 - 2 log 12).
  const double pinned =
      (std::log(3.0) + std::log(21.0) - 2.0 * std::log(12.0)) / 9.0;
  const double tol = 1e-4;

  BurstScenario free_sc;
  free_sc.intensity = 1.0;
  free_sc.config.gamma.T = 1e-2;
  const auto free_res = build_burst(free_sc);
  if (!free_res.converged) return {false, "free burst did not converge"};
  const double jump0 = energy_ledger(free_res.trajectory).entries[0].jump;

  BurstScenario embedded_sc = free_sc;
  const auto bg = distant_triangle();
  embedded_sc.zetas = bg.zetas;
  embedded_sc.y0 = bg.y0;
  const auto emb_res = build_burst(embedded_sc);
  if (!emb_res.converged) return {false, "embedded burst did not converge"};
  const double jump3 = energy_ledger(emb_res.trajectory).entries[0].jump;

  BurstScenario rev_sc = free_sc;
  rev_sc.reversed = true;
  const auto rev_res = build_burst(rev_sc);
  if (!rev_res.converged) return {false, "reversed burst did not converge"};
  const double jump_rev = energy_ledger(rev_res.trajectory).entries[0].jump;

  const bool sub_vals =
      std::abs(jump0 - pinned) <= tol && std::abs(jump3 - pinned) <= tol;
  const bool sub_rev = std::abs(jump_rev + jump0) <= 1e-9;
  return {sub_vals && sub_rev,
          strf("measured jump %.10f (free) and %.10f (3-vortex background) "
               "vs pinned %.10f, tol 1e-4; measured*pi differs from pinned "
               "by %.1e; reversed run jump %.10f (opposite to %.1e)", jump0,
               jump3, pinned, std::abs(jump0 * pi - pinned),
               jump_rev, std::abs(jump_rev + jump0))};
}

// ---------------------------------------------------------------------------
// 9. Weak-residual certification
// ---------------------------------------------------------------------------

Outcome criterion_weak_certification() {
  const double tol = 1e-5;
  const double budget_each = 120.0;

  auto t0 = clk::now();
  BurstScenario burst_sc;
  burst_sc.intensity = 1.0;
  burst_sc.config.gamma.T = 1e-2;
  const auto burst = build_burst(burst_sc);
  if (!burst.converged) return {false, "burst did not converge"};
  const auto cert_b = certify_weak(burst.trajectory, burst.trajectory.t_front(),
                                   burst.trajectory.t_back());
  const double sec_b = seconds_since(t0);

  t0 = clk::now();
  BurstScenario col_sc = burst_sc;
  col_sc.reversed = true;
  const auto collapse = build_burst(col_sc);
  if (!collapse.converged) return {false, "collapse did not converge"};
  if (collapse.trajectory.events.empty() ||
      collapse.trajectory.events[0].kind != Event::Kind::merge)
    return {false, "collapse trajectory lacks a merge event"};
  const auto cert_c =
      certify_weak(collapse.trajectory, collapse.trajectory.t_front(),
                   collapse.trajectory.t_back());
  const double sec_c = seconds_since(t0);

  t0 = clk::now();
  MarkovScenario msc;
  msc.initial.intensities = {1.0, 0.8};
  msc.initial.positions = {cplx{-2.0, 0.0}, cplx{2.0, 0.0}};
  msc.lambda = 2.0;
  msc.horizon = 1.0;
  msc.seed = 7;
  msc.burst_T = 1e-2;
  const auto rec = sample(msc, 0);
  if (!rec.complete)
    return {false, strf("chain sample truncated: %s", rec.failure.c_str())};
  const auto cert_m = certify_weak(rec.trajectory, rec.trajectory.t_front(),
                                   rec.trajectory.t_back());
  const double sec_m = seconds_since(t0);

  const bool pass = cert_b.max_rel <= tol && cert_c.max_rel <= tol &&
                    cert_m.max_rel <= tol && sec_b < budget_each &&
                    sec_c < budget_each && sec_m < budget_each;
  return {pass,
          strf("12-function battery, relative residuals: burst %.2e (%.1fs), "
               "collapse-and-merge %.2e (%.1fs), chain sample with %zu "
               "burst(s) %.2e (%.1fs); tolerance 1e-5, budget 120s each",
               cert_b.max_rel, sec_b, cert_c.max_rel, sec_c,
               rec.jump_times.size(), cert_m.max_rel, sec_m)};
}

// ---------------------------------------------------------------------------
// 10. Burst in the unit disk
// ---------------------------------------------------------------------------

Outcome criterion_disk_burst() {
  NBurstConfig cfg;
  cfg.gamma.T = 1e-2;
  const auto ds = solve_disk_burst(1.0, cplx{0.0, 0.0}, cfg);
  if (!ds.converged)
    return {false, strf("solve did not converge: %s", ds.note.c_str())};

  // Center of vorticity grows at most linearly: c_emp = max |C(t)| / t.
  double c_emp = 0.0;
  for (double t : ds.burst.curve.t) {
    if (t > ds.T) break;
    c_emp = std::max(
        c_emp, std::abs(center_of_vorticity(ds.config_at(t))) / t);
  }

  // The Green-function regular part is harmonic inside the disk
  // (mean-value property) and cancels the singular part on the boundary.
  const auto conf = ds.config_at(ds.T / 2.0);
  double worst_mv = 0.0, worst_bd = 0.0, worst_pen = 0.0;
  for (const cplx x0 : {cplx{0.2, 0.1}, cplx{-0.4, 0.3}, cplx{0.1, -0.5}}) {
    const double r = 0.4 * (1.0 - std::abs(x0));
    for (const cplx y : conf.positions) {
      double avg = 0.0;
      const int m = 512;
      for (int i = 0; i < m; ++i) {
        const double th = 2.0 * pi * i / m;
        avg += disk_gamma(x0 + r * cplx{std::cos(th), std::sin(th)}, y);
      }
      worst_mv = std::max(worst_mv, std::abs(avg / m - disk_gamma(x0, y)));
    }
  }
  for (int i = 0; i < 64; ++i) {
    const double th = 2.0 * pi * (i + 0.5) / 64.0;
    const cplx x{std::cos(th), std::sin(th)};
    for (const cplx y : conf.positions)
      worst_bd = std::max(
          worst_bd,
          std::abs(-std::log(std::abs(x - y)) / (2.0 * pi) + disk_gamma(x, y)));
    // No flux through the wall: normal component of the constructed field.
    cplx W{0.0, 0.0};
    for (std::size_t k = 0; k < conf.size(); ++k)
      W += conf.intensities[k] / (x - conf.positions[k]);
    W *= cplx{0.0, -1.0 / (2.0 * pi)};
    W += disk_image_field(conf, x);
    worst_pen = std::max(worst_pen, std::abs(std::real(W * x)));
  }
  const bool pass = std::isfinite(c_emp) && c_emp <= 1.0 && worst_mv <= 1e-6 &&
                    worst_bd <= 1e-12 && worst_pen <= 1e-12;
  return {pass,
          strf("converged (T = %g, fixed-point residual %.1e); |C(t)| <= "
               "%.3e * t on (0, T]; harmonicity (mean-value) residual %.2e "
               "(tol 1e-6); boundary identity %.2e and wall-normal flow "
               "%.2e (tol 1e-12)", ds.T, ds.outer_residual, c_emp, worst_mv,
               worst_bd, worst_pen)};
}

// ---------------------------------------------------------------------------
// 11. Ensemble of the stochastic chain
// ---------------------------------------------------------------------------

Outcome criterion_markov_ensemble() {
  MarkovScenario sc;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 5; ++j) {
      sc.initial.intensities.push_back(1.0);
      sc.initial.positions.push_back(cplx{-14.0 + 4.0 * i, -8.0 + 4.0 * j});
    }
  sc.lambda = 2.0;
  sc.horizon = 1.0;
  sc.seed = 2026;
  sc.burst_T = 1e-2;

  const std::size_t n = 1000;
  // Mean burst count over the ensemble: arrivals of the driving Poisson
  // clock in [0, horizon] (every arrival bursts, possibly deferred past a
  // running construction window), so the target is lambda * horizon = 2
  // within 3 sqrt(2/1000) ~ 0.134.
  const double band = 0.134;
  std::size_t arrivals = 0, completed = 0, certified = 0;
  double worst_weak = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const SampleRecord rec = sample(sc, k);
    arrivals += rec.arrival_count;
    if (!rec.complete) continue;
    ++completed;
    const auto cert = certify_weak(rec.trajectory, rec.trajectory.t_front(),
                                   rec.trajectory.t_back());
    worst_weak = std::max(worst_weak, cert.max_rel);
    if (cert.max_rel <= 1e-5) ++certified;
  }
  const double mean = double(arrivals) / double(n);
  const KSReport ks = ks_exponential(first_arrival_waits(sc, 10000), sc.lambda);
  const bool pass = std::abs(mean - 2.0) <= band && ks.pass &&
                    certified == completed && completed > 0;
  return {pass,
          strf("mean burst count %.4f (target 2 +- %.3f); inter-arrival KS "
               "statistic %.4f vs 1%% critical %.4f; %zu/%zu samples "
               "complete, every one weak-certified (%zu, worst residual "
               "%.2e)", mean, band, ks.statistic, ks.critical, completed, n,
               certified, worst_weak)};
}

// ---------------------------------------------------------------------------
// 12. Brute-force oracles
// ---------------------------------------------------------------------------

/// Independent re-implementation of the pair functional: fresh gradient
/// evaluations per pair, no caching, same ascending iteration order.
double diamond_reference(const TestFunction& phi, const VortexConfiguration& c) {
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j)
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k == j) continue;
      const cplx x = c.positions[j], y = c.positions[k];
      const cplx d = x - y;
      if (d == cplx{0.0, 0.0}) continue;
      const cplx kernel = cplx{0.0, 1.0} / (2.0 * pi * std::conj(d));
      const cplx g = phi.grad(x) - phi.grad(y);
      s += c.intensities[j] * c.intensities[k] * 0.5 *
           std::real(std::conj(g) * kernel);
    }
  return s;
}

Outcome criterion_bruteforce_oracles() {
  std::mt19937_64 rng(4242u);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), mag(0.2, 1.5),
      radius(0.3, 2.5);
  std::uniform_int_distribution<int> count(2, 6);

  std::size_t mismatches = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    VortexConfiguration c;
    const int nv = count(rng);
    for (int j = 0; j < nv; ++j) {
      const double s = (rng() & 1) ? 1.0 : -1.0;
      c.intensities.push_back(s * mag(rng));
      c.positions.push_back(cplx{pos(rng), pos(rng)});
    }
    const TestFunction phi =
        make_test_function(cplx{pos(rng), pos(rng)}, radius(rng));
    if (diamond(phi, c) != diamond_reference(phi, c)) ++mismatches;
  }

  // Transformed field against a finite-difference pushforward of the
  // Cartesian right-hand side (one Richardson level on central differences).
  const auto ctx = make_context(params_for(1.0));
  const FieldSpec fields[] = {
      FieldSpec::zero(), FieldSpec::affine(cplx{0.02, 0.01}, cplx{-0.06, 0.04})};
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst_rel = 0.0;
  for (const auto& f : fields)
    for (int rep = 0; rep < 25; ++rep) {
      const double t = std::pow(10.0, -4.0 + 3.0 * (rep % 5) / 4.0);
      TransformedState s;
      s.zeta = 2.0 * ctx.p.a * t * (1.0 + 0.2 * uni(rng));
      s.eta = 0.3 * uni(rng);
      s.x2 = 0.05 * t * cplx{uni(rng), uni(rng)};
      s.x3 = 0.05 * t * cplx{uni(rng), uni(rng)};

      const auto z = phi_inv(ctx, t, s);
      VortexConfiguration conf;
      conf.intensities = {ctx.p.intensities[0], ctx.p.intensities[1],
                          ctx.p.intensities[2]};
      conf.positions = {z[0], z[1], z[2]};
      const auto vel = rhs_free(conf);

      const auto push = [&](double h) {
        std::array<cplx, 3> zp, zm;
        for (int j = 0; j < 3; ++j) {
          const cplx v = vel[j] + std::conj(f(t, z[j]));
          zp[j] = z[j] + h * v;
          zm[j] = z[j] - h * v;
        }
        const auto sp = phi(ctx, t + h, zp, s.eta);
        const auto sm = phi(ctx, t - h, zm, s.eta);
        return std::array<cplx, 4>{
            cplx{(sp.zeta - sm.zeta) / (2.0 * h), 0.0},
            cplx{(sp.eta - sm.eta) / (2.0 * h), 0.0},
            (sp.x2 - sm.x2) / (2.0 * h), (sp.x3 - sm.x3) / (2.0 * h)};
      };
      const double h = 3e-4 * t;
      const auto d1 = push(h);
      const auto d2 = push(0.5 * h);
      std::array<cplx, 4> d;
      for (int m = 0; m < 4; ++m) d[m] = (4.0 * d2[m] - d1[m]) / 3.0;

      const auto v = rtx_field(ctx, t, s, f);
      const double scale =
          std::max({std::abs(v.dzeta), std::abs(v.deta) * t, std::abs(v.dx2),
                    std::abs(v.dx3), 1e-6});
      worst_rel = std::max(
          {worst_rel, std::abs(d[0].real() - v.dzeta) / scale,
           std::abs(d[1].real() - v.deta) * t / scale,
           std::abs(d[2] - v.dx2) / scale, std::abs(d[3] - v.dx3) / scale});
    }
  return {mismatches == 0 && worst_rel <= 1e-6,
          strf("pair functional: %zu/1000 random configurations differ from "
               "the independent re-implementation (exact comparison); "
               "transformed field vs finite-difference pushforward: worst "
               "relative error %.2e (tol 1e-6)", mismatches, worst_rel)};
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  Outcome (*fn)();
  double budget;  // wall-clock seconds
};

const Criterion kCriteria[] = {
    {1, "selfsimilar_exactness", criterion_selfsimilar_exactness, 1.0},
    {2, "linearization_algebra", criterion_linearization_algebra, 1.0},
    {3, "burst_triple_invariants", criterion_burst_triple_invariants, 1.0},
    {4, "fixed_point_recovery", criterion_fixed_point_recovery, 30.0},
    {5, "field_sensitivity", criterion_field_sensitivity, 120.0},
    {6, "conservation", criterion_conservation, 30.0},
    {7, "embedded_burst", criterion_embedded_burst, 120.0},
    {8, "energy_jump", criterion_energy_jump, 120.0},
    {9, "weak_certification", criterion_weak_certification, 360.0},
    {10, "disk_burst", criterion_disk_burst, 120.0},
    {11, "markov_ensemble", criterion_markov_ensemble, 600.0},
    {12, "bruteforce_oracles", criterion_bruteforce_oracles, 60.0},
};

}  // namespace

int main(int argc, char** argv) {
  int want = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      want = std::atoi(argv[++i]);
      if (want < 1 || want > 12) {
        std::fprintf(stderr, "acceptance: --criterion must be 1..12\n");
        return 64;
      }
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion k]\n");
      return 64;
    }
  }

  int failures = 0;
  for (const Criterion& c : kCriteria) {
    if (want != 0 && c.id != want) continue;
    const auto t0 = clk::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out = {false, strf("exception: %s", e.what())};
    }
    const double sec = seconds_since(t0);
    const bool in_budget = sec <= c.budget;
    const bool pass = out.pass && in_budget;
    std::printf("[%2d] %s %s (%s; %.1fs%s)\n", c.id, pass ? "PASS" : "FAIL",
                c.name, out.detail.c_str(), sec,
                in_budget ? "" : strf(", over the %.0fs budget", c.budget).c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures;
}
