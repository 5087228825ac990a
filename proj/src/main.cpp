// pvortex: command-line driver for singular point-vortex constructions.
//
//   pvortex selfsimilar --xi <v> [--check]     self-similar burst family data
//   pvortex burst <scenario.json>              construct a burst trajectory
//   pvortex collapse <scenario.json>           construct a collapse trajectory
//   pvortex simulate <scenario.json>           integrate a configuration
//   pvortex markov <scenario.json> --samples n sample the burst point process
//   pvortex verify <file.pvtraj>               certify a stored trajectory
//   pvortex export <file.pvtraj> --format f    re-emit as table | plotdata
//
// Every command is deterministic: identical inputs produce identical outputs.
// Exit status is 0 on success; failures exit nonzero and name the failing
// invariant or construction step on stdout.

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vortex/core.hpp"
#include "vortex/markov.hpp"
#include "vortex/scenario.hpp"
#include "vortex/selfsimilar.hpp"
#include "vortex/trajectory_io.hpp"
#include "vortex/verify.hpp"

namespace {

using namespace vortex;

std::string g17(double x) { return detail::fmt17(x); }

std::string cpx(vortex::cplx z) {
  return "(" + g17(z.real()) + ", " + g17(z.imag()) + ")";
}

/// Default output path: replace the scenario extension with .pvtraj.
std::string default_out(const std::string& scenario_path) {
  const std::size_t slash = scenario_path.find_last_of('/');
  const std::size_t dot = scenario_path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return scenario_path + ".pvtraj";
  return scenario_path.substr(0, dot) + ".pvtraj";
}

// ---------------------------------------------------------------------------
// selfsimilar
// ---------------------------------------------------------------------------

int cmd_selfsimilar(double xi, bool check) {
  const SelfSimilarParams p = params_for(xi);
  std::cout << "self-similar burst family, xi = " << g17(xi) << "\n";
  std::cout << "  intensities   " << g17(p.intensities[0]) << " "
            << g17(p.intensities[1]) << " " << g17(p.intensities[2]) << "\n";
  std::cout << "  shape         a1 = " << cpx(p.positions[0])
            << "  a2 = " << cpx(p.positions[1]) << "  a3 = " << cpx(p.positions[2])
            << "\n";
  std::cout << "  rates         a = " << g17(p.a) << "  b = " << g17(p.b) << "\n";
  std::cout << "  |a_jk|^2      " << g17(std::norm(p.positions[0] - p.positions[1]))
            << " " << g17(std::norm(p.positions[0] - p.positions[2])) << " "
            << g17(std::norm(p.positions[1] - p.positions[2])) << "\n";

  // Exact-solution residual of the vortex ODE at 50 log-spaced times.
  double worst_ode = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double t = std::pow(10.0, -6.0 + 6.0 * i / 49.0);
    const VortexConfiguration c = similarity_configuration(p, t);
    const std::vector<cplx> v = rhs_free(c);
    const cplx zdot_over_z = cplx{p.a, p.b} / (2.0 * p.a * t);
    const cplx Z = z_of_t(p, t);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < 3; ++j) {
      const cplx exact = p.positions[j] * Z * zdot_over_z;
      num = std::max(num, std::abs(v[j] - exact));
      den = std::max(den, std::abs(exact));
    }
    worst_ode = std::max(worst_ode, num / den);
  }
  std::cout << "  ode residual  " << g17(worst_ode)
            << "  (relative, 50 log-spaced t in [1e-6, 1])\n";

  const double alg = asrelation_residual(p);
  std::cout << "  algebraic     " << g17(alg) << "  (self-similarity system)\n";

  const VortexConfiguration c0 = similarity_configuration(p, 1.0);
  double pair_sum = 0.0;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      if (j != k) pair_sum += p.intensities[j] * p.intensities[k];
  const double inertia = moment_of_inertia(c0) / std::norm(z_of_t(p, 1.0));
  const cplx center = center_of_vorticity(c0) / z_of_t(p, 1.0);
  std::cout << "  degeneracies  sum_{j!=k} xi_j xi_k = " << g17(pair_sum)
            << "   I/|Z|^2 = " << g17(inertia) << "   C/Z = " << cpx(center)
            << "\n";

  const LMatrix L = build_L(p);
  const auto eig = eigenvalues(L);
  std::cout << "  spectrum     ";
  for (const cplx& ev : eig) std::cout << " " << cpx(ev);
  std::cout << "\n";
  const auto [d1, d2] = eigen_discriminants(L);
  std::cout << "  discriminants d1 = " << g17(d1) << "  d2 = " << g17(d2) << "\n";
  std::cout << "  note: documented reference values 3.4463e-4 xi^2 and "
               "2.7035e-9 xi^4\n"
            << "        differ from the measured discriminants of this "
               "spectrum; the\n"
            << "        spectrum itself is pinned by the first integrals "
               "(0, -2a, -a+-ib)\n"
            << "        and is verified exactly.\n";

  if (!check) return 0;

  int failures = 0;
  auto gate = [&](bool ok, const std::string& name, double measured) {
    std::cout << (ok ? "  [ok]   " : "  [FAIL] ") << name << " = " << g17(measured)
              << "\n";
    if (!ok) ++failures;
  };
  gate(worst_ode <= 1e-10, "ode residual", worst_ode);
  gate(alg <= 1e-12, "algebraic residual", alg);
  const double xisq = xi * xi;
  gate(std::abs(pair_sum) <= 1e-12 * xisq, "pair-sum degeneracy", pair_sum);
  gate(std::abs(inertia) <= 1e-12 * xisq, "moment of inertia", inertia);
  gate(std::abs(center) <= 1e-12 * xisq, "center of vorticity", std::abs(center));
  // Spectrum: {0, -2a, -a +- ib} up to ordering.
  double spec_err = 0.0;
  std::vector<cplx> want{cplx{0.0, 0.0}, cplx{-2.0 * p.a, 0.0},
                         cplx{-p.a, p.b}, cplx{-p.a, -p.b}};
  std::vector<bool> used(4, false);
  for (const cplx& ev : eig) {
    double best = 1e300;
    int arg = -1;
    for (int i = 0; i < 4; ++i)
      if (!used[i] && std::abs(ev - want[i]) < best) {
        best = std::abs(ev - want[i]);
        arg = i;
      }
    used[arg] = true;
    spec_err = std::max(spec_err, best);
  }
  gate(spec_err <= 1e-9 * p.a, "spectrum error", spec_err);

  if (failures > 0) {
    std::cout << "selfsimilar check failed: " << failures << " invariant(s)\n";
    return 1;
  }
  std::cout << "selfsimilar check passed\n";
  return 0;
}

// ---------------------------------------------------------------------------
// burst / collapse / simulate
// ---------------------------------------------------------------------------

int cmd_burst(const std::string& path, std::string out_path, bool want_collapse) {
  const Scenario sc = load_scenario_file(path);
  const Scenario::Kind want = want_collapse ? Scenario::Kind::collapse
                                            : Scenario::Kind::burst;
  if (sc.kind != want) {
    std::cout << "error: scenario kind is '" << to_string(sc.kind)
              << "', expected '" << to_string(want) << "'\n";
    return 1;
  }
  BurstBuildResult res = build_burst(sc.burst);
  std::cout << (want_collapse ? "collapse" : "burst") << " at " << cpx(sc.burst.at)
            << ", intensity " << g17(sc.burst.intensity) << "\n";
  std::cout << "  horizon T     " << g17(res.T) << "\n";
  if (res.rho > 0.0)
    std::cout << "  cut-off rho   " << g17(res.rho) << "  t* bound "
              << g17(res.tstar) << "\n";
  std::cout << "  residuals     gamma " << g17(res.gamma_residual) << "  outer "
            << g17(res.outer_residual) << "  (" << res.outer_iterations
            << " outer sweeps)\n";
  if (!res.converged) {
    std::cout << "burst construction failed: "
              << (res.note.empty() ? "did not converge" : res.note) << "\n";
    return 2;
  }
  if (out_path.empty()) out_path = default_out(path);
  write_pvtraj_file(out_path, res.trajectory, res.forced, sc.burst.domain);
  std::cout << "  events        " << res.trajectory.events.size() << ", segments "
            << res.trajectory.segments.size() << ", span ["
            << g17(res.trajectory.t_front()) << ", " << g17(res.trajectory.t_back())
            << "]\n";
  std::cout << "  wrote         " << out_path << "\n";
  return 0;
}

int cmd_simulate(const std::string& path, std::string out_path) {
  const Scenario sc = load_scenario_file(path);
  if (sc.kind != Scenario::Kind::simulate) {
    std::cout << "error: scenario kind is '" << to_string(sc.kind)
              << "', expected 'simulate'\n";
    return 1;
  }
  SimulateBuildResult res = build_simulation(sc.run);
  std::cout << "simulate " << sc.run.vortices.size() << " vortices over ["
            << g17(sc.run.t0) << ", " << g17(sc.run.t1) << "]\n";
  std::cout << "  events        " << res.trajectory.events.size() << " (";
  std::size_t n_merge = 0;
  for (const Event& ev : res.trajectory.events)
    if (ev.kind == Event::Kind::merge) ++n_merge;
  std::cout << n_merge << " merges)\n";
  if (out_path.empty()) out_path = default_out(path);
  write_pvtraj_file(out_path, res.trajectory, res.forced, sc.run.domain);
  std::cout << "  wrote         " << out_path << "\n";
  if (!res.completed) {
    std::cout << "simulation stopped early: " << res.note << "\n";
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// markov
// ---------------------------------------------------------------------------

int cmd_markov(const std::string& path, int samples, long long pick,
               std::string out_path) {
  const Scenario sc = load_scenario_file(path);
  if (sc.kind != Scenario::Kind::markov) {
    std::cout << "error: scenario kind is '" << to_string(sc.kind)
              << "', expected 'markov'\n";
    return 1;
  }
  if (samples < 1) {
    std::cout << "error: --samples must be at least 1\n";
    return 1;
  }
  if (pick >= samples) {
    std::cout << "error: --sample index out of range\n";
    return 1;
  }
  if (pick >= 0 && out_path.empty()) {
    std::cout << "error: --sample requires --out\n";
    return 1;
  }
  std::cout << "markov burst process: lambda = " << g17(sc.markov.lambda)
            << ", horizon = " << g17(sc.markov.horizon) << ", seed = "
            << sc.markov.seed << ", samples = " << samples << "\n";

  std::size_t completed = 0, total_bursts = 0, total_deferrals = 0;
  for (int k = 0; k < samples; ++k) {
    SampleRecord rec = sample(sc.markov, static_cast<std::uint64_t>(k));
    completed += rec.complete ? 1 : 0;
    total_bursts += rec.jump_times.size();
    total_deferrals += rec.deferrals;
    std::cout << "  sample " << k << ": " << rec.jump_times.size() << " bursts, "
              << rec.deferrals << " deferred, "
              << (rec.complete ? "complete" : ("truncated (" + rec.failure + ")"))
              << "\n";
    if (pick == k && !out_path.empty()) {
      write_pvtraj_file(out_path, rec.trajectory, false, Domain::plane);
      std::cout << "    wrote " << out_path << "\n";
    }
  }
  std::cout << "  completed     " << completed << "/" << samples << "\n";
  std::cout << "  mean bursts   "
            << g17(static_cast<double>(total_bursts) / samples) << "\n";
  std::cout << "  deferrals     " << total_deferrals << "\n";

  // Distributional diagnostic on the arrival stream itself.
  const KSReport ks = ks_exponential(first_arrival_waits(sc.markov, 10000),
                                     sc.markov.lambda);
  std::cout << "  KS (first waits, n=10000)  statistic " << g17(ks.statistic)
            << "  critical(1%) " << g17(ks.critical)
            << (ks.pass ? "  [consistent]" : "  [REJECTED]") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify / export
// ---------------------------------------------------------------------------

int cmd_verify(const std::string& path, const VerifyOptions& opt) {
  const PvtrajFile f = read_pvtraj_file(path);
  const VerifyReport rep = verify_trajectory(f.trajectory, f.forced, f.domain, opt);
  std::cout << "verify " << path << " (" << f.trajectory.segments.size()
            << " segments, " << f.trajectory.events.size() << " events, "
            << (f.domain == Domain::disk ? "disk" : "plane")
            << (f.forced ? ", forced" : "") << ")\n";
  std::cout << "  structure     ok\n";
  if (rep.drift_checked)
    std::cout << "  invariants    max scaled drift " << g17(rep.max_drift)
              << "  (tol " << g17(opt.drift_tol) << ")\n";
  if (rep.weak_checked)
    std::cout << "  weak battery  " << rep.weak.reports.size()
              << " test functions, max relative residual "
              << g17(rep.weak.max_rel) << "  (tol " << g17(opt.weak_tol) << ")\n";
  if (rep.ledger_checked) {
    for (const LedgerEntry& e : rep.ledger.entries)
      std::cout << "  ledger        t " << g17(e.t) << "  "
                << to_string(e.kind) << "  jump " << g17(e.jump) << "  expected "
                << g17(e.expected) << "  mismatch " << g17(e.mismatch) << "\n";
    std::cout << "  ledger total  " << g17(rep.ledger.total_jump) << "\n";
  }
  for (const std::string& n : rep.notes) std::cout << "  note: " << n << "\n";
  if (!rep.passed()) {
    for (const std::string& fmsg : rep.failures)
      std::cout << "  FAIL: " << fmsg << "\n";
    std::cout << "verification failed: " << rep.failures.front() << "\n";
    return 4;
  }
  std::cout << "verification passed\n";
  return 0;
}

int cmd_export(const std::string& path, const std::string& format,
               const std::string& out_path) {
  const PvtrajFile f = read_pvtraj_file(path);
  std::ofstream file_os;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    file_os.open(out_path);
    if (!file_os) {
      std::cout << "error: cannot open '" << out_path << "' for writing\n";
      return 1;
    }
    os = &file_os;
  }
  if (format == "table")
    export_table(*os, f.trajectory);
  else
    export_plotdata(*os, f.trajectory);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"singular point-vortex constructions: bursts, collapses, "
               "weak-solution certification"};
  app.require_subcommand(1);

  // selfsimilar
  double xi = 1.0;
  bool check = false;
  CLI::App* s_self = app.add_subcommand(
      "selfsimilar", "print the self-similar burst family for a given intensity");
  s_self->add_option("--xi", xi, "parent intensity (nonzero)")->required();
  s_self->add_flag("--check", check, "verify the family invariants; exit nonzero on failure");

  // burst / collapse / simulate
  std::string b_path, b_out;
  CLI::App* s_burst = app.add_subcommand("burst", "construct a burst trajectory");
  s_burst->add_option("scenario", b_path, "scenario file (JSON)")->required();
  s_burst->add_option("--out", b_out, "output trajectory path (.pvtraj)");

  std::string c_path, c_out;
  CLI::App* s_coll = app.add_subcommand("collapse", "construct a collapse trajectory");
  s_coll->add_option("scenario", c_path, "scenario file (JSON)")->required();
  s_coll->add_option("--out", c_out, "output trajectory path (.pvtraj)");

  std::string m_path, m_out;
  CLI::App* s_sim = app.add_subcommand("simulate", "integrate a vortex configuration");
  s_sim->add_option("scenario", m_path, "scenario file (JSON)")->required();
  s_sim->add_option("--out", m_out, "output trajectory path (.pvtraj)");

  // markov
  std::string k_path, k_out;
  int k_samples = 1;
  long long k_pick = -1;
  CLI::App* s_mark = app.add_subcommand("markov", "sample the Markov burst process");
  s_mark->add_option("scenario", k_path, "scenario file (JSON)")->required();
  s_mark->add_option("--samples", k_samples, "number of independent samples");
  s_mark->add_option("--sample", k_pick, "index of the sample to write with --out");
  s_mark->add_option("--out", k_out, "output trajectory path for --sample");

  // verify
  std::string v_path;
  VerifyOptions vopt;
  CLI::App* s_ver = app.add_subcommand("verify", "certify a stored trajectory");
  s_ver->add_option("trajectory", v_path, "trajectory file (.pvtraj)")->required();
  s_ver->add_option("--drift-tol", vopt.drift_tol, "invariant drift tolerance");
  s_ver->add_option("--weak-tol", vopt.weak_tol, "weak residual tolerance");
  s_ver->add_option("--ledger-tol", vopt.ledger_tol, "energy jump tolerance (per xi^2)");

  // export
  std::string e_path, e_format, e_out;
  CLI::App* s_exp = app.add_subcommand("export", "re-emit a trajectory file");
  s_exp->add_option("trajectory", e_path, "trajectory file (.pvtraj)")->required();
  s_exp->add_option("--format", e_format, "output format")
      ->required()
      ->check(CLI::IsMember({"table", "plotdata"}));
  s_exp->add_option("--out", e_out, "output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (s_self->parsed()) return cmd_selfsimilar(xi, check);
    if (s_burst->parsed()) return cmd_burst(b_path, b_out, false);
    if (s_coll->parsed()) return cmd_burst(c_path, c_out, true);
    if (s_sim->parsed()) return cmd_simulate(m_path, m_out);
    if (s_mark->parsed()) return cmd_markov(k_path, k_samples, k_pick, k_out);
    if (s_ver->parsed()) return cmd_verify(v_path, vopt);
    if (s_exp->parsed()) return cmd_export(e_path, e_format, e_out);
  } catch (const std::exception& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
