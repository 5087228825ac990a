#pragma once
// Core types and first integrals of the planar point-vortex system.
//
// Conventions used throughout the library:
//   * A point z = x + iy in the plane is a std::complex<double>.
//   * The system of N vortices with intensities xi_j at positions z_j(t)
//     evolves by
//         conj(dz_j/dt) = (1/2*pi*i) * sum_{k != j} xi_k / (z_j - z_k),
//     i.e. the Biot-Savart kernel K(x) = (1/2pi) x^perp / |x|^2 written in
//     complex notation.  All right-hand-side helpers return dz_j/dt (the
//     velocity itself, after conjugation).
//   * External fields f(t,p) are additive on the *conjugated* side:
//         conj(dz_j/dt) = interaction + f(t, z_j),
//     so the velocity contribution of a field is conj(f(t, z_j)).

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace vortex {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi_v<double>;

/// N vortices: one intensity and one position per vortex.
struct VortexConfiguration {
  std::vector<double> intensities;
  std::vector<cplx> positions;

  std::size_t size() const { return intensities.size(); }

  void validate() const {
    if (intensities.size() != positions.size())
      throw std::invalid_argument("VortexConfiguration: size mismatch");
  }
};

/// Velocities dz_j/dt of the free (field-less) system.  Throws on exactly
/// coincident positions; near-coincidence is the caller's concern.
inline std::vector<cplx> rhs_free(const VortexConfiguration& c) {
  c.validate();
  const std::size_t n = c.size();
  std::vector<cplx> vel(n, cplx{0.0, 0.0});
  for (std::size_t j = 0; j < n; ++j) {
    cplx s{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      const cplx d = c.positions[j] - c.positions[k];
      if (d == cplx{0.0, 0.0})
        throw std::invalid_argument("rhs_free: coincident vortices " +
                                    std::to_string(j) + "," + std::to_string(k));
      s += c.intensities[k] / d;
    }
    // conj(dz/dt) = s / (2 pi i)  =>  dz/dt = (i/2pi) * conj(s).
    vel[j] = cplx{0.0, 1.0 / (2.0 * pi)} * std::conj(s);
  }
  return vel;
}

/// Interaction Hamiltonian H = -(1/2pi) sum_{j != k} xi_j xi_k log|z_j - z_k|
/// (ordered pairs, so each unordered pair counts twice).
inline double hamiltonian(const VortexConfiguration& c) {
  c.validate();
  double h = 0.0;
  const std::size_t n = c.size();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) {
      const double d = std::abs(c.positions[j] - c.positions[k]);
      if (d == 0.0) throw std::invalid_argument("hamiltonian: coincident vortices");
      h += c.intensities[j] * c.intensities[k] * std::log(d);
    }
  return -h / pi;  // twice the ordered-pair sum normalisation -(1/2pi)
}

/// Moment of inertia I = sum_{j != k} xi_j xi_k |z_j - z_k|^2.
inline double moment_of_inertia(const VortexConfiguration& c) {
  c.validate();
  double s = 0.0;
  const std::size_t n = c.size();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k)
      s += 2.0 * c.intensities[j] * c.intensities[k] *
           std::norm(c.positions[j] - c.positions[k]);
  return s;
}

/// Centre of vorticity C = sum_j xi_j z_j (conserved by the free flow).
inline cplx center_of_vorticity(const VortexConfiguration& c) {
  c.validate();
  cplx s{0.0, 0.0};
  for (std::size_t j = 0; j < c.size(); ++j) s += c.intensities[j] * c.positions[j];
  return s;
}

/// Necessary degeneracy for total collapse / singular burst of a group:
/// sum_{j != k} xi_j xi_k = 0 (with every intensity nonzero).  `scale` fixes
/// the comparison scale; pass e.g. max |xi_j|^2.
inline bool collapse_admissible(const std::vector<double>& xi,
                                double tol = 1e-12) {
  double sum = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) {
    if (xi[j] == 0.0) return false;
    scale = std::max(scale, xi[j] * xi[j]);
    for (std::size_t k = 0; k < xi.size(); ++k)
      if (k != j) sum += xi[j] * xi[k];
  }
  if (scale == 0.0) return false;
  return std::abs(sum) <= tol * scale;
}

/// Drift of the first integrals along a sampled trajectory, both absolute
/// and relative to the quantity's scale (max of |value|, 1e-30).
struct InvariantReport {
  double hamiltonian_drift = 0.0;   // max |H(t) - H(t0)|
  double inertia_drift = 0.0;       // max |I(t) - I(t0)|
  double center_drift = 0.0;        // max |C(t) - C(t0)|
  double hamiltonian_rel = 0.0;
  double inertia_rel = 0.0;
  double center_rel = 0.0;          // drift of |C|^2 relative scale
};

/// Evaluate invariant drift over a list of configurations sharing one
/// intensity vector (a sampled trajectory segment).
inline InvariantReport invariant_report(const std::vector<VortexConfiguration>& samples) {
  InvariantReport r;
  if (samples.empty()) return r;
  const double h0 = hamiltonian(samples.front());
  const double i0 = moment_of_inertia(samples.front());
  const cplx c0 = center_of_vorticity(samples.front());
  double hs = std::abs(h0), is = std::abs(i0), cs = std::abs(c0);
  for (const auto& c : samples) {
    const double h = hamiltonian(c);
    const double i = moment_of_inertia(c);
    const cplx cv = center_of_vorticity(c);
    r.hamiltonian_drift = std::max(r.hamiltonian_drift, std::abs(h - h0));
    r.inertia_drift = std::max(r.inertia_drift, std::abs(i - i0));
    r.center_drift = std::max(r.center_drift, std::abs(cv - c0));
    hs = std::max(hs, std::abs(h));
    is = std::max(is, std::abs(i));
    cs = std::max(cs, std::abs(cv));
  }
  r.hamiltonian_rel = r.hamiltonian_drift / std::max(hs, 1e-30);
  r.inertia_rel = r.inertia_drift / std::max(is, 1e-30);
  r.center_rel = r.center_drift / std::max(cs, 1e-30);
  return r;
}

}  // namespace vortex
