#pragma once
// Similarity-adapted coordinates around a self-similar burst.
//
// For a triple z_1, z_2, z_3 near the self-similar solution a_j Z(t), write
//
//     z_1 = a_1 r e^{i theta},   zeta = r^2,   eta = theta - (b/2a) log t,
//     x_j = z_j / z_1 - a_j / a_1          (j = 2, 3).
//
// The interaction field transforms exactly (no series truncation): with
//
//     W(x)   = sum_{m=2,3} xi_m / (1 - x_m - a_m/a_1)
//     V_j(x) = xi_k / (x_j - x_k + (a_j-a_k)/a_1) + xi_1 / (x_j + a_j/a_1 - 1)
//     G_j(x) = (i / 2 pi |a_1|^2) [ conj(V_j) - (x_j + a_j/a_1) conj(W) ]
//
// the system with external field f becomes
//
//     zeta' = 2a + omega_r(x) + (2/|a_1|^2) Re(z_1 f(t, z_1))
//     eta'  = (b + omega_theta(x)) / zeta - b/(2 a t) + Im(conj(f(t,z_1))/z_1)
//     x_j'  = (L_j X + omega_j(x)) / zeta
//             + conj(f(t,z_j))/z_1 - z_j conj(f(t,z_1))/z_1^2
//
// where omega_r, omega_theta, omega_j are the exact remainders of W and G_j
// after subtracting their values (and, for G_j, the linear part L_j X) at
// x = 0.  The self-similar solution is zeta = 2 a t, eta = 0, x = 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "vortex/core.hpp"
#include "vortex/field.hpp"
#include "vortex/selfsimilar.hpp"

namespace vortex {

struct TransformedState {
  double zeta = 0.0;
  double eta = 0.0;
  cplx x2{};
  cplx x3{};
};

/// Precomputed chart data for one parameter family.
struct TransformContext {
  SelfSimilarParams p;
  LMatrix L;
  cplx a1{};
  double a1_norm = 0.0;  // |a_1|^2
  double rho_prime = 0.0;  // diagonal guard radius of the chart
};

inline TransformContext make_context(const SelfSimilarParams& p) {
  TransformContext c;
  c.p = p;
  c.L = build_L(p);
  c.a1 = p.positions[0];
  c.a1_norm = std::norm(c.a1);
  const cplx a1 = p.positions[0], a2 = p.positions[1], a3 = p.positions[2];
  c.rho_prime = 0.25 * std::min({std::abs(1.0 - a2 / a1), std::abs(1.0 - a3 / a1),
                                 std::abs((a2 - a3) / a1)});
  return c;
}

/// Forward chart.  `eta_hint` selects the branch of the angle: the returned
/// eta is the representative within pi of the hint.
inline TransformedState phi(const TransformContext& c, double t,
                            const std::array<cplx, 3>& z, double eta_hint = 0.0) {
  if (!(t > 0.0)) throw std::invalid_argument("phi: t must be positive");
  const cplx w = z[0] / c.a1;
  TransformedState s;
  s.zeta = std::norm(w);
  if (s.zeta == 0.0) throw std::invalid_argument("phi: z_1 at the origin");
  double eta = std::arg(w) - (c.p.b / (2.0 * c.p.a)) * std::log(t);
  const double two_pi = 2.0 * pi;
  eta -= two_pi * std::round((eta - eta_hint) / two_pi);
  s.eta = eta;
  s.x2 = z[1] / z[0] - c.p.positions[1] / c.a1;
  s.x3 = z[2] / z[0] - c.p.positions[2] / c.a1;
  return s;
}

/// Inverse chart.
inline std::array<cplx, 3> phi_inv(const TransformContext& c, double t,
                                   const TransformedState& s) {
  if (!(t > 0.0)) throw std::invalid_argument("phi_inv: t must be positive");
  if (!(s.zeta > 0.0)) throw std::invalid_argument("phi_inv: zeta must be positive");
  const double theta = s.eta + (c.p.b / (2.0 * c.p.a)) * std::log(t);
  const cplx z1 = c.a1 * std::sqrt(s.zeta) * cplx{std::cos(theta), std::sin(theta)};
  return {z1, z1 * (s.x2 + c.p.positions[1] / c.a1),
          z1 * (s.x3 + c.p.positions[2] / c.a1)};
}

// -- Transformed interaction field -----------------------------------------

inline cplx w_sum(const TransformContext& c, const cplx& x2, const cplx& x3) {
  const cplx r2 = c.p.positions[1] / c.a1, r3 = c.p.positions[2] / c.a1;
  return c.p.intensities[1] / (1.0 - x2 - r2) + c.p.intensities[2] / (1.0 - x3 - r3);
}

inline cplx v_sum(const TransformContext& c, int j, const cplx& x2, const cplx& x3) {
  const int k = (j == 1) ? 2 : 1;
  const cplx xj = (j == 1) ? x2 : x3;
  const cplx xk = (j == 1) ? x3 : x2;
  const cplx aj = c.p.positions[j], ak = c.p.positions[k];
  return c.p.intensities[k] / (xj - xk + (aj - ak) / c.a1) +
         c.p.intensities[0] / (xj + aj / c.a1 - 1.0);
}

inline cplx g_field(const TransformContext& c, int j, const cplx& x2, const cplx& x3) {
  const cplx xj = (j == 1) ? x2 : x3;
  const cplx aj = c.p.positions[j];
  const cplx pre = cplx{0.0, 1.0} / (2.0 * pi * c.a1_norm);
  return pre * (std::conj(v_sum(c, j, x2, x3)) -
                (xj + aj / c.a1) * std::conj(w_sum(c, x2, x3)));
}

/// Exact nonlinear remainders: omega_r, omega_theta (scalar) and
/// omega_2, omega_3 (complex).  All vanish at x = 0; the omega_j vanish to
/// second order (the linear part L_j X is subtracted exactly, not as a
/// truncated series).
struct OmegaTerms {
  double omega_r = 0.0;
  double omega_theta = 0.0;
  cplx omega_2{};
  cplx omega_3{};
};

inline cplx l_row(const LMatrix& L, int j, const cplx& x2, const cplx& x3) {
  const cplx diag = -cplx{L.a, L.b};
  if (j == 1) return diag * x2 + L.q11 * std::conj(x2) + L.q12 * std::conj(x3);
  return diag * x3 + L.q21 * std::conj(x2) + L.q22 * std::conj(x3);
}

inline OmegaTerms omega_terms(const TransformContext& c, const cplx& x2, const cplx& x3) {
  OmegaTerms o;
  const cplx W = w_sum(c, x2, x3);
  o.omega_r = std::imag(W) / (pi * c.a1_norm) - 2.0 * c.p.a;
  o.omega_theta = std::real(W) / (2.0 * pi * c.a1_norm) - c.p.b;
  o.omega_2 = g_field(c, 1, x2, x3) - l_row(c.L, 1, x2, x3);
  o.omega_3 = g_field(c, 2, x2, x3) - l_row(c.L, 2, x2, x3);
  return o;
}

// -- Full transformed vector field and Duhamel integrands ------------------

struct TransformedVelocity {
  double dzeta = 0.0;
  double deta = 0.0;
  cplx dx2{};
  cplx dx3{};
};

/// The exact transformed vector field at time t (external field included).
inline TransformedVelocity rtx_field(const TransformContext& c, double t,
                                     const TransformedState& s, const FieldSpec& f) {
  const auto z = phi_inv(c, t, s);
  const cplx W = w_sum(c, s.x2, s.x3);
  TransformedVelocity v;
  const cplx f1 = f(t, z[0]);
  v.dzeta = std::imag(W) / (pi * c.a1_norm) +
            (2.0 / c.a1_norm) * std::real(z[0] * f1);
  v.deta = std::real(W) / (2.0 * pi * c.a1_norm * s.zeta) -
           c.p.b / (2.0 * c.p.a * t) + std::imag(std::conj(f1) / z[0]);
  for (int j = 1; j <= 2; ++j) {
    const cplx fj = f(t, z[j]);
    const cplx val = g_field(c, j, s.x2, s.x3) / s.zeta + std::conj(fj) / z[0] -
                     z[j] * std::conj(f1) / (z[0] * z[0]);
    (j == 1 ? v.dx2 : v.dx3) = val;
  }
  return v;
}

/// Integrands of the fixed-point map: zeta' = 2a + R, eta' = Theta, and
/// x' = L X/(2 a t) + Xi.  On the solution R = O(t), Theta = O(1),
/// Xi = O(sqrt(t)).
struct RTXTerms {
  double R = 0.0;
  double Theta = 0.0;
  cplx Xi2{};
  cplx Xi3{};
};

inline RTXTerms rtz_terms(const TransformContext& c, double s,
                          const TransformedState& u, const FieldSpec& f) {
  const auto z = phi_inv(c, s, u);
  const auto o = omega_terms(c, u.x2, u.x3);
  const cplx f1 = f(s, z[0]);
  RTXTerms r;
  r.R = o.omega_r + (2.0 / c.a1_norm) * std::real(z[0] * f1);
  const double inv_zeta = 1.0 / u.zeta;
  const double inv_lin = 1.0 / (2.0 * c.p.a * s);
  r.Theta = c.p.b * (inv_zeta - inv_lin) + o.omega_theta * inv_zeta +
            std::imag(std::conj(f1) / z[0]);
  for (int j = 1; j <= 2; ++j) {
    const cplx fj = f(s, z[j]);
    const cplx lx = l_row(c.L, j, u.x2, u.x3);
    const cplx omega = (j == 1) ? o.omega_2 : o.omega_3;
    const cplx val = lx * (inv_zeta - inv_lin) + omega * inv_zeta +
                     std::conj(fj) / z[0] - z[j] * std::conj(f1) / (z[0] * z[0]);
    (j == 1 ? r.Xi2 : r.Xi3) = val;
  }
  return r;
}

// -- Curves and the solution neighbourhood U_T ------------------------------

/// A curve of transformed states on a graded grid over (0, T].
struct TransformedCurve {
  double T = 0.0;
  std::vector<double> t;                 // strictly increasing, t.back() == T
  std::vector<TransformedState> states;  // same length as t

  std::size_t size() const { return t.size(); }

  /// Piecewise-linear state interpolation (zeta and x scale to zero at 0+).
  TransformedState at(double time) const {
    if (t.empty()) throw std::runtime_error("TransformedCurve::at: empty curve");
    if (time >= t.back()) return states.back();
    if (time <= t.front()) {
      const double f = time / t.front();
      TransformedState s = states.front();
      s.zeta *= f;
      s.x2 *= f;
      s.x3 *= f;
      return s;
    }
    const auto it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
    const double w = (time - t[i]) / (t[i + 1] - t[i]);
    const TransformedState &s0 = states[i], &s1 = states[i + 1];
    TransformedState s;
    s.zeta = (1.0 - w) * s0.zeta + w * s1.zeta;
    s.eta = (1.0 - w) * s0.eta + w * s1.eta;
    s.x2 = (1.0 - w) * s0.x2 + w * s1.x2;
    s.x3 = (1.0 - w) * s0.x3 + w * s1.x3;
    return s;
  }
};

/// Membership report for the solution neighbourhood U_T:
///   eta(T) = 0,  |zeta(t) - 2 a t| <= t^{3/2},  |x_j(t)| <= t,
/// and discrete Hoelder-1/2 seminorms of zeta and x_j bounded by 1.
struct MembershipReport {
  bool ok = false;
  double eta_end = 0.0;
  double zeta_band = 0.0;    // max |zeta - 2 a t| / t^{3/2}
  double x_band = 0.0;       // max |x_j| / t
  double holder_zeta = 0.0;  // discrete C^{1/2} seminorm of zeta
  double holder_x = 0.0;     // discrete C^{1/2} seminorm of x_j
};

inline MembershipReport check_membership(const TransformContext& c,
                                         const TransformedCurve& u) {
  MembershipReport r;
  if (u.t.empty()) return r;
  r.eta_end = std::abs(u.states.back().eta);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double t = u.t[i];
    const TransformedState& s = u.states[i];
    r.zeta_band = std::max(r.zeta_band,
                           std::abs(s.zeta - 2.0 * c.p.a * t) / std::pow(t, 1.5));
    r.x_band = std::max(r.x_band, std::max(std::abs(s.x2), std::abs(s.x3)) / t);
  }
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = i + 1; j < u.size(); ++j) {
      const double dt = std::sqrt(u.t[j] - u.t[i]);
      if (dt == 0.0) continue;
      r.holder_zeta = std::max(r.holder_zeta,
                               std::abs(u.states[j].zeta - u.states[i].zeta) / dt);
      const double dx = std::max(std::abs(u.states[j].x2 - u.states[i].x2),
                                 std::abs(u.states[j].x3 - u.states[i].x3));
      r.holder_x = std::max(r.holder_x, dx / dt);
    }
  r.ok = (r.eta_end == 0.0) && (r.zeta_band <= 1.0) && (r.x_band <= 1.0) &&
         (r.holder_zeta <= 1.0) && (r.holder_x <= 1.0);
  return r;
}

}  // namespace vortex
