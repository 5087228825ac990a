#pragma once
// Exact self-similar three-vortex solutions
//
//     z_j(t) = a_j * Z(t),     Z(t) = sqrt(2 a t) * exp(i (b/2a) log t),
//
// for intensities (-xi/3, 2xi/3, 2xi/3).  For t -> 0+ the three vortices
// emerge from the origin (a "burst"); reversing time gives a self-similar
// total collapse.  The shape coefficients a_j together with the rates (a, b)
// satisfy the algebraic system
//
//     sum_{k != j} xi_k / (a_j - a_k) = 2 pi i conj(a_j) (a - i b),
//
// which is exactly what makes a_j Z(t) a solution of the point-vortex ODE.
// This header also carries the linearisation L of the transformed
// (co-rotating, rescaled) vortex field at the self-similar fixed point; its
// spectrum drives the Duhamel kernel of the fixed-point solver.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include "vortex/core.hpp"
#include "vortex/mat4.hpp"

namespace vortex {

/// Intensity split used by every singular burst: xi -> (-xi/3, 2xi/3, 2xi/3).
/// This is the admissible degeneracy: pairwise products sum to zero.
inline std::array<double, 3> split_intensities(double xi) {
  return {-xi / 3.0, 2.0 * xi / 3.0, 2.0 * xi / 3.0};
}

/// One self-similar burst family: intensities, shape coefficients, rates.
struct SelfSimilarParams {
  double xi = 1.0;                      // intensity of the bursting vortex
  std::array<double, 3> intensities{};  // (-xi/3, 2xi/3, 2xi/3)
  std::array<cplx, 3> positions{};      // shape coefficients a_1, a_2, a_3
  double a = 0.0;                       // radial rate, a > 0 for a burst
  double b = 0.0;                       // angular rate
};

/// Closed-form parameter set for intensity xi (either sign, xi != 0).  The
/// two signs are mirror images under z -> -conj(z).
inline SelfSimilarParams params_for(double xi) {
  if (xi == 0.0) throw std::invalid_argument("params_for: xi must be nonzero");
  SelfSimilarParams p;
  p.xi = xi;
  p.intensities = split_intensities(xi);
  const double u = xi / (84.0 * pi);
  const double s3 = std::sqrt(3.0);
  if (xi > 0.0) {
    p.a = s3 * u;
    p.b = 5.0 * u;
    p.positions = {cplx{-2.0, 2.0 * s3}, cplx{-2.0, s3}, cplx{1.0, 0.0}};
  } else {
    p.a = -s3 * u;  // still positive
    p.b = 5.0 * u;
    p.positions = {cplx{2.0, 2.0 * s3}, cplx{2.0, s3}, cplx{-1.0, 0.0}};
  }
  return p;
}

/// Max residual of the algebraic system defining the family.
inline double asrelation_residual(const SelfSimilarParams& p) {
  double worst = 0.0;
  for (int j = 0; j < 3; ++j) {
    cplx lhs{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      if (k == j) continue;
      lhs += p.intensities[k] / (p.positions[j] - p.positions[k]);
    }
    const cplx rhs = cplx{0.0, 2.0 * pi} * std::conj(p.positions[j]) *
                     cplx{p.a, -p.b};
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// Similarity profile Z(t) for t > 0.
inline cplx z_of_t(const SelfSimilarParams& p, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("z_of_t: t must be positive");
  const double r = std::sqrt(2.0 * p.a * t);
  const double th = (p.b / (2.0 * p.a)) * std::log(t);
  return cplx{r * std::cos(th), r * std::sin(th)};
}

/// The three vortex positions a_j Z(t).
inline std::array<cplx, 3> similarity_positions(const SelfSimilarParams& p, double t) {
  const cplx Z = z_of_t(p, t);
  return {p.positions[0] * Z, p.positions[1] * Z, p.positions[2] * Z};
}

inline VortexConfiguration similarity_configuration(const SelfSimilarParams& p, double t) {
  VortexConfiguration c;
  c.intensities = {p.intensities[0], p.intensities[1], p.intensities[2]};
  const auto z = similarity_positions(p, t);
  c.positions = {z[0], z[1], z[2]};
  return c;
}

/// Hoelder-1/2 seminorm bound of Z on (0, T]: [Z] <= sqrt(2a) (1 + |b|/4a).
inline double holder_bound(const SelfSimilarParams& p) {
  return std::sqrt(2.0 * p.a) * (1.0 + std::abs(p.b) / (4.0 * p.a));
}

// ---------------------------------------------------------------------------
// Linearisation of the transformed field at the fixed point.
//
// In the transformed variables (x_2, x_3) (relative shape offsets, see
// coords.hpp) the interaction field G_j vanishes at x = 0 and its Jacobian
// in the Wirtinger sense acts on (x_2, x_3, conj x_2, conj x_3).  Writing
// L = [[P, Q], [conj Q, conj P]], the holomorphic block is diagonal,
// P = -(a + i b) Id, and the antiholomorphic block Q is obtained by
// differentiating
//
//   G_j = (i / 2 pi |a_1|^2) [ conj(V_j) - (x_j + a_j/a_1) conj(W) ]
//
// at x = 0.  The four first integrals force the spectrum of L for every
// admissible family: H gives the eigenvalue 0, the moment of inertia gives
// -2a, and the two components of the centre of vorticity give -a -+ i b.
// ---------------------------------------------------------------------------

/// L in Wirtinger form: rows/columns ordered (x2, x3, conj x2, conj x3).
struct LMatrix {
  Mat4 m{};            // full 4x4 matrix
  cplx q11{}, q12{};   // antiholomorphic block Q, row x2
  cplx q21{}, q22{};   // antiholomorphic block Q, row x3
  double a = 0.0, b = 0.0;
};

inline LMatrix build_L(const SelfSimilarParams& p) {
  const cplx a1 = p.positions[0];
  const double xi1 = p.intensities[0];
  const cplx a1sq = a1 * a1;

  // dW/dx_m and dV_j/dx_m at x = 0 (all holomorphic in x).
  const auto dW = [&](int m) {  // m in {1, 2} for x2, x3
    const cplx am = p.positions[m];
    return p.intensities[m] * a1sq / ((a1 - am) * (a1 - am));
  };
  const auto q_entry = [&](int j, int m) {  // rows j, cols conj(x_{m+1})
    const cplx aj = p.positions[j];
    const cplx am = p.positions[m];
    cplx dV;
    if (m == j) {
      const int k = (j == 1) ? 2 : 1;
      const cplx ak = p.positions[k];
      dV = -p.intensities[k] * a1sq / ((aj - ak) * (aj - ak)) -
           xi1 * a1sq / ((aj - a1) * (aj - a1));
    } else {
      dV = p.intensities[m] * a1sq / ((aj - am) * (aj - am));
    }
    const cplx pre = cplx{0.0, 1.0} / (2.0 * pi * std::norm(a1));
    return pre * (std::conj(dV) - (aj / a1) * std::conj(dW(m)));
  };

  LMatrix L;
  L.a = p.a;
  L.b = p.b;
  L.q11 = q_entry(1, 1);
  L.q12 = q_entry(1, 2);
  L.q21 = q_entry(2, 1);
  L.q22 = q_entry(2, 2);
  const cplx diag = -cplx{p.a, p.b};
  at(L.m, 0, 0) = diag;
  at(L.m, 1, 1) = diag;
  at(L.m, 2, 2) = std::conj(diag);
  at(L.m, 3, 3) = std::conj(diag);
  at(L.m, 0, 2) = L.q11;
  at(L.m, 0, 3) = L.q12;
  at(L.m, 1, 2) = L.q21;
  at(L.m, 1, 3) = L.q22;
  at(L.m, 2, 0) = std::conj(L.q11);
  at(L.m, 2, 1) = std::conj(L.q12);
  at(L.m, 3, 0) = std::conj(L.q21);
  at(L.m, 3, 1) = std::conj(L.q22);
  return L;
}

/// Invariants of the antiholomorphic block: c1 = tr(Q conj(Q)) and
/// c2 = |det Q|^2.  Both are real by construction.
inline std::pair<double, double> block_invariants(const LMatrix& L) {
  const double c1 = std::norm(L.q11) + std::norm(L.q22) +
                    2.0 * std::real(L.q12 * std::conj(L.q21));
  const cplx det = L.q11 * L.q22 - L.q12 * L.q21;
  return {c1, std::norm(det)};
}

/// Coefficients of the characteristic quartic in mu (lambda = -a + i mu):
///   mu^4 - (2 b^2 - c1) mu^2 + (b^4 - b^2 c1 + c2) = 0.
/// Returns (2 b^2 - c1, b^4 - b^2 c1 + c2).
inline std::pair<double, double> eigen_discriminants(const LMatrix& L) {
  const auto [c1, c2] = block_invariants(L);
  const double b2 = L.b * L.b;
  return {2.0 * b2 - c1, b2 * b2 - b2 * c1 + c2};
}

/// The four eigenvalues of L, from the characteristic quartic (solved over
/// the complex numbers: the mu^2 roots need not be positive).  Sorted by
/// (real, imaginary) part.
inline std::array<cplx, 4> eigenvalues(const LMatrix& L) {
  const auto [d1, d2] = eigen_discriminants(L);
  const cplx disc = std::sqrt(cplx{d1 * d1 - 4.0 * d2, 0.0});
  const cplx musq1 = (cplx{d1, 0.0} + disc) / 2.0;
  const cplx musq2 = (cplx{d1, 0.0} - disc) / 2.0;
  const cplx mu1 = std::sqrt(musq1);
  const cplx mu2 = std::sqrt(musq2);
  std::array<cplx, 4> ev = {
      cplx{-L.a, 0.0} + cplx{0.0, 1.0} * mu1,
      cplx{-L.a, 0.0} - cplx{0.0, 1.0} * mu1,
      cplx{-L.a, 0.0} + cplx{0.0, 1.0} * mu2,
      cplx{-L.a, 0.0} - cplx{0.0, 1.0} * mu2,
  };
  std::sort(ev.begin(), ev.end(), [](const cplx& x, const cplx& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
  });
  return ev;
}

/// Spectral decomposition L = V diag(values) V^{-1}; eigenvectors from the
/// null spaces of L - lambda Id (the four eigenvalues are simple for the
/// closed-form families).
struct LEigen {
  std::array<cplx, 4> values{};
  Mat4 V{};
  Mat4 Vinv{};
};

inline LEigen eigen_decomposition(const LMatrix& L) {
  LEigen e;
  e.values = eigenvalues(L);
  for (int k = 0; k < 4; ++k) {
    Mat4 m = L.m;
    for (int r = 0; r < 4; ++r) at(m, r, r) -= e.values[k];
    const Vec4 v = null_vector(m);
    for (int r = 0; r < 4; ++r) at(e.V, r, k) = v[r];
  }
  e.Vinv = inverse(e.V);
  return e;
}

}  // namespace vortex
