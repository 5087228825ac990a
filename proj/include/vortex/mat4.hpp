#pragma once
// Dense complex linear algebra on tiny fixed-size matrices (4x4), enough for
// the linearised transformed field: matrix products, inverse via
// Gauss-Jordan with partial pivoting, and a unit null vector of a
// (numerically) rank-deficient matrix.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "vortex/core.hpp"

namespace vortex {

using Vec4 = std::array<cplx, 4>;
using Mat4 = std::array<cplx, 16>;  // row-major

inline cplx& at(Mat4& m, int r, int c) { return m[4 * r + c]; }
inline const cplx& at(const Mat4& m, int r, int c) { return m[4 * r + c]; }

inline Vec4 matvec(const Mat4& m, const Vec4& v) {
  Vec4 out{};
  for (int r = 0; r < 4; ++r) {
    cplx s{0.0, 0.0};
    for (int c = 0; c < 4; ++c) s += at(m, r, c) * v[c];
    out[r] = s;
  }
  return out;
}

inline Mat4 matmul(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      cplx s{0.0, 0.0};
      for (int k = 0; k < 4; ++k) s += at(a, r, k) * at(b, k, c);
      at(out, r, c) = s;
    }
  return out;
}

inline Mat4 identity4() {
  Mat4 m{};
  for (int r = 0; r < 4; ++r) at(m, r, r) = cplx{1.0, 0.0};
  return m;
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
inline Mat4 inverse(Mat4 m) {
  Mat4 inv = identity4();
  for (int col = 0; col < 4; ++col) {
    int piv = col;
    double best = std::abs(at(m, col, col));
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(at(m, r, col)) > best) {
        best = std::abs(at(m, r, col));
        piv = r;
      }
    if (best == 0.0) throw std::runtime_error("mat4 inverse: singular matrix");
    if (piv != col)
      for (int c = 0; c < 4; ++c) {
        std::swap(at(m, piv, c), at(m, col, c));
        std::swap(at(inv, piv, c), at(inv, col, c));
      }
    const cplx d = at(m, col, col);
    for (int c = 0; c < 4; ++c) {
      at(m, col, c) /= d;
      at(inv, col, c) /= d;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const cplx f = at(m, r, col);
      if (f == cplx{0.0, 0.0}) continue;
      for (int c = 0; c < 4; ++c) {
        at(m, r, c) -= f * at(m, col, c);
        at(inv, r, c) -= f * at(inv, col, c);
      }
    }
  }
  return inv;
}

/// Unit null vector of a matrix whose numerical rank is 3: eliminate with
/// full pivoting, set the free unknown to 1 and back-substitute.
inline Vec4 null_vector(Mat4 m) {
  std::array<int, 4> colperm{0, 1, 2, 3};
  int rank = 0;
  for (int step = 0; step < 3; ++step) {
    int pr = step, pc = step;
    double best = -1.0;
    for (int r = step; r < 4; ++r)
      for (int c = step; c < 4; ++c)
        if (std::abs(at(m, r, c)) > best) {
          best = std::abs(at(m, r, c));
          pr = r;
          pc = c;
        }
    if (best <= 0.0) break;
    if (pr != step)
      for (int c = 0; c < 4; ++c) std::swap(at(m, pr, c), at(m, step, c));
    if (pc != step) {
      for (int r = 0; r < 4; ++r) std::swap(at(m, r, pc), at(m, r, step));
      std::swap(colperm[pc], colperm[step]);
    }
    const cplx d = at(m, step, step);
    for (int r = step + 1; r < 4; ++r) {
      const cplx f = at(m, r, step) / d;
      for (int c = step; c < 4; ++c) at(m, r, c) -= f * at(m, step, c);
    }
    ++rank;
  }
  // Permuted unknowns y: y[3] free = 1, back-substitute the leading 3x3.
  Vec4 y{};
  y[3] = cplx{1.0, 0.0};
  for (int r = rank - 1; r >= 0; --r) {
    cplx s{0.0, 0.0};
    for (int c = r + 1; c < 4; ++c) s += at(m, r, c) * y[c];
    y[r] = -s / at(m, r, r);
  }
  Vec4 v{};
  for (int c = 0; c < 4; ++c) v[colperm[c]] = y[c];
  double nrm = 0.0;
  for (const auto& z : v) nrm += std::norm(z);
  nrm = std::sqrt(nrm);
  for (auto& z : v) z /= nrm;
  return v;
}

}  // namespace vortex
