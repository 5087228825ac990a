#pragma once
// External velocity fields.  A field f(t, p) enters the vortex system on the
// conjugated side,
//     conj(dz_j/dt) = interaction + f(t, z_j),
// so its contribution to the velocity itself is conj(f(t, z_j)).
//
// preprocess_field() performs the Galilean normalisation that the burst
// solver assumes: with A = f(0,0), the shifted field
//     f~(t, p) = f(t, p + conj(A) t) - A
// vanishes at (0,0), and solutions transform back as z = z~ + conj(A) t.

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <utility>

#include "vortex/core.hpp"

namespace vortex {

struct FieldSpec {
  enum class Kind { zero, constant, affine, custom };

  Kind kind = Kind::zero;
  cplx value{};  // constant part c
  cplx slope{};  // affine: f(t,p) = c + slope * p
  std::function<cplx(double, cplx)> eval_fn;  // Kind::custom only

  double bound = 0.0;      // sup |f| on the stated ball (diagnostic)
  double lipschitz = 0.0;  // Lipschitz bound in (t, p) if known (diagnostic)
  double radius = std::numeric_limits<double>::infinity();  // stated ball

  cplx operator()(double t, cplx p) const {
    switch (kind) {
      case Kind::zero: return cplx{0.0, 0.0};
      case Kind::constant: return value;
      case Kind::affine: return value + slope * p;
      case Kind::custom: return eval_fn(t, p);
    }
    return cplx{0.0, 0.0};
  }

  bool is_zero() const { return kind == Kind::zero; }

  static FieldSpec zero() { return FieldSpec{}; }

  static FieldSpec constant(cplx c) {
    FieldSpec f;
    f.kind = Kind::constant;
    f.value = c;
    f.bound = std::abs(c);
    return f;
  }

  static FieldSpec affine(cplx c, cplx beta, double radius = 1.0) {
    FieldSpec f;
    f.kind = Kind::affine;
    f.value = c;
    f.slope = beta;
    f.radius = radius;
    f.bound = std::abs(c) + std::abs(beta) * radius;
    f.lipschitz = std::abs(beta);
    return f;
  }

  static FieldSpec custom(std::function<cplx(double, cplx)> fn, double bound = 0.0,
                          double lipschitz = 0.0,
                          double radius = std::numeric_limits<double>::infinity()) {
    FieldSpec f;
    f.kind = Kind::custom;
    f.eval_fn = std::move(fn);
    f.bound = bound;
    f.lipschitz = lipschitz;
    f.radius = radius;
    return f;
  }
};

/// Galilean-normalised field plus the recorded shift A = f(0,0).
struct PreprocessedField {
  FieldSpec field;  // f~(t,p) = f(t, p + conj(A) t) - A; vanishes at (0,0)
  cplx shift{};     // A; Cartesian solutions recover as z = z~ + conj(A) t
};

inline PreprocessedField preprocess_field(const FieldSpec& f) {
  PreprocessedField out;
  const cplx A = f(0.0, cplx{0.0, 0.0});
  out.shift = A;
  if (f.is_zero() || std::abs(A) == 0.0) {
    if (f.kind == FieldSpec::Kind::constant) {
      out.field = FieldSpec::zero();  // constant 0
    } else {
      out.field = f;
    }
    return out;
  }
  switch (f.kind) {
    case FieldSpec::Kind::constant:
      out.field = FieldSpec::zero();
      break;
    case FieldSpec::Kind::affine: {
      // f~(t,p) = beta p + beta conj(A) t: affine in p with a linear-in-time
      // offset; kept as a custom closure.
      const cplx beta = f.slope;
      const cplx Abar = std::conj(A);
      out.field = FieldSpec::custom(
          [beta, Abar](double t, cplx p) { return beta * (p + Abar * t); },
          f.bound + std::abs(A), f.lipschitz, f.radius);
      break;
    }
    default: {
      FieldSpec base = f;
      const cplx Abar = std::conj(A);
      out.field = FieldSpec::custom(
          [base, Abar, A](double t, cplx p) { return base(t, p + Abar * t) - A; },
          f.bound + std::abs(A), f.lipschitz, f.radius);
      break;
    }
  }
  return out;
}

}  // namespace vortex
