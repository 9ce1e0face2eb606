#pragma once

// Two-state RC model of one building connected to the heating grid.
//
//   C_in  dT_in/dt = q_hs - q_ext
//   C_hs  dT_hs/dt = -q_hs + eta * P
//   q_ext = (T_in - T_ext) / R_ext,   q_hs = (T_hs - T_in) / R_hs
//
// with the local controller closing the loop through
//   P = max(0, k_p (a0 + a1 T_ext - T_hs)) - deficit_share.
//
// Units: temperatures in degC, resistances in degC/kW, capacitances in
// kJ/degC, power in kW, time in seconds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>

#include "fairheat/error.hpp"

namespace fairheat {

struct UnitParams {
  double R_ext = 0.0;
  double R_hs = 0.0;
  double C_in = 0.0;
  double C_hs = 0.0;
  double eta = 1.0;
  double k_p = 0.0;
  double a0 = 0.0;
  double a1 = 0.0;
  std::string unit_id;

  void validate() const {
    auto fail = [&](const std::string& what) {
      throw ValidationError("unit '" + unit_id + "': " + what);
    };
    for (double v : {R_ext, R_hs, C_in, C_hs, eta, k_p, a0, a1}) {
      if (!std::isfinite(v)) fail("parameters must be finite");
    }
    if (!(R_ext > 0.0)) fail("R_ext must be > 0");
    if (!(R_hs > 0.0)) fail("R_hs must be > 0");
    if (!(C_in > 0.0)) fail("C_in must be > 0");
    if (!(C_hs > 0.0)) fail("C_hs must be > 0");
    if (!(eta > 0.0 && eta <= 1.0)) fail("eta must lie in (0, 1]");
    if (!(k_p > 0.0)) fail("k_p must be > 0");
  }
};

struct UnitState {
  double T_in = 0.0;
  double T_hs = 0.0;
};

struct UnitInputs {
  double T_ext = 0.0;
  double deficit_share = 0.0;  // w * P_sat, held over a step
};

struct SteadyState {
  double T_in0 = 0.0;
  double T_hs0 = 0.0;
  double P0 = 0.0;
};

struct Derivatives {
  double dT_in = 0.0;  // degC/s
  double dT_hs = 0.0;  // degC/s
};

// Minimal 2x2 algebra for the closed-form stepping below.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
};

struct Mat2 {
  double a11 = 0.0, a12 = 0.0;
  double a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  double trace() const { return a11 + a22; }
  double det() const { return a11 * a22 - a12 * a21; }

  friend Vec2 operator*(const Mat2& m, Vec2 v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
  }
  friend Mat2 operator*(const Mat2& m, const Mat2& n) {
    return {m.a11 * n.a11 + m.a12 * n.a21, m.a11 * n.a12 + m.a12 * n.a22,
            m.a21 * n.a11 + m.a22 * n.a21, m.a21 * n.a12 + m.a22 * n.a22};
  }
  friend Mat2 operator+(const Mat2& m, const Mat2& n) {
    return {m.a11 + n.a11, m.a12 + n.a12, m.a21 + n.a21, m.a22 + n.a22};
  }
  friend Mat2 operator*(double s, const Mat2& m) {
    return {s * m.a11, s * m.a12, s * m.a21, s * m.a22};
  }
};

inline double heat_flow_ext(const UnitState& s, double T_ext, const UnitParams& p) {
  return (s.T_in - T_ext) / p.R_ext;
}

inline double heat_flow_hs(const UnitState& s, const UnitParams& p) {
  return (s.T_hs - s.T_in) / p.R_hs;
}

inline Derivatives derivatives(const UnitState& s, const UnitInputs& in,
                               const UnitParams& p) {
  const double q_ext = heat_flow_ext(s, in.T_ext, p);
  const double q_hs = heat_flow_hs(s, p);
  const double desired = std::max(0.0, p.k_p * (p.a0 + p.a1 * in.T_ext - s.T_hs));
  const double load = desired - in.deficit_share;
  return {(q_hs - q_ext) / p.C_in, (-q_hs + p.eta * load) / p.C_hs};
}

// Affine form dx/dt = A x + B u + offset with x = (T_in, T_hs) and
// u = (T_ext, deficit_share). `det` is the determinant of A evaluated from
// the expanded conductance products, which avoids the cancellation of
// a11*a22 - a12*a21 for the stiff systems seen in practice.
struct LinearSystem {
  Mat2 A;
  Mat2 B;
  Vec2 offset;
  double det = 0.0;

  Vec2 rate(Vec2 x, Vec2 u) const { return A * x + B * u + offset; }
};

namespace detail {

// K is eta*k_p with the proportional loop closed, 0 when the desired load
// is clamped at zero.
inline LinearSystem make_system(const UnitParams& p, bool feedback) {
  const double g_e = 1.0 / p.R_ext;
  const double g_h = 1.0 / p.R_hs;
  const double K = feedback ? p.eta * p.k_p : 0.0;
  LinearSystem sys;
  sys.A = {-(g_h + g_e) / p.C_in, g_h / p.C_in, g_h / p.C_hs, -(g_h + K) / p.C_hs};
  sys.B = {g_e / p.C_in, 0.0, K * p.a1 / p.C_hs, -p.eta / p.C_hs};
  sys.offset = {0.0, K * p.a0 / p.C_hs};
  sys.det = (g_h * g_e + g_h * K + g_e * K) / (p.C_in * p.C_hs);
  return sys;
}

}  // namespace detail

// Linear closed loop of the unclamped local-feedback regime.
inline LinearSystem closed_loop_system(const UnitParams& p) {
  return detail::make_system(p, true);
}

// Same plant with the desired load clamped at zero (P = -deficit_share).
inline LinearSystem clamped_system(const UnitParams& p) {
  return detail::make_system(p, false);
}

inline std::pair<std::complex<double>, std::complex<double>> eigenvalues(const Mat2& A) {
  const double half = 0.5 * A.trace();
  const double disc = half * half - A.det();
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    const double big = half < 0.0 ? half - r : half + r;
    const double small = big != 0.0 ? A.det() / big : 0.0;
    return {big, small};
  }
  const double w = std::sqrt(-disc);
  return {{half, w}, {half, -w}};
}

// exp(A t) for a 2x2 matrix whose determinant is supplied separately.
inline Mat2 expm(const Mat2& A, double det, double t) {
  const double half = 0.5 * A.trace();
  const double disc = half * half - det;
  const Mat2 I = Mat2::identity();
  const Mat2 shifted = A + (-half) * I;  // A - (tr/2) I, squares to disc * I
  if (disc < 0.0) {
    const double w = std::sqrt(-disc);
    const double decay = std::exp(half * t);
    return decay * (std::cos(w * t) * I + (std::sin(w * t) / w) * shifted);
  }
  const double r = std::sqrt(disc);
  if (r * t < 1.0) {
    const double decay = std::exp(half * t);
    const double sinhc = r > 0.0 ? std::sinh(r * t) / r : t;
    return decay * (std::cosh(r * t) * I + sinhc * shifted);
  }
  // Distinct real eigenvalues far apart: cosh/sinh would overflow.
  const double fast = half < 0.0 ? half - r : half + r;
  const double slow = det / fast;
  const Mat2 from_slow = A + (-slow) * I;
  const Mat2 from_fast = A + (-fast) * I;
  const double inv = 1.0 / (fast - slow);
  return (std::exp(fast * t) * inv) * from_slow + (-std::exp(slow * t) * inv) * from_fast;
}

// Fixed point of dx/dt = A x + b (Cramer's rule with the accurate det).
inline Vec2 equilibrium(const LinearSystem& sys, Vec2 forcing) {
  const Mat2& A = sys.A;
  return {-(A.a22 * forcing.x - A.a12 * forcing.y) / sys.det,
          -(-A.a21 * forcing.x + A.a11 * forcing.y) / sys.det};
}

enum class StepMethod { ExactZoh, Rk4 };

// Advance one unit over dt seconds with inputs held. The clamp regime of the
// desired load is decided at the start of the step and held for exact-ZOH.
//
// Rk4 is a validation integrator only: the heating-system mode has a time
// constant of about C_hs / (eta k_p) (~0.2 s for typical parameters), so it
// needs dt well below that to stay stable.
inline UnitState step(const UnitState& s, const UnitInputs& in, double dt,
                      const UnitParams& p, StepMethod method = StepMethod::ExactZoh) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("step: dt must be positive and finite");
  }
  if (method == StepMethod::Rk4) {
    auto f = [&](const UnitState& x) { return derivatives(x, in, p); };
    auto add = [](const UnitState& x, const Derivatives& d, double h) {
      return UnitState{x.T_in + h * d.dT_in, x.T_hs + h * d.dT_hs};
    };
    const Derivatives k1 = f(s);
    const Derivatives k2 = f(add(s, k1, dt / 2));
    const Derivatives k3 = f(add(s, k2, dt / 2));
    const Derivatives k4 = f(add(s, k3, dt));
    return {s.T_in + dt / 6 * (k1.dT_in + 2 * k2.dT_in + 2 * k3.dT_in + k4.dT_in),
            s.T_hs + dt / 6 * (k1.dT_hs + 2 * k2.dT_hs + 2 * k3.dT_hs + k4.dT_hs)};
  }
  const bool feedback = p.k_p * (p.a0 + p.a1 * in.T_ext - s.T_hs) >= 0.0;
  const LinearSystem sys = detail::make_system(p, feedback);
  const Vec2 forcing = sys.B * Vec2{in.T_ext, in.deficit_share} + sys.offset;
  const Vec2 eq = equilibrium(sys, forcing);
  const Vec2 x = eq + expm(sys.A, sys.det, dt) * (Vec2{s.T_in, s.T_hs} - eq);
  return {x.x, x.y};
}

// Stationary point of the unclamped closed loop for constant outdoor
// temperature and constant deficit w * P_sat0.
inline SteadyState steady_state(const UnitParams& p, double T_ext0, double w,
                                double P_sat0) {
  const double kh = p.k_p * p.eta;
  const double share = w * P_sat0;
  const double denom = 1.0 + kh * p.R_hs + kh * p.R_ext;
  const double T_in0 = ((1.0 + kh * p.R_hs + kh * p.a1 * p.R_ext) * T_ext0 +
                        p.R_ext * kh * p.a0 - p.R_ext * p.eta * share) /
                       denom;
  const double q = (T_in0 - T_ext0) / p.R_ext;
  const double T_hs0 = T_in0 + p.R_hs * q;
  const double P0 = q / p.eta;
  if (P0 < 0.0) {
    throw RegimeViolation("steady state of unit '" + p.unit_id +
                          "' needs a negative load (P0 = " + std::to_string(P0) + " kW)");
  }
  return {T_in0, T_hs0, P0};
}

}  // namespace fairheat
