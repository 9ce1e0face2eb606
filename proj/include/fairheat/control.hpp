#pragma once

// Local unit controller: heating-curve feedforward plus proportional
// feedback on the heating-system temperature, and the tuning rules that
// make the stationary indoor temperature independent of T_ext.

#include <cmath>
#include <limits>
#include <string>

#include "fairheat/error.hpp"
#include "fairheat/thermal.hpp"

namespace fairheat {

struct ControlOutput {
  double T_hs_ref = 0.0;
  double P_tilde = 0.0;  // kW, never negative
  bool clamped = false;  // raw proportional output was negative
};

inline double feedforward(double T_ext, const UnitParams& p) { return p.a0 + p.a1 * T_ext; }

inline ControlOutput desired_load(double T_hs, double T_hs_ref, const UnitParams& p) {
  const double raw = p.k_p * (T_hs_ref - T_hs);
  return {T_hs_ref, raw < 0.0 ? 0.0 : raw, raw < 0.0};
}

// Convenience: feedforward followed by desired_load for the current state.
inline ControlOutput control(const UnitState& s, double T_ext, const UnitParams& p) {
  return desired_load(s.T_hs, feedforward(T_ext, p), p);
}

// 1 + k_p eta R_hs + k_p eta a1 R_ext; zero iff T_ext drops out of the
// stationary indoor temperature.
inline double well_tuned_residual(const UnitParams& p) {
  const double kh = p.k_p * p.eta;
  return (1.0 + kh * p.R_hs) + kh * (p.a1 * p.R_ext);
}

// Root of well_tuned_residual in a1. The closed form is refined over a few
// neighbouring doubles so the residual, as evaluated, is as small as the
// arithmetic allows.
inline double tune_a1(const UnitParams& p) {
  const double a1 = -(1.0 + p.k_p * p.eta * p.R_hs) / (p.k_p * p.eta * p.R_ext);
  UnitParams q = p;
  double best = a1;
  double best_res = std::numeric_limits<double>::infinity();
  for (const double dir : {-1.0, 1.0}) {
    double x = a1;
    for (int k = 0; k <= 32; ++k) {
      q.a1 = x;
      const double res = std::abs(well_tuned_residual(q));
      if (res < best_res) {
        best = x;
        best_res = res;
      }
      if (res == 0.0) return x;
      x = std::nextafter(x, dir * std::numeric_limits<double>::infinity());
    }
  }
  return best;
}

// Relative tolerance on the well-tuned residual, scaled by the size of its
// terms.
inline bool is_well_tuned(const UnitParams& p, double rel_tol = 1e-9) {
  const double kh = p.k_p * p.eta;
  const double scale = 1.0 + kh * p.R_hs + std::abs(kh * p.a1 * p.R_ext);
  return std::abs(well_tuned_residual(p)) <= rel_tol * scale;
}

// Intercept that puts the stationary indoor temperature at T_c when no
// deficit is applied. Requires a1 to be well tuned already.
inline double tune_a0(const UnitParams& p, double T_c) {
  if (!is_well_tuned(p)) {
    throw ValidationError("tune_a0: unit '" + p.unit_id +
                          "' is not well tuned (residual " +
                          std::to_string(well_tuned_residual(p)) + "); run tune_a1 first");
  }
  const double kh = p.k_p * p.eta;
  return T_c * (1.0 + kh * p.R_hs + kh * p.R_ext) / (p.R_ext * kh);
}

// Copy of p with a1 and a0 replaced by the tuned heating curve for T_c.
inline UnitParams tuned(UnitParams p, double T_c) {
  p.a1 = tune_a1(p);
  p.a0 = tune_a0(p, T_c);
  return p;
}

}  // namespace fairheat
