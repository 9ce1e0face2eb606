#pragma once

#include <cmath>
#include <random>
#include <string>

#include "fairheat/control.hpp"
#include "fairheat/thermal.hpp"

namespace fairheat::testkit {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Physical parameters in the range of the bundled buildings, heating curve
// left at zero.
inline UnitParams random_physical(std::mt19937_64& rng, std::string id = "u") {
  UnitParams p;
  p.R_ext = uniform(rng, 100.0, 300.0);
  p.R_hs = uniform(rng, 150.0, 350.0);
  p.C_in = uniform(rng, 500.0, 2000.0);
  p.C_hs = uniform(rng, 10.0, 30.0);
  p.eta = uniform(rng, 0.8, 1.0);
  p.k_p = uniform(rng, 50.0, 250.0);
  p.unit_id = std::move(id);
  return p;
}

inline UnitParams random_tuned(std::mt19937_64& rng, double T_c = 20.0, std::string id = "u") {
  return tuned(random_physical(rng, std::move(id)), T_c);
}

// Plain-formula evaluation of the unit dynamics, written independently of
// the library: heat flows, heating curve, proportional load, then the two
// energy balances.
struct Rhs {
  double dT_in;
  double dT_hs;
};

inline Rhs oracle_rhs(const UnitParams& p, double T_in, double T_hs, double T_ext, double share) {
  const double through_envelope = (T_in - T_ext) / p.R_ext;
  const double into_room = (T_hs - T_in) / p.R_hs;
  const double supply_setpoint = p.a0 + p.a1 * T_ext;
  const double wanted = std::max(0.0, p.k_p * (supply_setpoint - T_hs));
  const double delivered = wanted - share;
  return {(into_room - through_envelope) / p.C_in, (p.eta * delivered - into_room) / p.C_hs};
}

}  // namespace fairheat::testkit
