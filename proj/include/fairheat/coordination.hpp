#pragma once

// Central coordination round: units upload their desired loads, the
// coordinator computes the deficit against the available power and each
// unit subtracts its weighted share of it.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fairheat/control.hpp"
#include "fairheat/error.hpp"
#include "fairheat/thermal.hpp"

namespace fairheat {

enum class StrategyKind { Skewed, Flat, GainProportional, PriceProportional, Explicit };

inline std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::Skewed: return "skewed";
    case StrategyKind::Flat: return "flat";
    case StrategyKind::GainProportional: return "gain";
    case StrategyKind::PriceProportional: return "price";
    case StrategyKind::Explicit: return "explicit";
  }
  return "?";
}

inline StrategyKind parse_strategy_kind(std::string_view name) {
  if (name == "skewed") return StrategyKind::Skewed;
  if (name == "flat") return StrategyKind::Flat;
  if (name == "gain" || name == "gain-proportional") return StrategyKind::GainProportional;
  if (name == "price" || name == "price-proportional") return StrategyKind::PriceProportional;
  if (name == "explicit") return StrategyKind::Explicit;
  throw ValidationError("unknown strategy '" + std::string(name) +
                        "' (expected skewed|flat|gain|price|explicit)");
}

struct Strategy {
  StrategyKind kind = StrategyKind::Flat;
  std::vector<double> lambda;   // price factors, price-proportional only
  std::vector<double> weights;  // explicit only

  static Strategy skewed() { return {StrategyKind::Skewed, {}, {}}; }
  static Strategy flat() { return {StrategyKind::Flat, {}, {}}; }
  static Strategy gain() { return {StrategyKind::GainProportional, {}, {}}; }
  static Strategy price(std::vector<double> lambda) {
    return {StrategyKind::PriceProportional, std::move(lambda), {}};
  }
  static Strategy explicit_weights(std::vector<double> w) {
    return {StrategyKind::Explicit, {}, std::move(w)};
  }

  std::string name() const { return std::string(to_string(kind)); }
};

enum class AllocationMode { Clamp, Redistribute };

inline constexpr double kWeightSumTol = 1e-12;

inline void check_weights(std::span<const double> w) {
  if (w.empty()) throw ValidationError("weights: empty");
  double sum = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0) throw ValidationError("weights must be finite and >= 0");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol) {
    std::ostringstream os;
    os.precision(17);
    os << "weights must sum to 1 (got " << sum << ")";
    throw ValidationError(os.str());
  }
}

// k_p (1 - a1): the unit's stationary sensitivity of desired load to a
// drop in indoor temperature, as seen through the tuned closed loop.
inline double gain_term(const UnitParams& p) { return p.k_p * (1.0 - p.a1); }

inline std::vector<double> compute_weights(const Strategy& s, std::span<const UnitParams> units) {
  const std::size_t n = units.size();
  if (n == 0) throw ValidationError("compute_weights: no units");
  std::vector<double> w(n, 0.0);
  switch (s.kind) {
    case StrategyKind::Skewed:
      w.back() = 1.0;
      return w;
    case StrategyKind::Flat:
      for (auto& x : w) x = 1.0 / static_cast<double>(n);
      return w;
    case StrategyKind::Explicit:
      if (s.weights.size() != n) {
        throw ValidationError("explicit strategy: " + std::to_string(s.weights.size()) +
                              " weights for " + std::to_string(n) + " units");
      }
      check_weights(s.weights);
      return s.weights;
    case StrategyKind::GainProportional:
    case StrategyKind::PriceProportional:
      break;
  }

  const bool priced = s.kind == StrategyKind::PriceProportional;
  if (priced) {
    if (s.lambda.size() != n) {
      throw ValidationError("price strategy: " + std::to_string(s.lambda.size()) +
                            " price factors for " + std::to_string(n) + " units");
    }
    for (double l : s.lambda) {
      if (!std::isfinite(l) || !(l > 0.0)) throw ValidationError("price factors must be > 0");
    }
  }

  std::vector<double> terms(n);
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::string zero_units;
  for (std::size_t i = 0; i < n; ++i) {
    terms[i] = gain_term(units[i]) / (priced ? s.lambda[i] : 1.0);
    if (terms[i] > 0.0) {
      ++positive;
    } else if (terms[i] < 0.0) {
      ++negative;
    } else {
      zero_units += " '" + units[i].unit_id + "'";
    }
  }
  if (!zero_units.empty()) {
    throw StrategyInapplicable(s.name() + " strategy: k_p(1 - a1) is zero for unit(s)" + zero_units);
  }
  if (positive > 0 && negative > 0) {
    // Name the minority sign as the offenders.
    const bool flag_negative = negative <= positive;
    std::string names;
    for (std::size_t i = 0; i < n; ++i) {
      if ((terms[i] < 0.0) == flag_negative) names += " '" + units[i].unit_id + "'";
    }
    throw StrategyInapplicable(s.name() + " strategy: k_p(1 - a1) has mixed signs; offending unit(s)" +
                               names);
  }
  const double total = std::accumulate(terms.begin(), terms.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) w[i] = terms[i] / total;
  return w;
}

inline double compute_deficit(std::span<const double> P_tilde, double P_max) {
  if (!(P_max >= 0.0)) throw ValidationError("P_max must be >= 0");
  double sum = 0.0;
  for (double p : P_tilde) {
    if (!(p >= 0.0)) throw ValidationError("desired loads must be >= 0");
    sum += p;
  }
  return sum > P_max ? sum - P_max : 0.0;
}

struct AllocationRound {
  std::vector<double> P_tilde;
  double P_max = 0.0;
  double P_sat = 0.0;
  std::vector<double> weights;
  std::vector<double> P;
  std::vector<std::size_t> clamp_events;  // units whose allocation hit 0

  double sum_P_tilde() const { return std::accumulate(P_tilde.begin(), P_tilde.end(), 0.0); }
  double sum_P() const { return std::accumulate(P.begin(), P.end(), 0.0); }
};

// Subtract the weighted deficit. In Clamp mode negative allocations are cut
// to zero (the excess is not reassigned, so the sum may exceed P_max). In
// Redistribute mode cut units are frozen at zero and the deficit they could
// not absorb is spread over the others with renormalized weights; if every
// remaining unit has zero weight it is spread equally among them.
inline AllocationRound allocate(std::span<const double> P_tilde, std::span<const double> weights,
                                double P_sat, AllocationMode mode) {
  const std::size_t n = P_tilde.size();
  if (weights.size() != n) throw ValidationError("allocate: weight count does not match unit count");
  check_weights(weights);
  if (!(P_sat >= 0.0)) throw ValidationError("allocate: P_sat must be >= 0");

  AllocationRound r;
  r.P_tilde.assign(P_tilde.begin(), P_tilde.end());
  r.weights.assign(weights.begin(), weights.end());
  r.P_sat = P_sat;
  r.P_max = r.sum_P_tilde() - P_sat;
  r.P.resize(n);

  for (std::size_t i = 0; i < n; ++i) r.P[i] = P_tilde[i] - weights[i] * P_sat;

  if (mode == AllocationMode::Clamp) {
    for (std::size_t i = 0; i < n; ++i) {
      if (r.P[i] < 0.0) {
        r.P[i] = 0.0;
        r.clamp_events.push_back(i);
      }
    }
    return r;
  }

  std::vector<bool> frozen(n, false);
  for (std::size_t pass = 0; pass <= n; ++pass) {
    double residual = P_sat;
    double active_weight = 0.0;
    std::size_t active = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (frozen[i]) {
        residual -= P_tilde[i];
      } else {
        active_weight += weights[i];
        ++active;
      }
    }
    if (active == 0) break;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (frozen[i]) {
        r.P[i] = 0.0;
        continue;
      }
      const double share = active_weight > 0.0 ? weights[i] / active_weight
                                               : 1.0 / static_cast<double>(active);
      r.P[i] = P_tilde[i] - share * residual;
      if (r.P[i] < 0.0) {
        frozen[i] = true;
        changed = true;
      }
    }
    if (!changed) break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (frozen[i]) {
      r.P[i] = 0.0;
      r.clamp_events.push_back(i);
    }
  }
  return r;
}

inline AllocationRound coordination_round(std::span<const ControlOutput> outputs, double P_max,
                                          std::span<const double> weights, AllocationMode mode) {
  std::vector<double> desired;
  desired.reserve(outputs.size());
  for (const auto& o : outputs) desired.push_back(o.P_tilde);
  const double P_sat = compute_deficit(desired, P_max);
  AllocationRound r = allocate(desired, weights, P_sat, mode);
  r.P_max = P_max;
  return r;
}

struct DeviationPrediction {
  double delta_T_in = 0.0;  // degC, stationary shift caused by the deficit share
  bool well_tuned = true;   // false: the derivation's assumption does not hold
  std::string warning;
};

// Stationary indoor temperature shift -w P_sat0 / (k_p (1 - a1)) for a
// well-tuned unit. The formula is still evaluated for other units, with a
// warning attached.
inline DeviationPrediction predicted_deviation(const UnitParams& p, double w, double P_sat0) {
  DeviationPrediction d;
  d.delta_T_in = -w * P_sat0 / gain_term(p);
  if (!is_well_tuned(p)) {
    d.well_tuned = false;
    d.warning = "unit '" + p.unit_id + "' is not well tuned (residual " +
                std::to_string(well_tuned_residual(p)) + "); prediction assumes it is";
  }
  return d;
}

}  // namespace fairheat
