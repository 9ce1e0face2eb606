#pragma once

// Deterministic simulation loop: at every coordination instant each unit
// reports its desired load, the coordinator allocates, and all units are
// advanced exactly to the next instant.

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairheat/control.hpp"
#include "fairheat/coordination.hpp"
#include "fairheat/error.hpp"
#include "fairheat/metrics.hpp"
#include "fairheat/network.hpp"
#include "fairheat/scenario.hpp"
#include "fairheat/thermal.hpp"
#include "fairheat/weather.hpp"

namespace fairheat {

struct UnitSeries {
  std::vector<double> T_in;
  std::vector<double> T_hs;
  std::vector<double> P_tilde;
  std::vector<double> P;
};

struct RoundSeries {
  std::vector<double> P_sat;
  std::vector<double> sum_P_tilde;
  std::vector<double> sum_P;
  std::vector<double> P_max;
};

struct ClampEvent {
  enum class Kind { DesiredLoad, Allocation };
  double t_h = 0.0;
  std::size_t unit = 0;
  Kind kind = Kind::DesiredLoad;
};

struct SimulationResult {
  std::string scenario;
  std::string strategy;
  std::vector<std::string> unit_ids;
  std::vector<double> weights;
  double T_c = 20.0;
  double t0_h = 0.0;
  double t_end_h = 0.0;
  std::vector<double> t_h;  // output grid shared by every series
  std::vector<UnitSeries> units;
  RoundSeries rounds;
  std::vector<ClampEvent> events;
  std::size_t round_count = 0;
  Metrics metrics;
};

inline Metrics compute_metrics(const SimulationResult& r) {
  Metrics m;
  const std::size_t n = r.units.size();
  m.clamp_count.assign(n, 0);
  for (const auto& e : r.events) ++m.clamp_count[e.unit];
  for (std::size_t i = 0; i < n; ++i) {
    const UnitSeries& u = r.units[i];
    m.discomfort.push_back(discomfort(r.t_h, u.T_in, r.T_c, r.t0_h, r.t_end_h));
    m.consumption.push_back(consumption(r.t_h, u.P, r.t0_h, r.t_end_h));
    double worst = 0.0;
    for (double T : u.T_in) worst = std::max(worst, std::abs(r.T_c - T));
    m.max_deviation.push_back(worst);
  }
  for (double d : m.discomfort) m.discomfort_total += d;
  for (double c : m.consumption) m.consumption_total += c;
  return m;
}

namespace detail {

// Load law for the state summarised by `outputs` and `round`. `held` carries
// what the last round fixed for the whole interval: the delivered loads in
// sampled-feedback mode, otherwise each unit's deficit share P~ - P.
inline LoadLaw make_law(const Scenario& sc, const std::vector<ControlOutput>& outputs,
                        const AllocationRound& round, const std::vector<bool>& dropped,
                        const std::vector<double>& held) {
  const std::size_t n = outputs.size();
  const auto N = static_cast<Eigen::Index>(n);
  LoadLaw law;
  law.feedback.assign(n, false);
  law.L = Eigen::MatrixXd::Zero(N, N);
  law.offset = Eigen::VectorXd::Zero(N);

  if (sc.feedback_mode == FeedbackMode::Sampled) {
    for (std::size_t i = 0; i < n; ++i) law.offset(static_cast<Eigen::Index>(i)) = held[i];
    return law;
  }

  for (std::size_t i = 0; i < n; ++i) law.feedback[i] = !outputs[i].clamped;
  auto hold_share = [&](std::size_t i, double share) {
    const auto k = static_cast<Eigen::Index>(i);
    law.L(k, k) = 1.0;
    law.offset(k) = -share;
  };

  if (sc.deficit_coupling == DeficitCoupling::Held) {
    for (std::size_t i = 0; i < n; ++i) hold_share(i, held[i]);
    return law;
  }
  if (round.P_sat == 0.0) {
    for (std::size_t i = 0; i < n; ++i) hold_share(i, dropped[i] ? held[i] : 0.0);
    return law;
  }

  std::vector<bool> cut(n, false);
  for (std::size_t i : round.clamp_events) cut[i] = true;

  // Units whose desired loads enter the running deficit, and their shares.
  std::vector<bool> counted(n, true);
  std::vector<double> share = round.weights;
  if (sc.allocation_mode == AllocationMode::Redistribute) {
    double active_weight = 0.0;
    std::size_t active = 0;
    for (std::size_t i = 0; i < n; ++i) {
      counted[i] = !cut[i];
      if (!cut[i]) {
        active_weight += round.weights[i];
        ++active;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      share[i] = cut[i] ? 0.0
                        : (active_weight > 0.0 ? round.weights[i] / active_weight
                                               : 1.0 / static_cast<double>(active));
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    if (dropped[i]) {
      hold_share(i, held[i]);
      continue;
    }
    if (cut[i]) continue;  // delivered load stays at zero
    law.L(k, k) = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (counted[j]) law.L(k, static_cast<Eigen::Index>(j)) -= share[i];
    }
    law.offset(k) = share[i] * round.P_max;
  }
  return law;
}

// Upper bound on located regime switches per interval; past it the current
// law is held to the end of the interval.
inline constexpr int kMaxSwitchesPerInterval = 16;

}  // namespace detail

inline SimulationResult run(const Scenario& sc) {
  sc.validate();
  const std::vector<UnitParams> units = sc.effective_units();
  const std::vector<double> weights = compute_weights(sc.strategy, units);
  const std::size_t n = units.size();
  const std::size_t intervals = sc.interval_count();
  const std::size_t stride = sc.output_stride();
  const double dt = sc.coordination_interval_s;
  const double dt_h = dt / 3600.0;

  auto time_at = [&](std::size_t k) {
    return k == intervals ? sc.t_end_h : sc.t0_h + static_cast<double>(k) * dt_h;
  };
  auto outdoor = [&](double t) { return sample_weather(sc.weather, t, sc.weather_extrapolation); };

  std::vector<UnitState> states(n);
  if (sc.initial_state) {
    states = *sc.initial_state;
  } else {
    const double T_ext0 = outdoor(sc.t0_h);
    for (std::size_t i = 0; i < n; ++i) {
      try {
        const SteadyState ss = steady_state(units[i], T_ext0, 0.0, 0.0);
        states[i] = {ss.T_in0, ss.T_hs0};
      } catch (const RegimeViolation& e) {
        throw ValidationError(std::string("initial state: ") + e.what() +
                              "; give an explicit initial_state");
      }
    }
  }

  // Rounds in which each unit misses the broadcast.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> drops(n);
  for (const auto& d : sc.broadcast_drops) {
    std::size_t i = 0;
    while (units[i].unit_id != d.unit_id) ++i;
    const double first = std::ceil((d.t_h - sc.t0_h) / dt_h - 1e-9);
    const auto k0 = static_cast<std::size_t>(std::max(0.0, first));
    drops[i].push_back({k0, k0 + static_cast<std::size_t>(d.rounds)});
  }
  auto is_dropped = [&](std::size_t i, std::size_t k) {
    for (const auto& [lo, hi] : drops[i]) {
      if (k >= lo && k < hi) return true;
    }
    return false;
  };

  SimulationResult res;
  res.scenario = sc.name;
  res.strategy = sc.strategy.name();
  res.weights = weights;
  res.T_c = sc.T_c;
  res.t0_h = sc.t0_h;
  res.t_end_h = sc.t_end_h;
  res.units.resize(n);
  for (const auto& u : units) res.unit_ids.push_back(u.unit_id);

  NetworkStepper stepper(units);
  stepper.set_interval(dt);
  std::vector<double> last_P_sat(n, 0.0);
  std::vector<bool> dropped(n, false);
  std::vector<double> held(n, 0.0);
  std::vector<ControlOutput> outputs(n);

  // Law implied by a state inside the current interval.
  auto law_at = [&](const std::vector<UnitState>& x, double T_ext, double P_max) {
    std::vector<ControlOutput> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = control(x[i], T_ext, units[i]);
    const AllocationRound r = coordination_round(out, P_max, weights, sc.allocation_mode);
    return detail::make_law(sc, out, r, dropped, held);
  };

  double T_ext_k = outdoor(sc.t0_h);
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double t = time_at(k);
    const double P_max = sc.P_max.at(t);
    for (std::size_t i = 0; i < n; ++i) outputs[i] = control(states[i], T_ext_k, units[i]);
    AllocationRound round = coordination_round(outputs, P_max, weights, sc.allocation_mode);
    for (std::size_t i = 0; i < n; ++i) {
      dropped[i] = is_dropped(i, k);
      if (!dropped[i]) {
        last_P_sat[i] = round.P_sat;
        continue;
      }
      const double stale = round.P_tilde[i] - weights[i] * last_P_sat[i];
      round.P[i] = std::max(0.0, stale);
      std::erase(round.clamp_events, i);
      if (stale < 0.0) round.clamp_events.push_back(i);
    }
    ++res.round_count;
    for (std::size_t i = 0; i < n; ++i) {
      if (outputs[i].clamped) res.events.push_back({t, i, ClampEvent::Kind::DesiredLoad});
    }
    for (std::size_t i : round.clamp_events) {
      res.events.push_back({t, i, ClampEvent::Kind::Allocation});
    }

    if (k % stride == 0 || k == intervals) {
      res.t_h.push_back(t);
      for (std::size_t i = 0; i < n; ++i) {
        UnitSeries& u = res.units[i];
        u.T_in.push_back(states[i].T_in);
        u.T_hs.push_back(states[i].T_hs);
        u.P_tilde.push_back(round.P_tilde[i]);
        u.P.push_back(round.P[i]);
      }
      res.rounds.P_sat.push_back(round.P_sat);
      res.rounds.sum_P_tilde.push_back(round.sum_P_tilde());
      res.rounds.sum_P.push_back(round.sum_P());
      res.rounds.P_max.push_back(round.P_max);
    }
    if (k == intervals) break;

    for (std::size_t i = 0; i < n; ++i) {
      held[i] = sc.feedback_mode == FeedbackMode::Sampled ? round.P[i]
                                                          : round.P_tilde[i] - round.P[i];
    }
    const double T_ext_next = outdoor(time_at(k + 1));
    const double slope = (T_ext_next - T_ext_k) / dt;
    LoadLaw law = detail::make_law(sc, outputs, round, dropped, held);

    // Piecewise-linear dynamics: step to the end of the interval unless the
    // law implied by the end state differs, in which case bisect for the
    // first switching time, move there and continue with the new law.
    double elapsed = 0.0;
    int switches = 0;
    while (true) {
      const double remaining = dt - elapsed;
      const double T_ext_now = T_ext_k + slope * elapsed;
      std::vector<UnitState> trial = states;
      stepper.advance(trial, law, T_ext_now, slope, remaining);
      const bool detect = sc.feedback_mode != FeedbackMode::Sampled &&
                          switches < detail::kMaxSwitchesPerInterval;
      if (!detect || law_at(trial, T_ext_now + slope * remaining, P_max).same_shape(law)) {
        states = std::move(trial);
        break;
      }
      double lo = 0.0;
      double hi = remaining;
      std::vector<UnitState> at_hi = trial;
      while (hi - lo > 1e-9 * dt) {
        const double mid = 0.5 * (lo + hi);
        std::vector<UnitState> probe = states;
        stepper.advance(probe, law, T_ext_now, slope, mid);
        if (law_at(probe, T_ext_now + slope * mid, P_max).same_shape(law)) {
          lo = mid;
        } else {
          hi = mid;
          at_hi = std::move(probe);
        }
      }
      states = std::move(at_hi);
      elapsed += hi;
      law = law_at(states, T_ext_k + slope * elapsed, P_max);
      ++switches;
      if (elapsed >= dt) break;
    }

    T_ext_k = T_ext_next;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(states[i].T_in) || !std::isfinite(states[i].T_hs)) {
        throw NumericalError("non-finite state in unit '" + units[i].unit_id + "' at t = " +
                             ::fairheat::detail::format_double(time_at(k + 1)) + " h");
      }
    }
  }
  res.metrics = compute_metrics(res);
  return res;
}

// ---- output files --------------------------------------------------------

inline void write_unit_csv(std::ostream& out, const SimulationResult& r, std::size_t unit) {
  using detail::format_double;
  const UnitSeries& u = r.units.at(unit);
  out << "t_h,T_in_C,T_hs_C,P_tilde_kW,P_kW\n";
  for (std::size_t k = 0; k < r.t_h.size(); ++k) {
    out << format_double(r.t_h[k]) << ',' << format_double(u.T_in[k]) << ','
        << format_double(u.T_hs[k]) << ',' << format_double(u.P_tilde[k]) << ','
        << format_double(u.P[k]) << '\n';
  }
}

inline void write_rounds_csv(std::ostream& out, const SimulationResult& r) {
  using detail::format_double;
  out << "t_h,P_max_kW,P_sat_kW,sum_P_tilde_kW,sum_P_kW\n";
  for (std::size_t k = 0; k < r.t_h.size(); ++k) {
    out << format_double(r.t_h[k]) << ',' << format_double(r.rounds.P_max[k]) << ','
        << format_double(r.rounds.P_sat[k]) << ',' << format_double(r.rounds.sum_P_tilde[k])
        << ',' << format_double(r.rounds.sum_P[k]) << '\n';
  }
}

inline void write_events_csv(std::ostream& out, const SimulationResult& r) {
  out << "t_h,unit,kind\n";
  for (const auto& e : r.events) {
    out << detail::format_double(e.t_h) << ',' << r.unit_ids[e.unit] << ','
        << (e.kind == ClampEvent::Kind::DesiredLoad ? "desired_load" : "allocation") << '\n';
  }
}

inline nlohmann::json metrics_to_json(const Metrics& m) {
  return nlohmann::json{{"discomfort_Ch", m.discomfort},
                        {"discomfort_total_Ch", m.discomfort_total},
                        {"consumption_MWh", m.consumption},
                        {"consumption_total_MWh", m.consumption_total},
                        {"max_deviation_C", m.max_deviation},
                        {"clamp_count", m.clamp_count}};
}

inline nlohmann::json summary_json(const SimulationResult& r) {
  return nlohmann::json{{"scenario", r.scenario},
                        {"strategy", r.strategy},
                        {"units", r.unit_ids},
                        {"weights", r.weights},
                        {"T_c", r.T_c},
                        {"t0_h", r.t0_h},
                        {"t_end_h", r.t_end_h},
                        {"rounds", r.round_count},
                        {"metrics", metrics_to_json(r.metrics)}};
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace detail

// <unit_id>.csv per unit, rounds.csv, events.csv and summary.json.
inline void write_outputs(const std::filesystem::path& dir, const SimulationResult& r) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < r.units.size(); ++i) {
    auto out = detail::open_output(dir / (r.unit_ids[i] + ".csv"));
    write_unit_csv(out, r, i);
  }
  {
    auto out = detail::open_output(dir / "rounds.csv");
    write_rounds_csv(out, r);
  }
  {
    auto out = detail::open_output(dir / "events.csv");
    write_events_csv(out, r);
  }
  auto out = detail::open_output(dir / "summary.json");
  out << summary_json(r).dump(2) << '\n';
}

}  // namespace fairheat
