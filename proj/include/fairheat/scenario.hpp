#pragma once

// Scenario configuration and its JSON form.

#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fairheat/control.hpp"
#include "fairheat/coordination.hpp"
#include "fairheat/error.hpp"
#include "fairheat/thermal.hpp"
#include "fairheat/weather.hpp"

namespace fairheat {

using Json = nlohmann::json;

enum class FeedbackMode { Continuous, Sampled };
enum class DeficitCoupling { Continuous, Held };
enum class A1Sign { AsGiven, Negated };
enum class HeatingCurve { AsGiven, Tuned };

// Piecewise-constant available power. Each step applies from its start
// time until the next one; the first step also covers earlier times.
struct PmaxSchedule {
  struct Step {
    double from_h = 0.0;
    double kW = 0.0;
  };
  std::vector<Step> steps{{0.0, std::numeric_limits<double>::infinity()}};

  static PmaxSchedule constant(double kW) { return {{{0.0, kW}}}; }

  double at(double t_h) const {
    double v = steps.front().kW;
    for (const auto& s : steps) {
      if (s.from_h <= t_h) v = s.kW;
    }
    return v;
  }
};

// One unit missing the deficit broadcast for `rounds` consecutive rounds
// starting at the first round at or after t_h; it keeps applying the last
// deficit it received.
struct BroadcastDrop {
  std::string unit_id;
  double t_h = 0.0;
  int rounds = 1;
};

struct Scenario {
  std::string name = "scenario";
  std::vector<UnitParams> units;
  Strategy strategy = Strategy::flat();
  PmaxSchedule P_max;
  double T_c = 20.0;
  WeatherSeries weather;
  Extrapolation weather_extrapolation = Extrapolation::Strict;
  double t0_h = 0.0;
  double t_end_h = 0.0;
  double coordination_interval_s = 60.0;
  double output_interval_h = 0.1;
  AllocationMode allocation_mode = AllocationMode::Clamp;
  FeedbackMode feedback_mode = FeedbackMode::Continuous;
  DeficitCoupling deficit_coupling = DeficitCoupling::Continuous;
  A1Sign a1_sign = A1Sign::AsGiven;
  HeatingCurve heating_curve = HeatingCurve::AsGiven;
  std::optional<std::vector<UnitState>> initial_state;
  std::vector<BroadcastDrop> broadcast_drops;

  // Number of coordination intervals and output stride; throws if the
  // horizon and output grid are not whole multiples of the interval.
  std::size_t interval_count() const {
    const double n = (t_end_h - t0_h) * 3600.0 / coordination_interval_s;
    const double r = std::round(n);
    if (r < 1.0 || std::abs(n - r) > 1e-6 * std::max(1.0, r)) {
      throw ValidationError("scenario: horizon is not a whole number of coordination intervals");
    }
    return static_cast<std::size_t>(r);
  }

  std::size_t output_stride() const {
    const double n = output_interval_h * 3600.0 / coordination_interval_s;
    const double r = std::round(n);
    if (r < 1.0 || std::abs(n - r) > 1e-6 * std::max(1.0, r)) {
      throw ValidationError(
          "scenario: output_interval_h must be a whole multiple of the coordination interval");
    }
    return static_cast<std::size_t>(r);
  }

  // Parameters as simulated: a1 sign switch, then optional retuning.
  std::vector<UnitParams> effective_units() const {
    std::vector<UnitParams> out = units;
    for (auto& p : out) {
      if (a1_sign == A1Sign::Negated) p.a1 = -p.a1;
      if (heating_curve == HeatingCurve::Tuned) p = tuned(p, T_c);
    }
    return out;
  }

  void validate() const {
    if (units.empty()) throw ValidationError("scenario: no units");
    std::set<std::string> ids;
    for (const auto& u : units) {
      u.validate();
      if (!ids.insert(u.unit_id).second) {
        throw ValidationError("scenario: duplicate unit id '" + u.unit_id + "'");
      }
    }
    weather.validate();
    if (!std::isfinite(t0_h) || !std::isfinite(t_end_h) || !(t_end_h > t0_h)) {
      throw ValidationError("scenario: need t_end_h > t0_h");
    }
    if (!(coordination_interval_s > 0.0) || !std::isfinite(coordination_interval_s)) {
      throw ValidationError("scenario: coordination_interval_s must be > 0");
    }
    if (!(output_interval_h > 0.0)) throw ValidationError("scenario: output_interval_h must be > 0");
    interval_count();
    output_stride();
    if (!std::isfinite(T_c)) throw ValidationError("scenario: T_c must be finite");
    if (P_max.steps.empty()) throw ValidationError("scenario: empty P_max schedule");
    for (std::size_t i = 0; i < P_max.steps.size(); ++i) {
      const auto& s = P_max.steps[i];
      if (!(s.kW >= 0.0)) throw ValidationError("scenario: P_max must be >= 0 everywhere");
      if (i > 0 && !(s.from_h > P_max.steps[i - 1].from_h)) {
        throw ValidationError("scenario: P_max schedule times must increase");
      }
    }
    if (initial_state && initial_state->size() != units.size()) {
      throw ValidationError("scenario: initial_state needs one entry per unit");
    }
    if (weather_extrapolation == Extrapolation::Strict &&
        (t0_h < weather.first() || t_end_h > weather.last())) {
      throw ValidationError("scenario: weather covers [" + detail::format_double(weather.first()) +
                            ", " + detail::format_double(weather.last()) + "] h but the horizon is [" +
                            detail::format_double(t0_h) + ", " + detail::format_double(t_end_h) + "] h");
    }
    for (const auto& d : broadcast_drops) {
      if (!ids.count(d.unit_id)) {
        throw ValidationError("scenario: broadcast drop names unknown unit '" + d.unit_id + "'");
      }
      if (d.rounds < 1) throw ValidationError("scenario: broadcast drop needs rounds >= 1");
    }
    // Fails early if the strategy cannot be applied to these units.
    compute_weights(strategy, effective_units());
  }
};

namespace detail {

inline void reject_unknown(const Json& obj, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

inline double get_number(const Json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline double number_or(const Json& obj, const char* key, double fallback,
                        const std::string& where) {
  return obj.contains(key) ? get_number(obj, key, where) : fallback;
}

inline std::string get_string(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ValidationError(where + ": expected a string");
  return v.get<std::string>();
}

inline std::vector<double> number_list(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ValidationError(where + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError(where + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

template <typename E>
E choice(const Json& obj, const char* key, E fallback,
         std::initializer_list<std::pair<std::string_view, E>> options) {
  if (!obj.contains(key)) return fallback;
  const std::string s = get_string(obj.at(key), std::string("scenario.") + key);
  for (const auto& [name, value] : options) {
    if (s == name) return value;
  }
  std::string names;
  for (const auto& [name, _] : options) names += (names.empty() ? "" : "|") + std::string(name);
  throw ValidationError("scenario." + std::string(key) + ": '" + s + "' is not one of " + names);
}

inline double parse_power(const Json& v, const std::string& where) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    throw ValidationError(where + ": expected a number or \"inf\"");
  }
  if (!v.is_number()) throw ValidationError(where + ": expected a number or \"inf\"");
  return v.get<double>();
}

}  // namespace detail

inline UnitParams unit_from_json(const Json& j, std::size_t index) {
  const std::string where = "units[" + std::to_string(index) + "]";
  detail::reject_unknown(j, {"id", "R_ext", "R_hs", "C_in", "C_hs", "eta", "k_p", "a0", "a1"}, where);
  UnitParams p;
  p.unit_id = j.contains("id") ? detail::get_string(j.at("id"), where + ".id")
                               : "unit-" + std::to_string(index + 1);
  p.R_ext = detail::get_number(j, "R_ext", where);
  p.R_hs = detail::get_number(j, "R_hs", where);
  p.C_in = detail::get_number(j, "C_in", where);
  p.C_hs = detail::get_number(j, "C_hs", where);
  p.eta = detail::get_number(j, "eta", where);
  p.k_p = detail::get_number(j, "k_p", where);
  p.a0 = detail::get_number(j, "a0", where);
  p.a1 = detail::get_number(j, "a1", where);
  return p;
}

inline Json unit_to_json(const UnitParams& p) {
  return Json{{"id", p.unit_id}, {"R_ext", p.R_ext}, {"R_hs", p.R_hs}, {"C_in", p.C_in},
              {"C_hs", p.C_hs},  {"eta", p.eta},     {"k_p", p.k_p},   {"a0", p.a0},
              {"a1", p.a1}};
}

inline Strategy strategy_from_json(const Json& j) {
  if (j.is_string()) return Strategy{parse_strategy_kind(j.get<std::string>()), {}, {}};
  detail::reject_unknown(j, {"kind", "lambda", "weights"}, "scenario.strategy");
  if (!j.contains("kind")) throw ValidationError("scenario.strategy: missing 'kind'");
  Strategy s;
  s.kind = parse_strategy_kind(detail::get_string(j.at("kind"), "scenario.strategy.kind"));
  if (j.contains("lambda")) s.lambda = detail::number_list(j.at("lambda"), "scenario.strategy.lambda");
  if (j.contains("weights")) {
    s.weights = detail::number_list(j.at("weights"), "scenario.strategy.weights");
  }
  if (s.kind == StrategyKind::PriceProportional && s.lambda.empty()) {
    throw ValidationError("scenario.strategy: price strategy needs 'lambda'");
  }
  if (s.kind == StrategyKind::Explicit && s.weights.empty()) {
    throw ValidationError("scenario.strategy: explicit strategy needs 'weights'");
  }
  return s;
}

inline Json strategy_to_json(const Strategy& s) {
  Json j{{"kind", s.name()}};
  if (!s.lambda.empty()) j["lambda"] = s.lambda;
  if (!s.weights.empty()) j["weights"] = s.weights;
  return j;
}

inline SynthProfile synth_from_json(const Json& j) {
  detail::reject_unknown(j,
                         {"base_C", "amplitude_C", "period_h", "snap_depth_C", "snap_start_h",
                          "snap_end_h", "duration_h"},
                         "scenario.weather.synth");
  const std::string w = "scenario.weather.synth";
  SynthProfile p;
  p.base_C = detail::number_or(j, "base_C", p.base_C, w);
  p.amplitude_C = detail::number_or(j, "amplitude_C", p.amplitude_C, w);
  p.period_h = detail::number_or(j, "period_h", p.period_h, w);
  p.snap_depth_C = detail::number_or(j, "snap_depth_C", p.snap_depth_C, w);
  p.snap_start_h = detail::number_or(j, "snap_start_h", p.snap_start_h, w);
  p.snap_end_h = detail::number_or(j, "snap_end_h", p.snap_end_h, w);
  p.duration_h = detail::number_or(j, "duration_h", p.duration_h, w);
  return p;
}

inline Json synth_to_json(const SynthProfile& p) {
  return Json{{"base_C", p.base_C},           {"amplitude_C", p.amplitude_C},
              {"period_h", p.period_h},       {"snap_depth_C", p.snap_depth_C},
              {"snap_start_h", p.snap_start_h}, {"snap_end_h", p.snap_end_h},
              {"duration_h", p.duration_h}};
}

// Relative weather CSV paths resolve against base_dir (the directory of
// the scenario file).
inline Scenario scenario_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  detail::reject_unknown(j,
                         {"name", "units", "strategy", "P_max", "T_c", "weather",
                          "weather_extrapolation", "t0_h", "t_end_h", "coordination_interval_s",
                          "output_interval_h", "allocation_mode", "feedback_mode",
                          "deficit_coupling", "a1_sign", "heating_curve", "initial_state",
                          "broadcast_drops"},
                         "scenario");
  Scenario s;
  if (j.contains("name")) s.name = detail::get_string(j.at("name"), "scenario.name");

  if (!j.contains("units") || !j.at("units").is_array()) {
    throw ValidationError("scenario: 'units' must be an array");
  }
  for (std::size_t i = 0; i < j.at("units").size(); ++i) {
    s.units.push_back(unit_from_json(j.at("units").at(i), i));
  }

  if (!j.contains("strategy")) throw ValidationError("scenario: missing 'strategy'");
  s.strategy = strategy_from_json(j.at("strategy"));

  if (!j.contains("P_max")) throw ValidationError("scenario: missing 'P_max'");
  const Json& pm = j.at("P_max");
  if (pm.is_array()) {
    s.P_max.steps.clear();
    for (const auto& step : pm) {
      detail::reject_unknown(step, {"from_h", "kW"}, "scenario.P_max[]");
      s.P_max.steps.push_back({detail::get_number(step, "from_h", "scenario.P_max[]"),
                               detail::parse_power(step.contains("kW") ? step.at("kW") : Json(),
                                                   "scenario.P_max[].kW")});
    }
  } else {
    s.P_max = PmaxSchedule::constant(detail::parse_power(pm, "scenario.P_max"));
  }

  s.T_c = detail::number_or(j, "T_c", s.T_c, "scenario");

  if (!j.contains("weather")) throw ValidationError("scenario: missing 'weather'");
  const Json& w = j.at("weather");
  detail::reject_unknown(w, {"csv", "synth"}, "scenario.weather");
  if (w.contains("csv") == w.contains("synth")) {
    throw ValidationError("scenario.weather: give exactly one of 'csv' or 'synth'");
  }
  if (w.contains("csv")) {
    std::filesystem::path path = detail::get_string(w.at("csv"), "scenario.weather.csv");
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    s.weather = load_weather_csv_file(path.string());
  } else {
    s.weather = synth_weather(synth_from_json(w.at("synth")));
  }
  s.weather_extrapolation = detail::choice(j, "weather_extrapolation", Extrapolation::Strict,
                                           {{"strict", Extrapolation::Strict},
                                            {"hold", Extrapolation::HoldEnds}});

  s.t0_h = detail::number_or(j, "t0_h", s.weather.first(), "scenario");
  s.t_end_h = detail::number_or(j, "t_end_h", s.weather.last(), "scenario");
  s.coordination_interval_s =
      detail::number_or(j, "coordination_interval_s", s.coordination_interval_s, "scenario");
  s.output_interval_h = detail::number_or(j, "output_interval_h", s.output_interval_h, "scenario");
  s.allocation_mode = detail::choice(j, "allocation_mode", AllocationMode::Clamp,
                                     {{"clamp", AllocationMode::Clamp},
                                      {"redistribute", AllocationMode::Redistribute}});
  s.feedback_mode = detail::choice(j, "feedback_mode", FeedbackMode::Continuous,
                                   {{"continuous", FeedbackMode::Continuous},
                                    {"sampled", FeedbackMode::Sampled}});
  s.deficit_coupling = detail::choice(j, "deficit_coupling", DeficitCoupling::Continuous,
                                      {{"continuous", DeficitCoupling::Continuous},
                                       {"held", DeficitCoupling::Held}});
  s.a1_sign = detail::choice(j, "a1_sign", A1Sign::AsGiven,
                             {{"as-given", A1Sign::AsGiven}, {"negated", A1Sign::Negated}});
  s.heating_curve = detail::choice(j, "heating_curve", HeatingCurve::AsGiven,
                                   {{"as-given", HeatingCurve::AsGiven},
                                    {"tuned", HeatingCurve::Tuned}});

  if (j.contains("initial_state")) {
    const Json& init = j.at("initial_state");
    if (init.is_string()) {
      if (init.get<std::string>() != "auto") {
        throw ValidationError("scenario.initial_state: expected \"auto\" or an array");
      }
    } else if (init.is_array()) {
      std::vector<UnitState> states;
      for (const auto& e : init) {
        detail::reject_unknown(e, {"T_in", "T_hs"}, "scenario.initial_state[]");
        states.push_back({detail::get_number(e, "T_in", "scenario.initial_state[]"),
                          detail::get_number(e, "T_hs", "scenario.initial_state[]")});
      }
      s.initial_state = std::move(states);
    } else {
      throw ValidationError("scenario.initial_state: expected \"auto\" or an array");
    }
  }

  if (j.contains("broadcast_drops")) {
    const Json& drops = j.at("broadcast_drops");
    if (!drops.is_array()) throw ValidationError("scenario.broadcast_drops: expected an array");
    for (const auto& d : drops) {
      detail::reject_unknown(d, {"unit", "t_h", "rounds"}, "scenario.broadcast_drops[]");
      if (!d.contains("unit")) throw ValidationError("scenario.broadcast_drops[]: missing 'unit'");
      BroadcastDrop drop;
      drop.unit_id = detail::get_string(d.at("unit"), "scenario.broadcast_drops[].unit");
      drop.t_h = detail::get_number(d, "t_h", "scenario.broadcast_drops[]");
      drop.rounds = static_cast<int>(detail::number_or(d, "rounds", 1, "scenario.broadcast_drops[]"));
      s.broadcast_drops.push_back(drop);
    }
  }

  s.validate();
  return s;
}

// `key=value` with a dotted key path (array elements by index, e.g.
// units.2.k_p). The value is parsed as JSON when possible, else taken as a
// string.
inline void apply_override(Json& tree, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError("override '" + std::string(assignment) + "': expected key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  std::string pointer;
  std::size_t start = 0;
  while (start <= key.size()) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError("override '" + key + "': empty path component");
    pointer += "/" + part;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    Json::json_pointer ptr(pointer);
    if (ptr.parent_pointer() != Json::json_pointer() && !tree.contains(ptr.parent_pointer())) {
      throw ValidationError("override '" + key + "': no such parent in scenario");
    }
    tree[ptr] = value;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("override '" + key + "': " + e.what());
  }
}

}  // namespace fairheat
