#pragma once

// Built-in scenarios: the three-building network with the synthetic
// cold-snap weather, one per weighting strategy.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fairheat/scenario.hpp"

namespace fairheat {

inline nlohmann::json table1_units_json() {
  using nlohmann::json;
  return json::array({
      {{"id", "unit-1"}, {"R_ext", 201.6}, {"R_hs", 270.0}, {"C_in", 1000.0}, {"C_hs", 20.0},
       {"eta", 0.90}, {"k_p", 100.0}, {"a1", 1.54}, {"a0", 50.8}},
      {{"id", "unit-2"}, {"R_ext", 180.0}, {"R_hs", 270.0}, {"C_in", 1000.0}, {"C_hs", 17.0},
       {"eta", 0.87}, {"k_p", 100.0}, {"a1", 1.73}, {"a0", 54.6}},
      {{"id", "unit-3"}, {"R_ext", 160.1}, {"R_hs", 280.8}, {"C_in", 1300.0}, {"C_hs", 20.0},
       {"eta", 0.90}, {"k_p", 200.0}, {"a1", 1.88}, {"a0", 57.6}},
  });
}

inline std::vector<UnitParams> table1_units() {
  std::vector<UnitParams> out;
  const auto j = table1_units_json();
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(unit_from_json(j[i], i));
  return out;
}

// Available power in the bundled scenarios. With the building parameters
// in degC/kW and kJ/degC the three units need about 0.41 kW at -2 degC and
// 0.60 kW at -12 degC, so this cap binds only during the cold snap.
inline constexpr double kBundledPmax_kW = 0.5;

inline const std::vector<std::string>& bundled_scenario_names() {
  static const std::vector<std::string> names{"table1-skewed", "table1-flat", "table1-gain",
                                              "table1-price", "table1-printed"};
  return names;
}

// Scenario tree for a bundled name, or nullopt.
inline std::optional<nlohmann::json> bundled_scenario_json(std::string_view name) {
  using nlohmann::json;
  json strategy;
  bool printed = false;
  if (name == "table1-skewed") {
    strategy = "skewed";
  } else if (name == "table1-flat") {
    strategy = "flat";
  } else if (name == "table1-gain") {
    strategy = "gain";
  } else if (name == "table1-price") {
    strategy = json{{"kind", "price"}, {"lambda", {2.0, 2.0, 1.0}}};
  } else if (name == "table1-printed") {
    strategy = "skewed";
    printed = true;
  } else {
    return std::nullopt;
  }
  json j{{"name", std::string(name)},
         {"units", table1_units_json()},
         {"strategy", strategy},
         {"P_max", kBundledPmax_kW},
         {"T_c", 20.0},
         {"weather", {{"synth", synth_to_json(SynthProfile{})}}},
         {"t0_h", 0.0},
         {"t_end_h", 240.0},
         {"coordination_interval_s", 60.0},
         {"output_interval_h", 0.1},
         {"allocation_mode", "clamp"},
         {"feedback_mode", "continuous"},
         {"deficit_coupling", "continuous"},
         {"a1_sign", "as-given"},
         {"heating_curve", printed ? "as-given" : "tuned"},
         {"initial_state", "auto"}};
  return j;
}

}  // namespace fairheat
