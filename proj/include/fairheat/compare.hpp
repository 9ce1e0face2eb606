#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fairheat/engine.hpp"
#include "fairheat/error.hpp"
#include "fairheat/metrics.hpp"

namespace fairheat {

using LabelledResult = std::pair<std::string, SimulationResult>;

// Rows keep the order of `results`.
inline ComparisonReport compare(const std::vector<LabelledResult>& results) {
  if (results.empty()) throw ValidationError("compare: no results");
  ComparisonReport rep;
  const SimulationResult& ref = results.front().second;
  rep.unit_ids = ref.unit_ids;
  rep.t0_h = ref.t0_h;
  rep.t_end_h = ref.t_end_h;
  for (const auto& [label, r] : results) {
    if (r.unit_ids != ref.unit_ids) {
      throw ValidationError("compare: result '" + label + "' has a different unit set");
    }
    if (r.t0_h != ref.t0_h || r.t_end_h != ref.t_end_h) {
      throw ValidationError("compare: result '" + label + "' covers a different horizon");
    }
    rep.rows.push_back(make_row(label, r.metrics));
  }
  return rep;
}

inline nlohmann::json report_json(const ComparisonReport& rep) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"strategy", r.strategy},
                    {"discomfort_Ch", r.discomfort},
                    {"discomfort_total_Ch", r.discomfort_total},
                    {"discomfort_share", r.discomfort_share},
                    {"max_min_discomfort_ratio", finite_or_null(r.max_min_ratio)},
                    {"consumption_MWh", r.consumption},
                    {"consumption_total_MWh", r.consumption_total}});
  }
  return {{"units", rep.unit_ids}, {"t0_h", rep.t0_h}, {"t_end_h", rep.t_end_h}, {"strategies", rows}};
}

}  // namespace fairheat
