#pragma once

// Discomfort and heat-consumption integrals over recorded series, and the
// cross-strategy comparison report.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fairheat/error.hpp"

namespace fairheat {

struct Metrics {
  std::vector<double> discomfort;     // degC*h per unit
  double discomfort_total = 0.0;
  std::vector<double> consumption;    // MWh per unit
  double consumption_total = 0.0;
  std::vector<double> max_deviation;  // degC per unit
  std::vector<std::size_t> clamp_count;
};

namespace detail {

inline void check_series(std::span<const double> t, std::span<const double> v, double t0,
                         double t_end, const char* what) {
  if (t.size() != v.size()) throw ValidationError(std::string(what) + ": length mismatch");
  if (t.size() < 2) throw ValidationError(std::string(what) + ": need at least 2 samples");
  if (!(t_end >= t0)) throw ValidationError(std::string(what) + ": t_end before t0");
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw ValidationError(std::string(what) + ": times not increasing");
  }
  if (t0 < t.front() || t_end > t.back()) {
    std::ostringstream os;
    os << what << ": insufficient coverage, series spans [" << t.front() << ", " << t.back()
       << "] h but [" << t0 << ", " << t_end << "] h was requested";
    throw ValidationError(os.str());
  }
}

// Integral over [t0, t_end] of g applied to the piecewise-linear interpolant
// of (t, v). `segment(a, b, h)` integrates g over one linear piece with end
// values a, b and width h.
template <typename Segment>
double integrate_linear(std::span<const double> t, std::span<const double> v, double t0,
                        double t_end, Segment segment) {
  double total = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double lo = std::max(t[i - 1], t0);
    const double hi = std::min(t[i], t_end);
    if (!(hi > lo)) continue;
    const double span = t[i] - t[i - 1];
    auto at = [&](double x) {
      if (x == t[i - 1]) return v[i - 1];
      if (x == t[i]) return v[i];
      return v[i - 1] + (x - t[i - 1]) / span * (v[i] - v[i - 1]);
    };
    total += segment(at(lo), at(hi), hi - lo);
  }
  return total;
}

}  // namespace detail

// Integral of |T_c - T_in| in degC*h. Exact for piecewise-linear T_in,
// including segments that cross T_c.
inline double discomfort(std::span<const double> t_h, std::span<const double> T_in, double T_c,
                         double t0, double t_end) {
  detail::check_series(t_h, T_in, t0, t_end, "discomfort");
  return detail::integrate_linear(t_h, T_in, t0, t_end, [T_c](double a, double b, double h) {
    const double da = T_c - a;
    const double db = T_c - b;
    if ((da >= 0.0) == (db >= 0.0) || da == 0.0 || db == 0.0) {
      return 0.5 * (std::abs(da) + std::abs(db)) * h;
    }
    return 0.5 * (da * da + db * db) / (std::abs(da) + std::abs(db)) * h;
  });
}

// Trapezoidal integral of P (kW) over time in hours, reported in MWh.
inline double consumption(std::span<const double> t_h, std::span<const double> P, double t0,
                          double t_end) {
  detail::check_series(t_h, P, t0, t_end, "consumption");
  return detail::integrate_linear(t_h, P, t0, t_end,
                                  [](double a, double b, double h) { return 0.5 * (a + b) * h; }) /
         1000.0;
}

inline double consumption(std::span<const double> t_h, std::span<const double> P) {
  if (t_h.empty()) throw ValidationError("consumption: empty series");
  return consumption(t_h, P, t_h.front(), t_h.back());
}

struct StrategyRow {
  std::string strategy;
  std::vector<double> discomfort;
  double discomfort_total = 0.0;
  std::vector<double> consumption;
  double consumption_total = 0.0;
  std::vector<double> discomfort_share;  // fraction of the total per unit
  double max_min_ratio = 0.0;            // +inf when some unit has zero discomfort
};

struct ComparisonReport {
  std::vector<std::string> unit_ids;
  double t0_h = 0.0;
  double t_end_h = 0.0;
  std::vector<StrategyRow> rows;

  const StrategyRow& row(const std::string& strategy) const {
    for (const auto& r : rows) {
      if (r.strategy == strategy) return r;
    }
    throw ValidationError("comparison report has no strategy '" + strategy + "'");
  }
};

inline StrategyRow make_row(std::string strategy, const Metrics& m) {
  StrategyRow r;
  r.strategy = std::move(strategy);
  r.discomfort = m.discomfort;
  r.discomfort_total = m.discomfort_total;
  r.consumption = m.consumption;
  r.consumption_total = m.consumption_total;
  r.discomfort_share.resize(m.discomfort.size(), 0.0);
  for (std::size_t i = 0; i < m.discomfort.size(); ++i) {
    r.discomfort_share[i] = m.discomfort_total > 0.0 ? m.discomfort[i] / m.discomfort_total : 0.0;
  }
  if (!m.discomfort.empty()) {
    const auto [lo, hi] = std::minmax_element(m.discomfort.begin(), m.discomfort.end());
    r.max_min_ratio = *lo > 0.0 ? *hi / *lo
                                : (*hi > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
  }
  return r;
}

inline void print_report(std::ostream& out, const ComparisonReport& rep) {
  const int w = 12;
  auto header = [&](const std::string& title, bool ratio) {
    out << std::left << std::setw(14) << title << std::right;
    for (const auto& id : rep.unit_ids) out << std::setw(w) << id;
    out << std::setw(w) << "total";
    if (ratio) out << std::setw(w) << "max/min";
    out << '\n';
  };
  out << std::fixed;
  header("discomfort", true);
  for (const auto& r : rep.rows) {
    out << std::left << std::setw(14) << r.strategy << std::right << std::setprecision(2);
    for (double d : r.discomfort) out << std::setw(w) << d;
    out << std::setw(w) << r.discomfort_total << std::setw(w) << r.max_min_ratio << '\n';
  }
  out << '\n';
  header("share", false);
  for (const auto& r : rep.rows) {
    out << std::left << std::setw(14) << r.strategy << std::right << std::setprecision(3);
    for (double s : r.discomfort_share) out << std::setw(w) << s;
    out << std::setw(w) << 1.0 << '\n';
  }
  out << '\n';
  header("MWh", false);
  for (const auto& r : rep.rows) {
    out << std::left << std::setw(14) << r.strategy << std::right << std::setprecision(4);
    for (double c : r.consumption) out << std::setw(w) << c;
    out << std::setw(w) << r.consumption_total << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace fairheat
