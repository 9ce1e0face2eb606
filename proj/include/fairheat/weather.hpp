#pragma once

// Outdoor temperature series: CSV ingestion, piecewise-linear sampling and
// a synthetic generator with an optional cold snap.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fairheat/error.hpp"

namespace fairheat {

inline constexpr std::string_view kWeatherHeader = "time_h,T_ext_C";

struct WeatherSeries {
  std::vector<double> time_h;
  std::vector<double> T_ext;

  std::size_t size() const { return time_h.size(); }
  double first() const { return time_h.front(); }
  double last() const { return time_h.back(); }

  void validate() const {
    if (time_h.size() != T_ext.size()) throw ValidationError("weather: column length mismatch");
    if (time_h.size() < 2) throw ValidationError("weather: need at least 2 samples");
    for (std::size_t i = 0; i < time_h.size(); ++i) {
      if (!std::isfinite(time_h[i]) || !std::isfinite(T_ext[i])) {
        throw ValidationError("weather: non-finite value in sample " + std::to_string(i));
      }
      if (i > 0 && !(time_h[i] > time_h[i - 1])) {
        throw ValidationError("weather: time not strictly increasing at sample " + std::to_string(i));
      }
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace detail

// Rows are numbered from 1 with the header as row 1.
inline WeatherSeries load_weather_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("weather CSV: empty input");
  std::string_view header = detail::trim(line);
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  if (header != kWeatherHeader) {
    throw ValidationError("weather CSV: expected header '" + std::string(kWeatherHeader) +
                          "', got '" + std::string(header) + "'");
  }
  WeatherSeries w;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const std::string_view text = detail::trim(line);
    if (text.empty()) continue;
    const auto comma = text.find(',');
    double t = 0.0;
    double T = 0.0;
    if (comma == std::string_view::npos || text.find(',', comma + 1) != std::string_view::npos ||
        !detail::parse_double(text.substr(0, comma), t) ||
        !detail::parse_double(text.substr(comma + 1), T) || !std::isfinite(t) || !std::isfinite(T)) {
      throw ValidationError("weather CSV: malformed row " + std::to_string(row) + ": '" +
                            std::string(text) + "'");
    }
    if (!w.time_h.empty() && !(t > w.time_h.back())) {
      throw ValidationError("weather CSV: time not strictly increasing at row " + std::to_string(row));
    }
    w.time_h.push_back(t);
    w.T_ext.push_back(T);
  }
  if (w.size() < 2) {
    throw ValidationError("weather CSV: need at least 2 samples, got " + std::to_string(w.size()));
  }
  return w;
}

inline WeatherSeries load_weather_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open weather file '" + path + "'");
  try {
    return load_weather_csv(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void write_weather_csv(std::ostream& out, const WeatherSeries& w) {
  out << kWeatherHeader << '\n';
  for (std::size_t i = 0; i < w.size(); ++i) {
    out << detail::format_double(w.time_h[i]) << ',' << detail::format_double(w.T_ext[i]) << '\n';
  }
}

enum class Extrapolation { Strict, HoldEnds };

inline double sample_weather(const WeatherSeries& w, double t_h,
                             Extrapolation mode = Extrapolation::Strict) {
  if (t_h < w.first() || t_h > w.last() || std::isnan(t_h)) {
    if (mode == Extrapolation::Strict || std::isnan(t_h)) {
      std::ostringstream os;
      os << "weather: t = " << t_h << " h outside [" << w.first() << ", " << w.last() << "] h";
      throw RangeError(os.str());
    }
    return t_h < w.first() ? w.T_ext.front() : w.T_ext.back();
  }
  const auto it = std::upper_bound(w.time_h.begin(), w.time_h.end(), t_h);
  if (it == w.time_h.end()) return w.T_ext.back();
  const std::size_t hi = static_cast<std::size_t>(it - w.time_h.begin());
  const std::size_t lo = hi - 1;
  if (t_h == w.time_h[lo]) return w.T_ext[lo];
  const double f = (t_h - w.time_h[lo]) / (w.time_h[hi] - w.time_h[lo]);
  return w.T_ext[lo] + f * (w.T_ext[hi] - w.T_ext[lo]);
}

struct SynthProfile {
  double base_C = -2.0;
  double amplitude_C = 3.0;
  double period_h = 24.0;
  double snap_depth_C = 10.0;
  double snap_start_h = 72.0;
  double snap_end_h = 120.0;
  double duration_h = 240.0;
};

inline constexpr double kSnapRamp_h = 2.0;

// 0 outside the snap window, 1 on its plateau, raised-cosine ramps of
// kSnapRamp_h hours inside each edge.
inline double snap_factor(const SynthProfile& p, double t) {
  if (t <= p.snap_start_h || t >= p.snap_end_h) return 0.0;
  auto ramp = [](double x) { return 0.5 - 0.5 * std::cos(std::numbers::pi * x); };
  if (t < p.snap_start_h + kSnapRamp_h) return ramp((t - p.snap_start_h) / kSnapRamp_h);
  if (t > p.snap_end_h - kSnapRamp_h) return ramp((p.snap_end_h - t) / kSnapRamp_h);
  return 1.0;
}

// Hourly samples from t = 0 up to and including duration_h.
inline WeatherSeries synth_weather(const SynthProfile& p) {
  for (double v : {p.base_C, p.amplitude_C, p.period_h, p.snap_depth_C, p.snap_start_h,
                   p.snap_end_h, p.duration_h}) {
    if (!std::isfinite(v)) throw ValidationError("weather profile: values must be finite");
  }
  if (!(p.duration_h > 0.0)) throw ValidationError("weather profile: duration must be > 0");
  if (p.amplitude_C != 0.0 && !(p.period_h > 0.0)) {
    throw ValidationError("weather profile: period must be > 0");
  }
  if (p.snap_depth_C != 0.0 &&
      (p.snap_start_h < 0.0 || p.snap_end_h - p.snap_start_h < 2.0 * kSnapRamp_h)) {
    throw ValidationError("weather profile: invalid snap window [" +
                          detail::format_double(p.snap_start_h) + "," +
                          detail::format_double(p.snap_end_h) + "] (needs start >= 0 and at least " +
                          detail::format_double(2.0 * kSnapRamp_h) + " h)");
  }
  WeatherSeries w;
  auto emit = [&](double t) {
    double T = p.base_C - p.snap_depth_C * snap_factor(p, t);
    if (p.amplitude_C != 0.0) T += p.amplitude_C * std::sin(2.0 * std::numbers::pi * t / p.period_h);
    w.time_h.push_back(t);
    w.T_ext.push_back(T);
  };
  for (double t = 0.0; t < p.duration_h; t += 1.0) emit(t);
  emit(p.duration_h);
  return w;
}

}  // namespace fairheat
