// fairheat: run scenarios, compare deficit strategies, tune heating curves
// and generate synthetic weather.
//
// Exit status: 0 success, 1 invalid input, 2 runtime or numerical failure.

#include <cstdio>
#include <exception>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairheat/fairheat.hpp"

namespace fs = std::filesystem;
using namespace fairheat;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// A bundled name or a path to a scenario file, with overrides applied.
Scenario load_scenario(const std::string& ref, const std::vector<std::string>& overrides) {
  Json tree;
  fs::path base;
  if (auto bundled = bundled_scenario_json(ref)) {
    tree = std::move(*bundled);
  } else {
    if (!fs::exists(ref)) {
      std::string names;
      for (const auto& n : bundled_scenario_names()) names += " " + n;
      throw ValidationError("scenario '" + ref + "' is neither a file nor a bundled name (" +
                            names.substr(1) + ")");
    }
    tree = read_json_file(ref);
    base = fs::path(ref).parent_path();
  }
  for (const auto& o : overrides) apply_override(tree, o);
  return scenario_from_json(tree, base);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ValidationError("output directory '" + dir.string() + "' is not writable");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& item : split(s, ',')) {
    double v = 0.0;
    if (!::fairheat::detail::parse_double(item, v)) {
      throw ValidationError(std::string(what) + ": '" + item + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

struct RunOptions {
  std::string scenario;
  std::string out = "results";
  std::vector<std::string> overrides;
};

int cmd_run(const RunOptions& o) {
  const Scenario sc = load_scenario(o.scenario, o.overrides);
  ensure_dir(o.out);
  const SimulationResult r = run(sc);
  write_outputs(o.out, r);
  ComparisonReport rep = compare({{r.strategy, r}});
  print_report(std::cout, rep);
  return 0;
}

struct CompareOptions {
  RunOptions run;
  std::string strategies = "skewed,flat,gain,price";
  std::string lambda;
};

int cmd_compare(const CompareOptions& o) {
  const Scenario base = load_scenario(o.run.scenario, o.run.overrides);
  const std::vector<double> lambda = o.lambda.empty() ? std::vector<double>{}
                                                      : parse_numbers(o.lambda, "--lambda");
  std::vector<Scenario> runs;
  for (const auto& name : split(o.strategies, ',')) {
    Scenario sc = base;
    switch (parse_strategy_kind(name)) {
      case StrategyKind::Skewed: sc.strategy = Strategy::skewed(); break;
      case StrategyKind::Flat: sc.strategy = Strategy::flat(); break;
      case StrategyKind::GainProportional: sc.strategy = Strategy::gain(); break;
      case StrategyKind::PriceProportional:
        if (lambda.empty()) throw ValidationError("strategy 'price' needs --lambda");
        sc.strategy = Strategy::price(lambda);
        break;
      case StrategyKind::Explicit:
        if (base.strategy.kind != StrategyKind::Explicit) {
          throw ValidationError("strategy 'explicit' needs weights in the scenario");
        }
        sc.strategy = base.strategy;
        break;
    }
    sc.validate();
    runs.push_back(std::move(sc));
  }
  if (runs.empty()) throw ValidationError("--strategies: no strategy given");

  ensure_dir(o.run.out);
  std::vector<LabelledResult> results;
  for (const auto& sc : runs) {
    SimulationResult r = run(sc);
    const std::string label = r.strategy;
    for (const auto& [seen, _] : results) {
      if (seen == label) throw ValidationError("--strategies: '" + label + "' given twice");
    }
    write_outputs(fs::path(o.run.out) / label, r);
    results.emplace_back(label, std::move(r));
  }
  const ComparisonReport rep = compare(results);
  std::ostringstream text;
  print_report(text, rep);
  write_text(fs::path(o.run.out) / "report.txt", text.str());
  write_text(fs::path(o.run.out) / "report.json", report_json(rep).dump(2) + "\n");
  std::cout << text.str();
  return 0;
}

struct TuneOptions {
  std::string params;
  double T_c = 20.0;
};

// Units from a JSON file holding either an array of units or an object with
// a "units" array (a scenario file). "table1" selects the built-in units.
std::vector<UnitParams> load_units(const std::string& ref) {
  Json j = ref == "table1" ? table1_units_json() : read_json_file(ref);
  if (j.is_object()) {
    if (!j.contains("units")) throw ValidationError(ref + ": no 'units' array");
    j = j.at("units");
  }
  if (!j.is_array() || j.empty()) throw ValidationError(ref + ": expected a non-empty unit array");
  std::vector<UnitParams> units;
  for (std::size_t i = 0; i < j.size(); ++i) {
    units.push_back(unit_from_json(j[i], i));
    units.back().validate();
  }
  return units;
}

int cmd_tune(const TuneOptions& o) {
  const std::vector<UnitParams> units = load_units(o.params);
  std::cout << std::left << std::setw(10) << "unit" << std::right << std::setw(14) << "residual"
            << std::setw(12) << "a1*" << std::setw(12) << "a0*" << '\n';
  for (const auto& p : units) {
    const double a1 = tune_a1(p);
    UnitParams t = p;
    t.a1 = a1;
    const double a0 = tune_a0(t, o.T_c);
    double residual = well_tuned_residual(p);
    if (std::abs(residual) < 0.005) residual = 0.0;  // no "-0.00"
    std::cout << std::left << std::setw(10) << p.unit_id << std::right << std::fixed
              << std::setprecision(2) << std::setw(14) << residual
              << std::setprecision(4) << std::setw(12) << a1 << std::setw(12) << a0 << '\n'
              << std::defaultfloat;
  }
  return 0;
}

struct WeatherOptions {
  SynthProfile profile;
  std::string snap;
  std::string out;
};

int cmd_weather(WeatherOptions o) {
  if (!o.snap.empty()) {
    const auto colon = o.snap.find(':');
    if (colon == std::string::npos) throw ValidationError("--snap: expected start:end in hours");
    const auto a = parse_numbers(o.snap.substr(0, colon), "--snap");
    const auto b = parse_numbers(o.snap.substr(colon + 1), "--snap");
    if (a.size() != 1 || b.size() != 1) throw ValidationError("--snap: expected start:end in hours");
    o.profile.snap_start_h = a[0];
    o.profile.snap_end_h = b[0];
  }
  const WeatherSeries w = synth_weather(o.profile);
  if (o.out.empty() || o.out == "-") {
    write_weather_csv(std::cout, w);
    return 0;
  }
  std::ostringstream text;
  write_weather_csv(text, w);
  write_text(o.out, text.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"District heating deficit-sharing simulator"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "Run one scenario and write its time series");
  run_cmd->add_option("-s,--scenario", run_opts.scenario, "Scenario file or bundled name")
      ->required();
  run_cmd->add_option("-o,--out", run_opts.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--set", run_opts.overrides, "Override a scenario key: key=value");

  CompareOptions cmp_opts;
  auto* cmp_cmd = app.add_subcommand("compare", "Run a scenario under several strategies");
  cmp_cmd->add_option("-s,--scenario", cmp_opts.run.scenario, "Scenario file or bundled name")
      ->default_val("table1-skewed");
  cmp_cmd->add_option("-o,--out", cmp_opts.run.out, "Output directory")->capture_default_str();
  cmp_cmd->add_option("--set", cmp_opts.run.overrides, "Override a scenario key: key=value");
  cmp_cmd->add_option("--strategies", cmp_opts.strategies, "Comma-separated strategy names")
      ->capture_default_str();
  cmp_cmd->add_option("--lambda", cmp_opts.lambda, "Comma-separated prices for 'price'");

  TuneOptions tune_opts;
  auto* tune_cmd = app.add_subcommand("tune", "Print well-tuned heating-curve coefficients");
  tune_cmd->add_option("-p,--params", tune_opts.params, "Unit parameter file, or 'table1'")
      ->required();
  tune_cmd->add_option("--Tc", tune_opts.T_c, "Comfort temperature, degC")->capture_default_str();

  WeatherOptions wx;
  auto* wx_cmd = app.add_subcommand("weather", "Write a synthetic outdoor-temperature CSV");
  wx_cmd->add_option("--duration", wx.profile.duration_h, "Hours")->capture_default_str();
  wx_cmd->add_option("--base", wx.profile.base_C, "Mean temperature, degC")->capture_default_str();
  wx_cmd->add_option("--amplitude", wx.profile.amplitude_C, "Daily swing amplitude, degC")
      ->capture_default_str();
  wx_cmd->add_option("--period", wx.profile.period_h, "Swing period, h")->capture_default_str();
  wx_cmd->add_option("--depth", wx.profile.snap_depth_C, "Cold-snap depth, degC")
      ->capture_default_str();
  wx_cmd->add_option("--snap", wx.snap, "Cold-snap window start:end, h");
  wx_cmd->add_option("-o,--out", wx.out, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*run_cmd) return cmd_run(run_opts);
    if (*cmp_cmd) return cmd_compare(cmp_opts);
    if (*tune_cmd) return cmd_tune(tune_opts);
    return cmd_weather(wx);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const RangeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
