// comsense: parameter sweeps and figure data for the critical optomechanical sensor.
//
//   comsense run <config> [--workers N]
//   comsense figure <name> [--set key=value ...] [--out dir] [--workers N]
//   comsense validate <config>
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric failure (CSV kept with
// error cells), 4 I/O error.

#include <cstdio>
#include <limits>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "comsense/config.hpp"
#include "comsense/error.hpp"
#include "comsense/figures.hpp"
#include "comsense/output.hpp"
#include "comsense/sweep.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace comsense;

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericExit = 3;
constexpr int kIoExit = 4;

PlotSpec sweep_plot(const SweepSpec& spec, const Table& table) {
  PlotSpec plot;
  plot.title = spec.name;
  if (spec.axes.empty()) return plot;
  const Axis& axis = spec.axes.front();
  plot.x_label = axis.name;
  const std::size_t stride = table.rows.size() / axis.values.size();
  for (const auto& metric : spec.metrics) {
    PlotSeries s{metric, {}, {}};
    const std::size_t col = table.column(metric);
    for (std::size_t k = 0; k < axis.values.size(); ++k) {
      const auto& cell = table.rows[k * stride][col];
      s.x.push_back(axis.values[k]);
      const auto* v = std::get_if<double>(&cell);
      s.y.push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
    }
    plot.series.push_back(std::move(s));
  }
  return plot;
}

int cmd_run(const std::string& path, int workers) {
  const SweepSpec spec = load_config(path);
  const int n = workers > 0 ? workers : spec.workers > 0 ? spec.workers : default_workers();
  const SweepResult result = run_sweep(spec, n);

  json config;
  config["run"] = {{"name", spec.name}, {"metrics", spec.metrics}, {"state", spec.state},
                   {"out", spec.out_dir.string()}};
  config["axes"] = json::object();
  for (const auto& axis : spec.axes) {
    config["axes"][axis.name] = {{"definition", axis.definition}, {"values", axis.values}};
  }
  config["fixed"] = spec.fixed;
  const json meta = {{"name", spec.name},
                     {"command", "run"},
                     {"version", version()},
                     {"config", config},
                     {"columns", result.table.columns},
                     {"rows", result.table.rows.size()},
                     {"failed_cells", result.failed_cells}};

  const fs::path base = spec.out_dir / spec.name;
  write_csv(fs::path(base).concat(".csv"), result.table);
  write_json(fs::path(base).concat(".meta.json"), meta);
  write_svg(fs::path(base).concat(".svg"), sweep_plot(spec, result.table));
  if (result.failed_cells > 0) {
    std::cerr << "comsense: " << result.failed_cells << " cell(s) failed; see status column\n";
    return kNumericExit;
  }
  return 0;
}

int cmd_figure(const std::string& name, const std::vector<std::string>& sets, const fs::path& out,
               int workers) {
  std::map<std::string, std::string> overrides;
  for (const auto& item : sets) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    if (overrides.count(key)) throw ConfigError("duplicate key '" + key + "'");
    overrides[key] = item.substr(eq + 1);
  }
  const FigureResult fig = make_figure(name, overrides, workers > 0 ? workers : default_workers());

  json files = json::array();
  for (const auto& f : fig.files) {
    write_csv(out / (f.stem + ".csv"), f.table);
    write_svg(out / (f.stem + ".svg"), f.plot);
    files.push_back({{"stem", f.stem}, {"columns", f.table.columns}, {"rows", f.table.rows.size()}});
  }
  const json meta = {{"name", fig.name},           {"command", "figure"},
                     {"version", version()},       {"parameters", fig.parameters},
                     {"files", files},             {"failed_cells", fig.failed_cells}};
  write_json(out / (name + ".meta.json"), meta);
  if (fig.failed_cells > 0) {
    std::cerr << "comsense: " << fig.failed_cells << " cell(s) failed\n";
    return kNumericExit;
  }
  return 0;
}

int cmd_validate(const std::string& path) {
  const SweepSpec spec = load_config(path);
  std::cout << "ok: " << spec.name << ", " << spec.cells() << " cell(s), " << spec.metrics.size()
            << " metric(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical quantum sensing with a linearized optomechanical system"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  std::string config_path;
  int workers = 0;
  auto* run = app.add_subcommand("run", "Evaluate a sweep configuration");
  run->add_option("config", config_path, "INI-style sweep configuration")->required();
  run->add_option("--workers", workers, "Worker threads (default COMSENSE_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);

  std::string figure_name;
  std::vector<std::string> sets;
  std::string out_dir = ".";
  auto* figure = app.add_subcommand("figure", "Write the data behind one figure");
  figure->add_option("name", figure_name, "fig2, fig3a, fig3b, fig4, fig5, fig6, fig7 or fig8")
      ->required();
  figure->add_option("--set", sets, "Override a default parameter, key=value")->allow_extra_args(false);
  figure->add_option("--out", out_dir, "Output directory");
  figure->add_option("--workers", workers, "Worker threads (default COMSENSE_WORKERS or all cores)")
      ->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a configuration without running it");
  validate_cmd->add_option("config", validate_path, "INI-style sweep configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*run) return cmd_run(config_path, workers);
    if (*figure) return cmd_figure(figure_name, sets, out_dir, workers);
    if (*validate_cmd) return cmd_validate(validate_path);
  } catch (const ConfigError& e) {
    std::cerr << "comsense: config error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const IoError& e) {
    std::cerr << "comsense: I/O error: " << e.what() << "\n";
    return kIoExit;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "comsense: I/O error: " << e.what() << "\n";
    return kIoExit;
  } catch (const Error& e) {
    std::cerr << "comsense: numeric failure [" << code_name(e.code()) << "]: " << e.what() << "\n";
    return kNumericExit;
  }
  return 0;
}
