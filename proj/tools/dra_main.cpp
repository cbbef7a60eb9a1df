// dra: scenario runner for networked energy resource allocation.
//
// Verbs:
//   dra run <config.json>      run one scenario; exit code reflects the verdict
//   dra preset <fig1..fig5>    run a packaged experiment and emit a report
//   dra sweep <config.json> --grid "<spec>"   verdict table over a grid
//   dra bound <config.json>    print the guaranteed step-rate bound inputs

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dra/presets.hpp"
#include "dra/report.hpp"
#include "dra/scenario.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kConfigErrorExit = 64;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

dra::RunArtifact run_and_write(const std::string& name, const dra::ScenarioConfig& config,
                               const fs::path& out_dir, bool force_states) {
  const dra::BuiltScenario built = dra::build_scenario(config);
  const bool keep_states = force_states || config.output.per_node_states;
  const dra::RunResult run = dra::execute(built, keep_states);

  fs::create_directories(out_dir);
  const fs::path csv_path = out_dir / (name + ".csv");
  std::ostringstream csv;
  dra::write_metrics_csv(csv, run, keep_states);
  write_file(csv_path, csv.str());

  dra::RunArtifact artifact =
      dra::make_artifact(name, config, built, run, csv_path.string());
  write_file(out_dir / (name + ".summary.json"), artifact.summary_json + "\n");
  return artifact;
}

// Grid spec: "eta_tau=0.5,0.25;tau_bar=0:5;mode=time_varying,time_invariant"
// (mode=both expands to both modes; tau_bar accepts lo:hi ranges or lists).
dra::SweepSpec parse_grid_spec(const std::string& text) {
  dra::SweepSpec spec;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("grid spec entries must look like key=values, got '" +
                                  part + "'");
    }
    const std::string key = part.substr(0, eq);
    const std::string values = part.substr(eq + 1);
    std::stringstream vs(values);
    std::string item;
    if (key == "eta_tau") {
      while (std::getline(vs, item, ',')) spec.step_rates.push_back(std::stod(item));
    } else if (key == "tau_bar") {
      while (std::getline(vs, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
          spec.tau_bars.push_back(std::stoi(item));
        } else {
          const int lo = std::stoi(item.substr(0, colon));
          const int hi = std::stoi(item.substr(colon + 1));
          for (int t = lo; t <= hi; ++t) spec.tau_bars.push_back(t);
        }
      }
    } else if (key == "mode") {
      while (std::getline(vs, item, ',')) {
        if (item == "time_varying") {
          spec.modes.push_back(dra::DelayMode::time_varying);
        } else if (item == "time_invariant") {
          spec.modes.push_back(dra::DelayMode::time_invariant);
        } else if (item == "both") {
          spec.modes.push_back(dra::DelayMode::time_varying);
          spec.modes.push_back(dra::DelayMode::time_invariant);
        } else {
          throw std::invalid_argument("unknown delay mode '" + item + "' in grid spec");
        }
      }
    } else {
      throw std::invalid_argument("unknown grid key '" + key +
                                  "'; expected eta_tau, tau_bar or mode");
    }
  }
  if (spec.step_rates.empty()) spec.step_rates.push_back(0.0);  // 0: keep config rate
  if (spec.tau_bars.empty()) spec.tau_bars.push_back(0);
  if (spec.modes.empty()) spec.modes.push_back(dra::DelayMode::time_varying);
  return spec;
}

int cmd_run(const std::string& config_path, const fs::path& out_dir, bool states) {
  const dra::ScenarioConfig config = dra::parse_config(read_file(config_path));
  const dra::RunArtifact a = run_and_write(config.name, config, out_dir, states);
  std::cout << dra::comparison_table(std::span<const dra::RunArtifact>(&a, 1));
  std::cout << "metrics: " << a.csv_path << "\n";
  return dra::status_exit_code(a.verdict);
}

int cmd_preset(const std::string& name, const fs::path& out_dir) {
  const dra::Preset p = dra::preset(name);
  std::cout << p.name << ": " << p.description << "\n\n";

  std::vector<dra::RunArtifact> artifacts;
  if (p.sweep) {
    dra::ScenarioConfig base = p.runs.front().config;
    const std::vector<dra::SweepCell> cells = dra::run_sweep(base, *p.sweep);
    fs::create_directories(out_dir);
    const fs::path csv_path = out_dir / (p.name + "_sweep.csv");
    write_file(csv_path, dra::sweep_csv(cells));
    std::cout << dra::sweep_csv(cells) << "\nsweep table: " << csv_path << "\n";
    return 0;
  }

  for (const dra::PresetRun& r : p.runs) {
    artifacts.push_back(run_and_write(r.name, r.config, out_dir, false));
  }
  const std::string table = dra::comparison_table(artifacts);
  std::cout << table;
  fs::create_directories(out_dir);
  write_file(out_dir / (p.name + "_report.csv"), dra::comparison_csv(artifacts));
  write_file(out_dir / (p.name + "_report.txt"), table);
  std::cout << "report: " << (out_dir / (p.name + "_report.csv")).string() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid,
              const fs::path& out_dir) {
  dra::ScenarioConfig base = dra::parse_config(read_file(config_path));
  dra::SweepSpec spec = parse_grid_spec(grid);
  if (spec.step_rates.size() == 1 && spec.step_rates.front() == 0.0) {
    if (!base.step_rate) {
      throw std::invalid_argument("grid spec without eta_tau needs a numeric step_rate "
                                  "in the config");
    }
    spec.step_rates.front() = *base.step_rate;
  }
  const std::vector<dra::SweepCell> cells = dra::run_sweep(base, spec);
  fs::create_directories(out_dir);
  const fs::path csv_path = out_dir / (base.name + "_sweep.csv");
  write_file(csv_path, dra::sweep_csv(cells));
  std::cout << dra::sweep_csv(cells) << "\nsweep table: " << csv_path << "\n";
  return 0;
}

int cmd_bound(const std::string& config_path) {
  const dra::ScenarioConfig config = dra::parse_config(read_file(config_path));
  const dra::BuiltScenario built = dra::build_scenario(config);
  if (!built.bound) {
    std::cout << "step-rate bound unavailable: the link map has no finite upper sector "
                 "near the origin (sgn-style maps); supply step_rate explicitly\n";
    return 0;
  }
  const dra::BoundReport& b = *built.bound;
  std::cout << "lambda2          = " << dra::format_double(b.spectrum.lambda2) << "\n"
            << "lambdaN          = " << dra::format_double(b.spectrum.lambdaN) << "\n"
            << "curvature u      = " << dra::format_double(b.curvature.u) << "\n"
            << "curvature v      = " << dra::format_double(b.curvature.v) << "\n"
            << "sector kappa     = " << dra::format_double(b.sector.lower) << "\n"
            << "sector Kappa     = " << dra::format_double(b.sector.upper) << "\n"
            << "gradient radius  = " << dra::format_double(b.gradient_radius) << "\n"
            << "operating range  = [" << dra::format_double(b.operating_lo) << ", "
            << dra::format_double(b.operating_hi) << "]\n"
            << "tau_bar          = " << b.tau_bar << "\n"
            << "bound (tau=0)    = " << dra::format_double(b.delay_free_bound) << "\n"
            << "bound            = " << dra::format_double(b.bound) << "\n";
  if (built.eta_auto) {
    std::cout << "auto step rate   = " << dra::format_double(built.eta_tau) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"networked energy resource allocation simulator"};
  app.require_subcommand(1);

  std::string out_dir_opt = ".";
  app.add_option("--out-dir", out_dir_opt, "output directory for CSV and summaries")
      ->envname("DRA_OUT_DIR")
      ->capture_default_str();

  std::string config_path;
  bool states = false;
  CLI::App* run = app.add_subcommand("run", "run one scenario config");
  run->add_option("config", config_path, "scenario JSON file")->required();
  run->add_flag("--states", states, "record per-node states in the metrics CSV");

  std::string preset_name;
  CLI::App* preset = app.add_subcommand("preset", "run a packaged experiment");
  preset->add_option("name", preset_name, "fig1 | fig2 | fig3 | fig4 | fig5")->required();

  std::string grid;
  CLI::App* sweep = app.add_subcommand("sweep", "verdict table over a parameter grid");
  sweep->add_option("config", config_path, "scenario JSON file")->required();
  sweep->add_option("--grid", grid,
                    "grid spec, e.g. \"eta_tau=0.5,0.25;tau_bar=0:5;mode=both\"")
      ->required();

  CLI::App* bound = app.add_subcommand("bound", "print the guaranteed step-rate bound");
  bound->add_option("config", config_path, "scenario JSON file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const fs::path out_dir(out_dir_opt);
    if (run->parsed()) return cmd_run(config_path, out_dir, states);
    if (preset->parsed()) return cmd_preset(preset_name, out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, grid, out_dir);
    if (bound->parsed()) return cmd_bound(config_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
