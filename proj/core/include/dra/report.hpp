#pragma once

#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dra/presets.hpp"
#include "dra/scenario.hpp"

namespace dra {

// Shortest exact decimal form (%.17g); keeps CSV output byte-identical
// across runs of the same binary.
std::string format_double(double v);

// Fixed, versioned metrics layout: k,residual,feas_gap,grad_spread and one
// z_<i> column per node when per_node_states is set. Header row mandatory.
void write_metrics_csv(std::ostream& os, const RunResult& run, bool per_node_states);

const char* status_name(RunStatus s);

// Process exit codes: 0 converged, 2 budget exhausted, 3 unstable.
int status_exit_code(RunStatus s);

struct RunArtifact {
  std::string name;
  std::string csv_path;
  RunStatus verdict = RunStatus::budget_exhausted;
  long iterations = 0;
  long iterations_to_threshold = -1;
  double final_residual = 0.0;
  double max_feas_gap = 0.0;
  double eta_tau = 0.0;
  int tau_bar = -1;            // -1: delay-free
  std::string delay_mode;      // empty when delay-free
  std::string summary_json;    // verdict + parameter echo, regenerable from CSV + config
};

RunArtifact make_artifact(const std::string& name, const ScenarioConfig& config,
                          const BuiltScenario& built, const RunResult& run,
                          std::string csv_path);

// Aligned text table: scenario, verdict, iterations to the 1% residual
// threshold, final residual, feasibility max-gap.
std::string comparison_table(std::span<const RunArtifact> artifacts);
std::string comparison_csv(std::span<const RunArtifact> artifacts);

struct SweepCell {
  double eta_tau = 0.0;
  int tau_bar = 0;
  DelayMode mode = DelayMode::time_varying;
  RunStatus verdict = RunStatus::budget_exhausted;
  long iterations = 0;
  double final_residual = 0.0;
  double max_feas_gap = 0.0;
};

// Runs the grid over copies of `base`, fanned out across worker threads;
// the returned cells follow the grid enumeration order regardless of
// scheduling.
std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const SweepSpec& spec,
                                 unsigned workers = 0);

std::string sweep_csv(std::span<const SweepCell> cells);

}  // namespace dra
