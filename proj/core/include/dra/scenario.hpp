#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dra/analysis.hpp"
#include "dra/delaynet.hpp"
#include "dra/dynamics.hpp"

namespace dra {

struct TopologyConfig {
  enum class Kind { cycle, k_hop_cycle, edges };
  Kind kind = Kind::cycle;
  int n = 0;
  int hops = 1;
  double weight = 1.0;
  std::vector<Edge> edges;  // kind == edges only
};

// Explicit per-node cost entry; quadratic when gamma > 0, linear otherwise.
struct CostEntry {
  double gamma = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
};

// Seeded random draw of cost coefficients; generators quadratic, batteries
// linear. Ranges are [lo, hi] pairs.
struct RandomCosts {
  std::uint64_t seed = 0;
  std::pair<double, double> gamma{0.02, 0.08};
  std::pair<double, double> beta{10.0, 30.0};
  std::pair<double, double> alpha{0.0, 100.0};
  std::pair<double, double> battery_beta{1.0, 3.0};
  std::pair<double, double> battery_alpha{0.0, 10.0};
};

struct PenaltyConfig {
  std::optional<double> epsilon;  // default: 10 * max gamma
  PenaltyKind kind = PenaltyKind::power;
  double sigma = 2.0;
};

struct MapConfig {
  NonlinearMap::Kind kind = NonlinearMap::Kind::identity;
  double limit = 1.0;  // saturation
  double rho = 1.2;    // log quantizer
  double mu1 = 0.5;
  double mu2 = 1.1;
  std::vector<std::pair<double, double>> knots;  // table

  NonlinearMap build() const;
};

struct DelayConfig {
  int tau_bar = 0;
  DelayMode mode = DelayMode::time_varying;
  std::uint64_t seed = 0;
};

struct InitConfig {
  enum class Mode { equal_surplus, explicit_vector };
  Mode mode = Mode::equal_surplus;
  std::vector<double> values;
};

struct OutputConfig {
  bool per_node_states = false;
};

// Declarative experiment description; node order is generators first, then
// batteries. parse_config validates and records every default it fills in.
struct ScenarioConfig {
  std::string name = "scenario";
  TopologyConfig topology;
  int generators = 0;
  int batteries = 0;
  std::optional<std::vector<CostEntry>> explicit_costs;
  std::optional<RandomCosts> random_costs;
  std::optional<Box> generator_box;
  std::optional<Box> battery_box;
  std::optional<std::vector<Box>> per_node_boxes;
  PenaltyConfig penalty;
  double regularizer = 1e-3;  // applied to linear costs so the oracle is unique
  MapConfig node_map;
  MapConfig link_map;
  double demand = 0.0;
  InitConfig init;
  std::optional<double> step_rate;  // nullopt: auto = 0.99 * step bound
  double momentum = 0.0;            // heavy-ball baseline coefficient
  std::optional<DelayConfig> delay;
  Termination termination;
  OutputConfig output;

  std::vector<std::string> defaults_applied;

  void validate() const;  // count consistency, parameter sanity
};

// Parses the documented JSON scenario format. Unknown keys, inconsistent
// counts and malformed values raise std::invalid_argument naming the key.
ScenarioConfig parse_config(const std::string& json_text);

// Parameter echo (resolved values) as a JSON string, for run summaries.
std::string config_echo_json(const ScenarioConfig& config);

// A scenario made executable: problem instance, maps, start state, resolved
// step rate, optional delay schedule, oracle and bound diagnostics.
struct BuiltScenario {
  Problem problem;
  std::vector<Box> boxes;
  NonlinearMap g_node = NonlinearMap::identity();
  NonlinearMap g_link = NonlinearMap::identity();
  Eigen::VectorXd z0;
  double eta_tau = 0.0;
  bool eta_auto = false;
  double momentum = 0.0;
  std::optional<DelaySchedule> schedule;
  Termination termination;
  std::optional<OracleSolution> oracle;  // absent when costs are not strictly convex
  std::optional<BoundReport> bound;      // absent when g_l has no finite sector
};

BuiltScenario build_scenario(const ScenarioConfig& config);

// Executes a built scenario (delayed when a schedule is present).
RunResult execute(const BuiltScenario& built, bool keep_states = false);

}  // namespace dra
