#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dra/scenario.hpp"

namespace dra {

struct PresetRun {
  std::string name;
  ScenarioConfig config;
};

// Cartesian sweep grid over step rate, max delay and delay mode; cells are
// enumerated step-rate-major so results merge deterministically.
struct SweepSpec {
  std::vector<double> step_rates;
  std::vector<int> tau_bars;
  std::vector<DelayMode> modes;
};

struct Preset {
  std::string name;
  std::string description;
  std::vector<PresetRun> runs;
  std::optional<SweepSpec> sweep;  // applied to runs.front().config
};

// fig1..fig5 experiment presets. Randomized coefficients are pinned by
// documented seeds so every preset reproduces exactly.
Preset preset(const std::string& name);

std::vector<std::string> preset_names();

}  // namespace dra
