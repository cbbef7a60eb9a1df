#include "dra/presets.hpp"

#include <stdexcept>

namespace dra {

namespace {

// Ten-generator ring dispatched against a 700 MW demand; box and step-rate
// values follow the first experiment, cost coefficients are a pinned draw.
ScenarioConfig fig1_base() {
  ScenarioConfig c;
  c.name = "fig1";
  c.topology.kind = TopologyConfig::Kind::cycle;
  c.topology.n = 10;
  c.topology.weight = 1.0;
  c.generators = 10;
  c.batteries = 0;
  RandomCosts rc;
  rc.seed = 101;
  rc.gamma = {0.004, 0.006};
  rc.beta = {20.0, 20.0};
  rc.alpha = {0.0, 50.0};
  c.random_costs = rc;
  c.generator_box = Box{20.0, 90.0};
  c.penalty.epsilon = 0.05;
  c.demand = 700.0;
  // Staggered feasible start: alternating 90 / 50 MW sums to 700.
  c.init.mode = InitConfig::Mode::explicit_vector;
  for (int i = 0; i < 10; ++i) c.init.values.push_back(i % 2 == 0 ? 90.0 : 50.0);
  c.step_rate = 1.0;
  c.termination.grad_tol = 1e-6;
  c.termination.max_iterations = 50000;
  return c;
}

// Mixed fleet on a 2-hop ring: seven generators with quadratic costs, three
// batteries with linear costs, started from 100 MW / 0 MW.
ScenarioConfig fig2_base() {
  ScenarioConfig c;
  c.name = "fig2";
  c.topology.kind = TopologyConfig::Kind::k_hop_cycle;
  c.topology.n = 10;
  c.topology.hops = 2;
  c.topology.weight = 1.0;
  c.generators = 7;
  c.batteries = 3;
  RandomCosts rc;
  rc.seed = 202;
  rc.gamma = {0.04, 0.08};
  rc.beta = {19.0, 21.0};
  rc.alpha = {0.0, 50.0};
  rc.battery_beta = {-28.0, -24.0};
  rc.battery_alpha = {0.0, 10.0};
  c.random_costs = rc;
  c.generator_box = Box{20.0, 200.0};
  c.battery_box = Box{0.0, 200.0};
  c.penalty.epsilon = 0.4;
  c.demand = 700.0;
  c.init.mode = InitConfig::Mode::explicit_vector;
  c.init.values.assign(7, 100.0);
  c.init.values.insert(c.init.values.end(), 3, 0.0);
  c.step_rate = 0.2;
  c.termination.grad_tol = 1e-6;
  c.termination.max_iterations = 60000;
  return c;
}

// Delay experiments run on a 2-hop ring of ten generators; delays are the
// object of study, maps stay linear.
ScenarioConfig delay_base(const std::string& name, double eta) {
  ScenarioConfig c;
  c.name = name;
  c.topology.kind = TopologyConfig::Kind::k_hop_cycle;
  c.topology.n = 10;
  c.topology.hops = 2;
  c.topology.weight = 1.0;
  c.generators = 10;
  c.batteries = 0;
  RandomCosts rc;
  rc.seed = 303;
  rc.gamma = {0.05, 0.15};
  rc.beta = {19.0, 21.0};
  rc.alpha = {0.0, 50.0};
  c.random_costs = rc;
  c.generator_box = Box{20.0, 200.0};
  c.penalty.epsilon = 0.5;
  c.demand = 700.0;
  c.step_rate = eta;
  c.delay = DelayConfig{0, DelayMode::time_varying, 7};
  c.termination.grad_tol = 1e-6;
  c.termination.max_iterations = 30000;
  return c;
}

SweepSpec delay_sweep(double eta) {
  SweepSpec s;
  s.step_rates = {eta};
  s.tau_bars = {0, 1, 2, 3, 4, 5};
  s.modes = {DelayMode::time_varying, DelayMode::time_invariant};
  return s;
}

}  // namespace

Preset preset(const std::string& name) {
  if (name == "fig1") {
    Preset p;
    p.name = "fig1";
    p.description =
        "cycle-10 generators, b=700, boxes [20,90], eta=1: linear vs accelerated "
        "vs saturation vs sgn-composite node maps";
    {
      PresetRun r{"fig1_linear", fig1_base()};
      r.config.name = r.name;
      p.runs.push_back(std::move(r));
    }
    {
      PresetRun r{"fig1_accelerated", fig1_base()};
      r.config.name = r.name;
      r.config.momentum = 0.5;
      p.runs.push_back(std::move(r));
    }
    {
      PresetRun r{"fig1_saturation", fig1_base()};
      r.config.name = r.name;
      r.config.node_map.kind = NonlinearMap::Kind::saturation;
      r.config.node_map.limit = 0.2;
      p.runs.push_back(std::move(r));
    }
    {
      PresetRun r{"fig1_sgn", fig1_base()};
      r.config.name = r.name;
      r.config.node_map.kind = NonlinearMap::Kind::sgn_composite;
      r.config.node_map.mu1 = 0.5;
      r.config.node_map.mu2 = 1.1;
      p.runs.push_back(std::move(r));
    }
    return p;
  }

  if (name == "fig2") {
    Preset p;
    p.name = "fig2";
    p.description =
        "2-hop cycle, 7 generators + 3 batteries, b=700, boxes gen [20,200] / "
        "bat [0,200], init 100/0: linear vs sgn-composite (mu1=0.5, mu2=1.1)";
    {
      PresetRun r{"fig2_linear", fig2_base()};
      r.config.name = r.name;
      p.runs.push_back(std::move(r));
    }
    {
      PresetRun r{"fig2_sgn", fig2_base()};
      r.config.name = r.name;
      r.config.node_map.kind = NonlinearMap::Kind::sgn_composite;
      r.config.node_map.mu1 = 0.5;
      r.config.node_map.mu2 = 1.1;
      r.config.output.per_node_states = true;
      p.runs.push_back(std::move(r));
    }
    return p;
  }

  if (name == "fig3") {
    Preset p;
    p.name = "fig3";
    p.description = "delay sweep at eta=0.5: tau_bar 0..5, both delay modes";
    p.runs.push_back(PresetRun{"fig3", delay_base("fig3", 0.5)});
    p.sweep = delay_sweep(0.5);
    return p;
  }

  if (name == "fig4") {
    Preset p;
    p.name = "fig4";
    p.description = "delay sweep at the halved rate eta=0.25: tau_bar 0..5, both modes";
    p.runs.push_back(PresetRun{"fig4", delay_base("fig4", 0.25)});
    p.sweep = delay_sweep(0.25);
    return p;
  }

  if (name == "fig5") {
    Preset p;
    p.name = "fig5";
    p.description =
        "state evolution under time-varying tau_bar=5 delays at eta=0.5 "
        "(unstable) vs eta=0.25 (converged)";
    for (double eta : {0.5, 0.25}) {
      PresetRun r{eta == 0.5 ? "fig5_eta_0.5" : "fig5_eta_0.25", delay_base("fig5", eta)};
      r.config.name = r.name;
      r.config.delay = DelayConfig{5, DelayMode::time_varying, 7};
      r.config.output.per_node_states = true;
      r.config.termination.max_iterations = 20000;
      p.runs.push_back(std::move(r));
    }
    return p;
  }

  throw std::invalid_argument("unknown preset '" + name +
                              "'; available: fig1 fig2 fig3 fig4 fig5");
}

std::vector<std::string> preset_names() { return {"fig1", "fig2", "fig3", "fig4", "fig5"}; }

}  // namespace dra
