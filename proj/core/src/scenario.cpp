#include "dra/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>

#include "dra/rng.hpp"

namespace dra {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) fail("unknown key '" + key + "' in '" + where + "'");
  }
}

double get_num(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) fail("missing key '" + std::string(key) + "' in '" + where + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) fail("key '" + where + "." + key + "' must be a number");
  return v.get<double>();
}

double get_num_or(const json& obj, const std::string& where, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) fail("key '" + where + "." + key + "' must be a number");
  return v.get<double>();
}

long get_int(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) fail("missing key '" + std::string(key) + "' in '" + where + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail("key '" + where + "." + key + "' must be an integer");
  return v.get<long>();
}

std::pair<double, double> get_range(const json& obj, const std::string& where,
                                    const char* key, std::pair<double, double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail("key '" + where + "." + key + "' must be a [lo, hi] pair");
  }
  const double lo = v[0].get<double>();
  const double hi = v[1].get<double>();
  if (!(lo <= hi)) fail("key '" + where + "." + key + "' needs lo <= hi");
  return {lo, hi};
}

Box get_box(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail("'" + where + "' must be a [lo, hi] pair");
  }
  Box b{v[0].get<double>(), v[1].get<double>()};
  if (!(b.lo < b.hi)) fail("'" + where + "' needs lo < hi");
  return b;
}

TopologyConfig parse_topology(const json& obj) {
  expect_keys(obj, "topology", {"kind", "n", "hops", "weight", "edges"});
  TopologyConfig t;
  const std::string kind = obj.value("kind", "cycle");
  if (kind == "cycle") {
    t.kind = TopologyConfig::Kind::cycle;
  } else if (kind == "k_hop_cycle") {
    t.kind = TopologyConfig::Kind::k_hop_cycle;
  } else if (kind == "edges") {
    t.kind = TopologyConfig::Kind::edges;
  } else {
    fail("topology.kind must be cycle, k_hop_cycle or edges, got '" + kind + "'");
  }
  t.n = static_cast<int>(get_int(obj, "topology", "n"));
  t.weight = get_num_or(obj, "topology", "weight", 1.0);
  if (t.kind == TopologyConfig::Kind::k_hop_cycle) {
    t.hops = static_cast<int>(get_int(obj, "topology", "hops"));
  }
  if (t.kind == TopologyConfig::Kind::edges) {
    if (!obj.contains("edges") || !obj.at("edges").is_array()) {
      fail("topology.edges must be an array of [i, j, weight] triples");
    }
    for (const json& e : obj.at("edges")) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) {
        fail("topology.edges entries must be [i, j] or [i, j, weight]");
      }
      Edge edge;
      edge.i = e[0].get<int>();
      edge.j = e[1].get<int>();
      edge.weight = e.size() == 3 ? e[2].get<double>() : t.weight;
      t.edges.push_back(edge);
    }
  }
  return t;
}

MapConfig parse_map(const json& obj, const std::string& where) {
  expect_keys(obj, where, {"kind", "limit", "rho", "mu1", "mu2", "knots"});
  MapConfig m;
  const std::string kind = obj.value("kind", "identity");
  if (kind == "identity") {
    m.kind = NonlinearMap::Kind::identity;
  } else if (kind == "saturation") {
    m.kind = NonlinearMap::Kind::saturation;
    m.limit = get_num(obj, where, "limit");
  } else if (kind == "log_quantizer") {
    m.kind = NonlinearMap::Kind::log_quantizer;
    m.rho = get_num_or(obj, where, "rho", 1.2);
  } else if (kind == "sgn_composite") {
    m.kind = NonlinearMap::Kind::sgn_composite;
    m.mu1 = get_num_or(obj, where, "mu1", 0.5);
    m.mu2 = get_num_or(obj, where, "mu2", 1.1);
  } else if (kind == "table") {
    m.kind = NonlinearMap::Kind::table;
    if (!obj.contains("knots") || !obj.at("knots").is_array()) {
      fail(where + ".knots must be an array of [u, g(u)] pairs");
    }
    for (const json& k : obj.at("knots")) {
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
        fail(where + ".knots entries must be [u, g(u)] pairs");
      }
      m.knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
  } else {
    fail(where + ".kind must be identity, saturation, log_quantizer, sgn_composite "
                 "or table");
  }
  return m;
}

const char* map_kind_name(NonlinearMap::Kind k) {
  switch (k) {
    case NonlinearMap::Kind::identity: return "identity";
    case NonlinearMap::Kind::saturation: return "saturation";
    case NonlinearMap::Kind::log_quantizer: return "log_quantizer";
    case NonlinearMap::Kind::sgn_composite: return "sgn_composite";
    case NonlinearMap::Kind::table: return "table";
  }
  return "?";
}

}  // namespace

NonlinearMap MapConfig::build() const {
  switch (kind) {
    case NonlinearMap::Kind::identity: return NonlinearMap::identity();
    case NonlinearMap::Kind::saturation: return NonlinearMap::saturation(limit);
    case NonlinearMap::Kind::log_quantizer: return NonlinearMap::log_quantizer(rho);
    case NonlinearMap::Kind::sgn_composite: return NonlinearMap::sgn_composite(mu1, mu2);
    case NonlinearMap::Kind::table: return NonlinearMap::table(knots);
  }
  fail("unknown nonlinearity kind");
}

void ScenarioConfig::validate() const {
  if (topology.n < 1) fail("topology.n must be >= 1");
  if (generators < 0 || batteries < 0) fail("roles counts must be >= 0");
  if (generators + batteries != topology.n) {
    fail("roles mismatch: " + std::to_string(generators) + " generators + " +
         std::to_string(batteries) + " batteries != " + std::to_string(topology.n) +
         " nodes");
  }
  if (explicit_costs && random_costs) fail("costs: give either 'explicit' or 'random'");
  if (!explicit_costs && !random_costs) fail("costs: one of 'explicit' or 'random' required");
  if (explicit_costs && static_cast<int>(explicit_costs->size()) != topology.n) {
    fail("cost count mismatch: " + std::to_string(explicit_costs->size()) +
         " entries for " + std::to_string(topology.n) + " nodes");
  }
  if (per_node_boxes && static_cast<int>(per_node_boxes->size()) != topology.n) {
    fail("boxes.per_node count mismatch: " + std::to_string(per_node_boxes->size()) +
         " entries for " + std::to_string(topology.n) + " nodes");
  }
  if (batteries > 0 && (generator_box || per_node_boxes) && !battery_box && !per_node_boxes) {
    fail("boxes.battery required when batteries > 0");
  }
  if (battery_box && !generator_box && !per_node_boxes) {
    fail("boxes.generator required when boxes.battery is given");
  }
  if (init.mode == InitConfig::Mode::explicit_vector &&
      static_cast<int>(init.values.size()) != topology.n) {
    fail("init.values count mismatch: " + std::to_string(init.values.size()) +
         " entries for " + std::to_string(topology.n) + " nodes");
  }
  if (step_rate && !(*step_rate > 0.0)) fail("step_rate must be > 0");
  if (delay && delay->tau_bar < 0) fail("delay.tau_bar must be >= 0");
  if (delay && node_map.kind != NonlinearMap::Kind::identity) {
    fail("delay requires an identity node map; only the link map may be nonlinear");
  }
  if (momentum != 0.0 && (node_map.kind != NonlinearMap::Kind::identity ||
                          link_map.kind != NonlinearMap::Kind::identity)) {
    fail("momentum baseline requires identity maps");
  }
  if (momentum != 0.0 && delay) {
    fail("momentum baseline is delay-free; remove the delay block");
  }
  if (!std::isfinite(demand)) fail("demand must be finite");
  if (!(termination.grad_tol > 0.0)) fail("termination.grad_tol must be > 0");
  if (termination.max_iterations < 0) fail("termination.max_iters must be >= 0");
}

ScenarioConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("config root must be a JSON object");
  expect_keys(root, "config",
              {"name", "topology", "roles", "costs", "boxes", "penalty", "regularizer",
               "nonlinearity", "demand", "init", "step_rate", "momentum", "delay",
               "termination", "output"});

  ScenarioConfig c;
  c.name = root.value("name", "scenario");

  if (!root.contains("topology")) fail("missing key 'topology'");
  c.topology = parse_topology(root.at("topology"));

  if (!root.contains("roles")) fail("missing key 'roles'");
  const json& roles = root.at("roles");
  expect_keys(roles, "roles", {"generators", "batteries"});
  c.generators = static_cast<int>(get_int(roles, "roles", "generators"));
  c.batteries = roles.contains("batteries")
                    ? static_cast<int>(get_int(roles, "roles", "batteries"))
                    : 0;

  if (!root.contains("costs")) fail("missing key 'costs'");
  const json& costs = root.at("costs");
  expect_keys(costs, "costs", {"explicit", "random"});
  if (costs.contains("explicit")) {
    std::vector<CostEntry> entries;
    for (const json& e : costs.at("explicit")) {
      expect_keys(e, "costs.explicit[]", {"gamma", "beta", "alpha"});
      CostEntry entry;
      entry.gamma = get_num_or(e, "costs.explicit[]", "gamma", 0.0);
      entry.beta = get_num_or(e, "costs.explicit[]", "beta", 0.0);
      entry.alpha = get_num_or(e, "costs.explicit[]", "alpha", 0.0);
      entries.push_back(entry);
    }
    c.explicit_costs = std::move(entries);
  }
  if (costs.contains("random")) {
    const json& r = costs.at("random");
    expect_keys(r, "costs.random",
                {"seed", "gamma", "beta", "alpha", "battery_beta", "battery_alpha"});
    RandomCosts rc;
    rc.seed = static_cast<std::uint64_t>(get_int(r, "costs.random", "seed"));
    rc.gamma = get_range(r, "costs.random", "gamma", rc.gamma);
    rc.beta = get_range(r, "costs.random", "beta", rc.beta);
    rc.alpha = get_range(r, "costs.random", "alpha", rc.alpha);
    rc.battery_beta = get_range(r, "costs.random", "battery_beta", rc.battery_beta);
    rc.battery_alpha = get_range(r, "costs.random", "battery_alpha", rc.battery_alpha);
    c.random_costs = rc;
  }

  if (root.contains("boxes")) {
    const json& boxes = root.at("boxes");
    expect_keys(boxes, "boxes", {"generator", "battery", "per_node"});
    if (boxes.contains("per_node")) {
      std::vector<Box> per;
      for (const json& b : boxes.at("per_node")) per.push_back(get_box(b, "boxes.per_node[]"));
      c.per_node_boxes = std::move(per);
    }
    if (boxes.contains("generator")) c.generator_box = get_box(boxes.at("generator"), "boxes.generator");
    if (boxes.contains("battery")) c.battery_box = get_box(boxes.at("battery"), "boxes.battery");
  }

  if (root.contains("penalty")) {
    const json& pen = root.at("penalty");
    expect_keys(pen, "penalty", {"epsilon", "kind", "sigma"});
    if (pen.contains("epsilon")) c.penalty.epsilon = get_num(pen, "penalty", "epsilon");
    const std::string kind = pen.value("kind", "power");
    if (kind == "power") {
      c.penalty.kind = PenaltyKind::power;
    } else if (kind == "softplus") {
      c.penalty.kind = PenaltyKind::softplus;
    } else {
      fail("penalty.kind must be power or softplus");
    }
    c.penalty.sigma = get_num_or(pen, "penalty", "sigma", 2.0);
  } else {
    c.defaults_applied.push_back("penalty: power kind with sigma = 2");
  }

  c.regularizer = get_num_or(root, "config", "regularizer", 1e-3);
  if (!root.contains("regularizer")) {
    c.defaults_applied.push_back("regularizer = 0.001 on linear costs");
  }

  if (root.contains("nonlinearity")) {
    const json& nl = root.at("nonlinearity");
    expect_keys(nl, "nonlinearity", {"node", "link"});
    if (nl.contains("node")) c.node_map = parse_map(nl.at("node"), "nonlinearity.node");
    if (nl.contains("link")) c.link_map = parse_map(nl.at("link"), "nonlinearity.link");
  } else {
    c.defaults_applied.push_back("nonlinearity: identity node and link maps");
  }

  if (!root.contains("demand")) fail("missing key 'demand'");
  c.demand = get_num(root, "config", "demand");

  if (root.contains("init")) {
    const json& init = root.at("init");
    expect_keys(init, "init", {"mode", "values"});
    const std::string mode = init.value("mode", "equal_surplus");
    if (mode == "equal_surplus") {
      c.init.mode = InitConfig::Mode::equal_surplus;
    } else if (mode == "explicit") {
      c.init.mode = InitConfig::Mode::explicit_vector;
      if (!init.contains("values") || !init.at("values").is_array()) {
        fail("init.values required for explicit initialization");
      }
      for (const json& v : init.at("values")) c.init.values.push_back(v.get<double>());
    } else {
      fail("init.mode must be equal_surplus or explicit");
    }
  } else {
    c.defaults_applied.push_back("init.mode = equal_surplus");
  }

  if (root.contains("step_rate")) {
    const json& sr = root.at("step_rate");
    if (sr.is_string()) {
      if (sr.get<std::string>() != "auto") fail("step_rate must be a number or \"auto\"");
    } else if (sr.is_number()) {
      c.step_rate = sr.get<double>();
    } else {
      fail("step_rate must be a number or \"auto\"");
    }
  } else {
    c.defaults_applied.push_back("step_rate = auto (0.99 x step bound)");
  }

  c.momentum = get_num_or(root, "config", "momentum", 0.0);

  if (root.contains("delay")) {
    const json& d = root.at("delay");
    expect_keys(d, "delay", {"tau_bar", "mode", "seed"});
    DelayConfig dc;
    dc.tau_bar = static_cast<int>(get_int(d, "delay", "tau_bar"));
    const std::string mode = d.value("mode", "time_varying");
    if (mode == "time_varying") {
      dc.mode = DelayMode::time_varying;
    } else if (mode == "time_invariant") {
      dc.mode = DelayMode::time_invariant;
    } else {
      fail("delay.mode must be time_varying or time_invariant");
    }
    dc.seed = d.contains("seed") ? static_cast<std::uint64_t>(get_int(d, "delay", "seed")) : 0;
    c.delay = dc;
  }

  if (root.contains("termination")) {
    const json& t = root.at("termination");
    expect_keys(t, "termination", {"grad_tol", "max_iters"});
    c.termination.grad_tol = get_num_or(t, "termination", "grad_tol", 1e-6);
    if (t.contains("max_iters")) {
      c.termination.max_iterations = get_int(t, "termination", "max_iters");
    }
  } else {
    c.defaults_applied.push_back("termination: grad_tol = 1e-06, max_iters = 100000");
  }

  if (root.contains("output")) {
    const json& o = root.at("output");
    expect_keys(o, "output", {"per_node_states"});
    if (o.contains("per_node_states")) {
      if (!o.at("per_node_states").is_boolean()) fail("output.per_node_states must be a bool");
      c.output.per_node_states = o.at("per_node_states").get<bool>();
    }
  }

  c.validate();
  return c;
}

std::string config_echo_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  json topo;
  switch (c.topology.kind) {
    case TopologyConfig::Kind::cycle: topo["kind"] = "cycle"; break;
    case TopologyConfig::Kind::k_hop_cycle:
      topo["kind"] = "k_hop_cycle";
      topo["hops"] = c.topology.hops;
      break;
    case TopologyConfig::Kind::edges: topo["kind"] = "edges"; break;
  }
  topo["n"] = c.topology.n;
  topo["weight"] = c.topology.weight;
  j["topology"] = topo;
  j["roles"] = {{"generators", c.generators}, {"batteries", c.batteries}};
  if (c.random_costs) {
    j["costs"]["random"] = {{"seed", c.random_costs->seed},
                            {"gamma", {c.random_costs->gamma.first, c.random_costs->gamma.second}},
                            {"beta", {c.random_costs->beta.first, c.random_costs->beta.second}},
                            {"alpha", {c.random_costs->alpha.first, c.random_costs->alpha.second}}};
  } else if (c.explicit_costs) {
    json arr = json::array();
    for (const CostEntry& e : *c.explicit_costs) {
      arr.push_back({{"gamma", e.gamma}, {"beta", e.beta}, {"alpha", e.alpha}});
    }
    j["costs"]["explicit"] = arr;
  }
  if (c.generator_box) j["boxes"]["generator"] = {c.generator_box->lo, c.generator_box->hi};
  if (c.battery_box) j["boxes"]["battery"] = {c.battery_box->lo, c.battery_box->hi};
  if (c.penalty.epsilon) j["penalty"]["epsilon"] = *c.penalty.epsilon;
  j["penalty"]["kind"] = c.penalty.kind == PenaltyKind::power ? "power" : "softplus";
  j["penalty"]["sigma"] = c.penalty.sigma;
  j["regularizer"] = c.regularizer;
  j["nonlinearity"]["node"]["kind"] = map_kind_name(c.node_map.kind);
  j["nonlinearity"]["link"]["kind"] = map_kind_name(c.link_map.kind);
  if (c.node_map.kind == NonlinearMap::Kind::sgn_composite) {
    j["nonlinearity"]["node"]["mu1"] = c.node_map.mu1;
    j["nonlinearity"]["node"]["mu2"] = c.node_map.mu2;
  }
  if (c.node_map.kind == NonlinearMap::Kind::saturation) {
    j["nonlinearity"]["node"]["limit"] = c.node_map.limit;
  }
  if (c.link_map.kind == NonlinearMap::Kind::sgn_composite) {
    j["nonlinearity"]["link"]["mu1"] = c.link_map.mu1;
    j["nonlinearity"]["link"]["mu2"] = c.link_map.mu2;
  }
  if (c.link_map.kind == NonlinearMap::Kind::saturation) {
    j["nonlinearity"]["link"]["limit"] = c.link_map.limit;
  }
  for (const auto& [which, map] :
       {std::pair<const char*, const MapConfig*>{"node", &c.node_map},
        std::pair<const char*, const MapConfig*>{"link", &c.link_map}}) {
    if (map->kind == NonlinearMap::Kind::table) {
      json knots = json::array();
      for (const auto& [u, v] : map->knots) knots.push_back({u, v});
      j["nonlinearity"][which]["knots"] = knots;
    }
  }
  j["demand"] = c.demand;
  j["init"]["mode"] =
      c.init.mode == InitConfig::Mode::equal_surplus ? "equal_surplus" : "explicit";
  if (c.step_rate) {
    j["step_rate"] = *c.step_rate;
  } else {
    j["step_rate"] = "auto";
  }
  if (c.momentum != 0.0) j["momentum"] = c.momentum;
  if (c.delay) {
    j["delay"] = {{"tau_bar", c.delay->tau_bar},
                  {"mode", c.delay->mode == DelayMode::time_varying ? "time_varying"
                                                                    : "time_invariant"},
                  {"seed", c.delay->seed}};
  }
  j["termination"] = {{"grad_tol", c.termination.grad_tol},
                      {"max_iters", c.termination.max_iterations}};
  j["output"] = {{"per_node_states", c.output.per_node_states}};
  j["defaults_applied"] = c.defaults_applied;
  return j.dump(2);
}

BuiltScenario build_scenario(const ScenarioConfig& config) {
  config.validate();

  Network net = [&] {
    switch (config.topology.kind) {
      case TopologyConfig::Kind::cycle:
        return Network::cycle(config.topology.n, config.topology.weight);
      case TopologyConfig::Kind::k_hop_cycle:
        return Network::k_hop_cycle(config.topology.n, config.topology.hops,
                                    config.topology.weight);
      case TopologyConfig::Kind::edges:
        return Network::from_edges(config.topology.n, config.topology.edges);
    }
    fail("unreachable topology kind");
  }();

  const int n = config.topology.n;
  std::vector<NodeRole> roles;
  roles.reserve(n);
  for (int i = 0; i < n; ++i) {
    roles.push_back(i < config.generators ? NodeRole::generator : NodeRole::battery);
  }

  // Cost coefficients: explicit entries, or a seeded draw (generators first,
  // in node order, so a seed pins the whole instance).
  std::vector<CostEntry> entries;
  if (config.explicit_costs) {
    entries = *config.explicit_costs;
  } else {
    SplitMix64 rng(config.random_costs->seed);
    const RandomCosts& rc = *config.random_costs;
    for (int i = 0; i < n; ++i) {
      CostEntry e;
      if (roles[i] == NodeRole::generator) {
        e.gamma = rng.uniform(rc.gamma.first, rc.gamma.second);
        e.beta = rng.uniform(rc.beta.first, rc.beta.second);
        e.alpha = rng.uniform(rc.alpha.first, rc.alpha.second);
      } else {
        e.beta = rng.uniform(rc.battery_beta.first, rc.battery_beta.second);
        e.alpha = rng.uniform(rc.battery_alpha.first, rc.battery_alpha.second);
      }
      entries.push_back(e);
    }
  }

  // Boxes; when none are configured, penalties stay off and a wide default
  // box is synthesized for initialization only.
  BuiltScenario built;
  const bool have_boxes = config.per_node_boxes || config.generator_box;
  if (config.per_node_boxes) {
    built.boxes = *config.per_node_boxes;
  } else if (config.generator_box) {
    for (int i = 0; i < n; ++i) {
      built.boxes.push_back(roles[i] == NodeRole::generator ? *config.generator_box
                                                            : *config.battery_box);
    }
  } else {
    const double span = std::max(2.0 * std::abs(config.demand), 100.0);
    built.boxes.assign(n, Box{-span, span});
  }

  double max_gamma = 0.0;
  for (const CostEntry& e : entries) max_gamma = std::max(max_gamma, e.gamma);
  const double epsilon =
      config.penalty.epsilon ? *config.penalty.epsilon
                             : (max_gamma > 0.0 ? 10.0 * max_gamma : 0.1);

  std::vector<NodeCost> costs;
  costs.reserve(n);
  for (int i = 0; i < n; ++i) {
    const CostEntry& e = entries[i];
    NodeCost cost = e.gamma > 0.0 ? NodeCost::quadratic(e.gamma, e.beta, e.alpha)
                                  : NodeCost::linear(e.beta, e.alpha)
                                        .with_regularizer(config.regularizer);
    if (have_boxes && epsilon > 0.0) {
      cost.with_box(built.boxes[i], epsilon, config.penalty.kind, config.penalty.sigma);
    }
    costs.push_back(cost);
  }

  built.problem = Problem{std::move(net), std::move(costs), std::move(roles), config.demand};
  built.problem.validate();

  built.g_node = config.node_map.build();
  built.g_link = config.link_map.build();
  built.termination = config.termination;

  if (config.init.mode == InitConfig::Mode::equal_surplus) {
    built.z0 = feasible_init_equal_surplus(built.problem.roles, config.demand, built.boxes);
  } else {
    built.z0 = Eigen::Map<const Eigen::VectorXd>(config.init.values.data(),
                                                 static_cast<long>(config.init.values.size()));
    validate_explicit_init(built.problem.roles, config.demand,
                           have_boxes ? std::span<const Box>(built.boxes)
                                      : std::span<const Box>(),
                           built.z0);
  }

  try {
    built.oracle = solve_centralized(built.problem);
  } catch (const std::invalid_argument&) {
    built.oracle.reset();  // not strictly convex; residuals stay undefined
  }

  const int tau_bar = config.delay ? config.delay->tau_bar : 0;
  try {
    built.bound = compute_step_bound(built.problem, built.g_link, tau_bar, built.boxes);
  } catch (const std::domain_error&) {
    built.bound.reset();
  }

  if (config.step_rate) {
    built.eta_tau = *config.step_rate;
    built.eta_auto = false;
  } else {
    if (!built.bound) {
      fail("step_rate: auto requires a sector-bounded link map; give a number instead");
    }
    built.eta_tau = 0.99 * built.bound->bound;
    built.eta_auto = true;
  }

  if (config.delay) {
    built.schedule = DelaySchedule::sample(built.problem.net, config.delay->tau_bar,
                                           config.delay->mode, config.delay->seed);
  }
  built.momentum = config.momentum;
  return built;
}

RunResult execute(const BuiltScenario& built, bool keep_states) {
  RunOptions options;
  options.keep_states = keep_states;
  if (built.oracle) options.optimal_cost = built.oracle->optimal_cost;
  options.momentum = built.momentum;

  if (built.schedule) {
    return run_delayed(built.problem, built.g_link, built.eta_tau, built.z0,
                       *built.schedule, built.termination, options);
  }
  return run_protocol(built.problem, built.g_node, built.g_link, built.eta_tau, built.z0,
                      built.termination, options);
}

}  // namespace dra
