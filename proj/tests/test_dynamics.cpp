#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dra/analysis.hpp"
#include "dra/dynamics.hpp"
#include "dra/rng.hpp"

using namespace dra;

namespace {

Problem two_generators() {
  Problem p;
  p.net = Network::from_edges(2, std::vector<Edge>{{0, 1, 1.0}});
  p.costs = {NodeCost::quadratic(1.0, 0.0), NodeCost::quadratic(1.0, 0.0)};
  p.roles = {NodeRole::generator, NodeRole::generator};
  p.demand = 4.0;
  return p;
}

Problem seeded_cycle(std::uint64_t seed, int n = 10) {
  SplitMix64 rng(seed);
  Problem p;
  p.net = Network::cycle(n, 1.0);
  for (int i = 0; i < n; ++i) {
    p.costs.push_back(NodeCost::quadratic(rng.uniform(0.04, 0.12), rng.uniform(10.0, 30.0))
                          .with_box(Box{20.0, 120.0}, 0.2));
    p.roles.push_back(NodeRole::generator);
  }
  p.demand = n * 70.0;
  return p;
}

Problem random_problem(SplitMix64& rng, int max_nodes = 8) {
  const int n = 2 + static_cast<int>(rng.next_below(max_nodes - 1));
  std::vector<Edge> edges;
  for (int i = 1; i < n; ++i) {
    edges.push_back({static_cast<int>(rng.next_below(i)), i, rng.uniform(0.5, 2.0)});
  }
  Problem p;
  p.net = Network::from_edges(n, edges);
  for (int i = 0; i < n; ++i) {
    p.costs.push_back(NodeCost::quadratic(rng.uniform(0.05, 0.5), rng.uniform(-5.0, 20.0)));
    p.roles.push_back(rng.next_double() < 0.75 ? NodeRole::generator : NodeRole::battery);
  }
  p.demand = rng.uniform(-50.0, 200.0);
  return p;
}

std::vector<NonlinearMap> odd_maps() {
  return {NonlinearMap::identity(), NonlinearMap::saturation(2.0),
          NonlinearMap::log_quantizer(1.2), NonlinearMap::sgn_composite(0.5, 1.1)};
}

}  // namespace

TEST_CASE("feasible initialization") {
  // 7 generators at 100 MW and 3 batteries at 0 MW meet b = 700 exactly.
  std::vector<NodeRole> roles(7, NodeRole::generator);
  roles.insert(roles.end(), 3, NodeRole::battery);
  std::vector<Box> boxes(7, Box{20.0, 200.0});
  boxes.insert(boxes.end(), 3, Box{0.0, 200.0});
  Eigen::VectorXd explicit_init(10);
  explicit_init << 100, 100, 100, 100, 100, 100, 100, 0, 0, 0;
  CHECK_NOTHROW(validate_explicit_init(roles, 700.0, boxes, explicit_init));

  // Equal-surplus spread of 700 over ten identical generators gives 70 each.
  std::vector<NodeRole> gens(10, NodeRole::generator);
  std::vector<Box> gen_boxes(10, Box{20.0, 90.0});
  const Eigen::VectorXd z0 = feasible_init_equal_surplus(gens, 700.0, gen_boxes);
  for (int i = 0; i < 10; ++i) CHECK(z0[i] == doctest::Approx(70.0).epsilon(1e-12));
  double sum = 0.0;
  for (int i = 0; i < 10; ++i) sum += z0[i];
  CHECK(std::abs(sum - 700.0) <= 1e-10);

  // Demand beyond capacity: 10 * 90 = 900 < 1000.
  CHECK_THROWS_AS(feasible_init_equal_surplus(gens, 1000.0, gen_boxes),
                  std::invalid_argument);

  // Explicit vector violating the balance is rejected.
  Eigen::VectorXd bad = Eigen::VectorXd::Constant(10, 71.0);
  CHECK_THROWS_AS(validate_explicit_init(gens, 700.0, gen_boxes, bad),
                  std::invalid_argument);
}

TEST_CASE("problem validation and helpers") {
  Problem p = two_generators();
  Eigen::VectorXd z(2);
  z << 3.0, 1.0;
  const Eigen::VectorXd g = p.scaled_gradients(z);
  CHECK(g[0] == doctest::Approx(6.0));
  CHECK(g[1] == doctest::Approx(2.0));

  Problem missing_cost = two_generators();
  missing_cost.costs.pop_back();
  CHECK_THROWS_WITH_AS(missing_cost.validate(), doctest::Contains("cost count"),
                       std::invalid_argument);

  Problem missing_role = two_generators();
  missing_role.roles.pop_back();
  CHECK_THROWS_WITH_AS(missing_role.validate(), doctest::Contains("role count"),
                       std::invalid_argument);

  Problem disconnected = two_generators();
  disconnected.net = Network::from_edges(2, std::vector<Edge>{});
  CHECK_THROWS_WITH_AS(disconnected.validate(), doctest::Contains("connected"),
                       std::invalid_argument);

  // Explicit-init checks: size, boxes, box membership.
  const std::vector<NodeRole> roles(2, NodeRole::generator);
  const std::vector<Box> boxes(2, Box{0.0, 3.0});
  Eigen::VectorXd wrong_size(3);
  wrong_size << 1, 1, 2;
  CHECK_THROWS_AS(validate_explicit_init(roles, 4.0, boxes, wrong_size),
                  std::invalid_argument);
  Eigen::VectorXd outside(2);
  outside << 3.5, 0.5;  // balances to 4 but leaves the box
  CHECK_THROWS_WITH_AS(validate_explicit_init(roles, 4.0, boxes, outside),
                       doctest::Contains("outside its box"), std::invalid_argument);
  CHECK_THROWS_AS(
      feasible_init_equal_surplus(roles, 4.0, std::vector<Box>(1, Box{0.0, 3.0})),
      std::invalid_argument);
}

TEST_CASE("protocol right-hand side") {
  const Problem p = two_generators();
  const NonlinearMap id = NonlinearMap::identity();

  Eigen::VectorXd z(2);
  z << 3.0, 1.0;
  const Eigen::VectorXd rhs = protocol_rhs(p, z, id, id, 1.0);
  CHECK(rhs[0] == doctest::Approx(-4.0));  // g(2 - 6)
  CHECK(rhs[1] == doctest::Approx(4.0));

  // Saturation as the node map clamps the same difference to +-1.
  const Eigen::VectorXd rhs_sat = protocol_rhs(p, z, NonlinearMap::saturation(1.0), id, 1.0);
  CHECK(rhs_sat[0] == doctest::Approx(-1.0));
  CHECK(rhs_sat[1] == doctest::Approx(1.0));

  // At an equalized-gradient point the rhs vanishes for every map pair.
  Eigen::VectorXd opt(2);
  opt << 2.0, 2.0;
  for (const NonlinearMap& gn : odd_maps()) {
    for (const NonlinearMap& gl : odd_maps()) {
      const Eigen::VectorXd r = protocol_rhs(p, opt, gn, gl, 1.0);
      CHECK(r.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("rate-level conservation: sum a_i rhs_i = 0 over random instances") {
  SplitMix64 rng(41);
  const auto maps = odd_maps();
  int checked = 0;
  while (checked < 1000) {
    const Problem p = random_problem(rng);
    Eigen::VectorXd z(p.size());
    for (int i = 0; i < p.size(); ++i) z[i] = rng.uniform(-30.0, 30.0);
    const NonlinearMap& gn = maps[rng.next_below(maps.size())];
    const NonlinearMap& gl = maps[rng.next_below(maps.size())];
    const Eigen::VectorXd rhs = protocol_rhs(p, z, gn, gl, rng.uniform(0.1, 2.0));
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s += p.sign(i) * rhs[i];
    CHECK(std::abs(s) <= 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
    ++checked;
  }
}

TEST_CASE("Euler step") {
  const Problem p = two_generators();
  const NonlinearMap id = NonlinearMap::identity();

  SimState state;
  state.z.resize(2);
  state.z << 3.0, 1.0;
  REQUIRE(step_euler(p, state, id, id, 0.1));
  CHECK(state.z[0] == doctest::Approx(2.6));
  CHECK(state.z[1] == doctest::Approx(1.4));
  CHECK(state.iteration == 1);
  CHECK(std::abs(p.feasibility_gap(state.z)) <= 1e-9 * 2);

  // A fixed point stays put.
  SimState at_opt;
  at_opt.z.resize(2);
  at_opt.z << 2.0, 2.0;
  REQUIRE(step_euler(p, at_opt, id, id, 0.1));
  CHECK(at_opt.z[0] == 2.0);
  CHECK(at_opt.z[1] == 2.0);

  // Overflowing update reports instability and freezes the state.
  SimState frozen;
  frozen.z.resize(2);
  frozen.z << 3.0, 1.0;
  CHECK_FALSE(step_euler(p, frozen, id, id, 1e308));
  CHECK(frozen.z[0] == 3.0);
  CHECK(frozen.iteration == 0);
}

TEST_CASE("balance is conserved through long runs, including unstable ones") {
  const Problem p = seeded_cycle(42);
  std::vector<Box> boxes(10, Box{20.0, 120.0});
  const Eigen::VectorXd z0 = feasible_init_equal_surplus(p.roles, p.demand, boxes);
  Termination term;
  term.max_iterations = 3000;

  for (const NonlinearMap& gn : odd_maps()) {
    const RunResult run = run_protocol(p, gn, NonlinearMap::identity(), 0.05, z0, term);
    CHECK(run.max_abs_feas_gap <= 1e-9 * p.size() * std::max(1.0, run.max_abs_state));
  }

  // Far above the stable rate the run diverges yet stays feasible.
  const RunResult wild =
      run_protocol(p, NonlinearMap::identity(), NonlinearMap::identity(), 50.0, z0, term);
  CHECK(wild.status == RunStatus::unstable);
  CHECK(wild.max_abs_feas_gap <= 1e-9 * p.size() * std::max(1.0, wild.max_abs_state));
}

TEST_CASE("run_protocol terminates immediately at a fixed point") {
  const Problem p = two_generators();
  Eigen::VectorXd opt(2);
  opt << 2.0, 2.0;
  const RunResult run = run_protocol(p, NonlinearMap::identity(), NonlinearMap::identity(),
                                     0.1, opt, Termination{});
  CHECK(run.status == RunStatus::converged);
  CHECK(run.iterations == 0);
  CHECK(run.metrics.size() == 1);
}

TEST_CASE("run_protocol can terminate on the residual instead of the spread") {
  const Problem p = seeded_cycle(5);
  std::vector<Box> boxes(10, Box{20.0, 120.0});
  const Eigen::VectorXd z0 = feasible_init_equal_surplus(p.roles, p.demand, boxes);
  const NonlinearMap id = NonlinearMap::identity();
  const OracleSolution oracle = solve_centralized(p);

  RunOptions options;
  options.optimal_cost = oracle.optimal_cost;
  Termination term;
  term.grad_tol = 0.0;  // unreachable; the residual target must fire
  term.residual_tol = 1e-3;
  term.max_iterations = 100000;
  const RunResult run = run_protocol(p, id, id, 0.1, z0, term, options);
  CHECK(run.status == RunStatus::converged);
  CHECK(run.metrics.back().residual <= 1e-3);
  CHECK(run.iterations < term.max_iterations);
}

TEST_CASE("residuals decrease at the guaranteed rate and blow up far beyond it") {
  const Problem p = seeded_cycle(7);
  std::vector<Box> boxes(10, Box{20.0, 120.0});
  const Eigen::VectorXd z0 = feasible_init_equal_surplus(p.roles, p.demand, boxes);
  const NonlinearMap id = NonlinearMap::identity();

  const BoundReport bound = compute_step_bound(p, id, 0, boxes);
  const OracleSolution oracle = solve_centralized(p);

  RunOptions options;
  options.optimal_cost = oracle.optimal_cost;
  Termination term;
  term.grad_tol = 1e-7;
  term.max_iterations = 200000;

  const RunResult good =
      run_protocol(p, id, id, 0.99 * bound.bound, z0, term, options);
  CHECK(good.status == RunStatus::converged);
  for (std::size_t i = 1; i < good.metrics.size(); ++i) {
    CHECK(good.metrics[i].residual <= good.metrics[i - 1].residual + 1e-9);
  }
  // The residual can undershoot by about lambda* times the oracle's balance
  // gap; 1e-7 covers that for b = 700.
  CHECK(good.metrics.back().residual >= -1e-7);

  Termination wild_term;
  wild_term.max_iterations = 20000;
  const RunResult wild = run_protocol(p, id, id, 100.0 * bound.bound, z0, wild_term);
  CHECK(wild.status == RunStatus::unstable);
}

TEST_CASE("momentum baseline") {
  const Problem p = seeded_cycle(9);
  std::vector<Box> boxes(10, Box{20.0, 120.0});
  const Eigen::VectorXd z0 = feasible_init_equal_surplus(p.roles, p.demand, boxes);
  const NonlinearMap id = NonlinearMap::identity();
  Termination term;
  term.max_iterations = 60000;

  // beta = 0 reproduces the plain protocol bit for bit.
  RunOptions with_states;
  with_states.keep_states = true;
  RunOptions momentum_off = with_states;
  momentum_off.momentum = 0.0;
  const RunResult plain = run_protocol(p, id, id, 0.5, z0, term, with_states);
  const RunResult beta0 = run_protocol(p, id, id, 0.5, z0, term, momentum_off);
  REQUIRE(plain.states.size() == beta0.states.size());
  for (std::size_t k = 0; k < plain.states.size(); ++k) {
    for (int i = 0; i < p.size(); ++i) CHECK(plain.states[k][i] == beta0.states[k][i]);
  }

  // With no history the first momentum step equals the plain step.
  SimState a{z0, 0};
  SimState b{z0, 0};
  REQUIRE(step_euler(p, a, id, id, 0.5));
  REQUIRE(step_momentum(p, b, z0, 0.5, 0.5));
  for (int i = 0; i < p.size(); ++i) CHECK(a.z[i] == b.z[i]);

  // Heavy-ball momentum accelerates convergence to a tight spread, and the
  // balance still holds. Measured counts for this seed: 408 plain vs 185
  // with momentum; keep a drift band around them.
  RunOptions momentum_on;
  momentum_on.momentum = 0.5;
  const RunResult accel = run_protocol(p, id, id, 0.5, z0, term, momentum_on);
  CHECK(accel.status == RunStatus::converged);
  CHECK(plain.status == RunStatus::converged);
  CHECK(accel.iterations < plain.iterations);
  CHECK(std::abs(plain.iterations - 408) <= 41);
  CHECK(std::abs(accel.iterations - 185) <= 19);
  CHECK(accel.max_abs_feas_gap <= 1e-9 * p.size() * std::max(1.0, accel.max_abs_state));

  // Nonlinear maps are rejected for the baseline.
  CHECK_THROWS_AS(run_protocol(p, NonlinearMap::sgn_composite(0.5, 1.1), id, 0.5, z0, term,
                               momentum_on),
                  std::invalid_argument);
}

TEST_CASE("converged states equalize scaled marginal costs") {
  const Problem p = seeded_cycle(13);
  std::vector<Box> boxes(10, Box{20.0, 120.0});
  const Eigen::VectorXd z0 = feasible_init_equal_surplus(p.roles, p.demand, boxes);
  const NonlinearMap id = NonlinearMap::identity();
  const BoundReport bound = compute_step_bound(p, id, 0, boxes);
  const OracleSolution oracle = solve_centralized(p);

  Termination term;
  term.grad_tol = 1e-8;
  term.max_iterations = 400000;
  const RunResult run = run_protocol(p, id, id, 0.99 * bound.bound, z0, term);
  REQUIRE(run.status == RunStatus::converged);
  for (int i = 0; i < p.size(); ++i) {
    CHECK(run.final_state.z[i] == doctest::Approx(oracle.z_star[i]).epsilon(1e-5));
  }
}
