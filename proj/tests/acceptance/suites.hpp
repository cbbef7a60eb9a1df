#pragma once

// Seeded scenario suites shared by the acceptance criteria: a mixed
// feasibility suite (every map kind, delay mode, stable and unstable rates)
// and a guarantee suite run at the certified step rate.

#include <optional>
#include <string>
#include <vector>

#include "dra/analysis.hpp"
#include "dra/delaynet.hpp"
#include "dra/dynamics.hpp"

namespace acc {

struct DelayCase {
  int tau_bar = 0;
  dra::DelayMode mode = dra::DelayMode::time_varying;
  std::uint64_t seed = 0;
};

struct Case {
  std::string label;
  dra::Problem problem;
  std::vector<dra::Box> boxes;
  dra::NonlinearMap g_node = dra::NonlinearMap::identity();
  dra::NonlinearMap g_link = dra::NonlinearMap::identity();
  Eigen::VectorXd z0;
  double eta = 0.0;  // 0: derive from the bound inside the criterion
  std::optional<DelayCase> delay;
  long max_iterations = 30000;
  double grad_tol = 1e-6;
};

// >= 50 runs covering all node/link map kinds, both delay modes, battery
// roles, and deliberately unstable rates.
std::vector<Case> feasibility_suite();

// Small-magnitude strictly convex problems (costs in the unit range so the
// per-step Lyapunov check is meaningful at 1e-12) with identity or
// saturation link maps; always run at 0.99x the certified bound.
std::vector<Case> guarantee_suite(int count);

dra::RunResult run_case(const Case& c, const dra::RunOptions& options = {});

}  // namespace acc
