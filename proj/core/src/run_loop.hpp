#pragma once

// Shared iteration loop for the delay-free and delayed runners: metric
// recording, termination tests, and the divergence guard live here so both
// protocols classify runs identically.

#include <cmath>
#include <limits>
#include <utility>

#include "dra/dynamics.hpp"

namespace dra::detail {

template <class Stepper>
RunResult run_loop(const Problem& p, Eigen::VectorXd z0, const Termination& term,
                   const RunOptions& options, Stepper&& step) {
  RunResult result;
  SimState state{std::move(z0), 0};

  const double scale = std::max({std::abs(p.demand), state.z.cwiseAbs().maxCoeff(), 1.0});
  const double guard = term.divergence_factor * scale;

  const auto record = [&](const SimState& s) {
    IterationRecord rec;
    rec.k = s.iteration;
    rec.feas_gap = p.feasibility_gap(s.z);
    rec.grad_spread = p.gradient_spread(s.z);
    rec.residual = options.optimal_cost
                       ? p.objective(s.z) - *options.optimal_cost
                       : std::numeric_limits<double>::quiet_NaN();
    result.metrics.push_back(rec);
    if (options.keep_states) result.states.push_back(s.z);
    result.max_abs_feas_gap = std::max(result.max_abs_feas_gap, std::abs(rec.feas_gap));
    result.max_abs_state = std::max(result.max_abs_state, s.z.cwiseAbs().maxCoeff());
    return rec;
  };

  IterationRecord current = record(state);
  while (true) {
    if (current.grad_spread <= term.grad_tol) {
      result.status = RunStatus::converged;
      break;
    }
    if (term.residual_tol >= 0.0 && options.optimal_cost &&
        current.residual <= term.residual_tol) {
      result.status = RunStatus::converged;
      break;
    }
    if (state.iteration >= term.max_iterations) {
      result.status = RunStatus::budget_exhausted;
      break;
    }
    if (!step(state)) {
      // Update went non-finite; the state stays frozen at the last iterate.
      result.status = RunStatus::unstable;
      break;
    }
    current = record(state);
    if (state.z.cwiseAbs().maxCoeff() > guard) {
      result.status = RunStatus::unstable;
      break;
    }
  }

  result.final_state = std::move(state);
  result.iterations = result.final_state.iteration;
  return result;
}

}  // namespace dra::detail
