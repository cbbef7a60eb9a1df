#pragma once

#include <Eigen/Dense>

#include "dra/costs.hpp"
#include "dra/dynamics.hpp"
#include "dra/graph.hpp"
#include "dra/nonlin.hpp"

namespace dra {

// Inputs of the guaranteed step-rate ceiling
//   eta_tau < kappa lambda2 / (u lambdaN^2 Kappa^2 (tau_bar + 1)).
struct StepBoundInputs {
  double sector_lower = 1.0;    // kappa of g_l
  double sector_upper = 1.0;    // Kappa of g_l
  double lambda2 = 0.0;
  double lambdaN = 0.0;
  double curvature_upper = 0.0; // u with h'' < 2u
  int tau_bar = 0;
};

double step_bound(const StepBoundInputs& in);

// Everything that went into a bound evaluation, for reporting.
struct BoundReport {
  Spectrum spectrum;
  SectorBounds sector;
  CurvatureBounds curvature;    // worst-case over nodes on the operating range
  double operating_lo = 0.0;
  double operating_hi = 0.0;
  double gradient_radius = 0.0; // max |a_i dh_i| on the range; sector range for g_l
  int tau_bar = 0;
  double delay_free_bound = 0.0;
  double bound = 0.0;
};

// Wires spectrum, curvature scan and g_l sector bounds together. The
// operating range defaults to [min box - 50, max box + 50] MW. Throws
// std::domain_error when g_l has no finite upper sector on the range.
BoundReport compute_step_bound(const Problem& p, const NonlinearMap& g_link, int tau_bar,
                               double operating_lo, double operating_hi);
BoundReport compute_step_bound(const Problem& p, const NonlinearMap& g_link, int tau_bar,
                               std::span<const Box> boxes);

struct OracleSolution {
  Eigen::VectorXd z_star;
  double lambda_star = 0.0;  // common value of a_i dh_i at the optimum
  double optimal_cost = 0.0;
};

// Centralized KKT oracle: outer bisection on the multiplier lambda, inner
// monotone root-finding of a_i dh_i(z_i) = lambda per node (closed form for
// unpenalized quadratics). Optimizes the same penalized objective the
// protocol descends. Requires strictly convex effective costs.
OracleSolution solve_centralized(const Problem& p);

struct ClassifyThresholds {
  double grad_tol = 1e-6;
  double residual_growth_factor = 100.0;  // residual above factor * min => unstable
  double threshold_fraction = 0.01;       // iterations-to-threshold target
};

struct RunClassification {
  RunStatus verdict = RunStatus::budget_exhausted;
  long iterations_to_threshold = -1;  // first k with residual <= fraction * residual(0)
  double final_residual = 0.0;
  double final_spread = 0.0;
  double max_feas_gap = 0.0;
};

// Post-hoc verdict over a recorded trajectory; refines the runner status
// with the residual-growth instability test.
RunClassification classify_run(const RunResult& run, const ClassifyThresholds& t = {});

}  // namespace dra
