#include "dra/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dra {

double step_bound(const StepBoundInputs& in) {
  if (!(in.sector_lower > 0.0) || !(in.sector_upper > 0.0) || !(in.lambda2 > 0.0) ||
      !(in.lambdaN > 0.0) || !(in.curvature_upper > 0.0)) {
    throw std::invalid_argument("step bound needs positive sector, spectrum and curvature inputs");
  }
  if (in.sector_lower > in.sector_upper) {
    throw std::invalid_argument("sector bounds out of order");
  }
  if (in.lambda2 > in.lambdaN) {
    throw std::invalid_argument("Laplacian eigenvalues out of order");
  }
  if (in.tau_bar < 0) throw std::invalid_argument("max delay must be >= 0");

  return (in.sector_lower * in.lambda2) /
         (in.curvature_upper * in.lambdaN * in.lambdaN * in.sector_upper *
          in.sector_upper * (in.tau_bar + 1));
}

BoundReport compute_step_bound(const Problem& p, const NonlinearMap& g_link, int tau_bar,
                               double operating_lo, double operating_hi) {
  if (!(operating_lo < operating_hi)) {
    throw std::invalid_argument("operating range needs lo < hi");
  }

  BoundReport rep;
  rep.operating_lo = operating_lo;
  rep.operating_hi = operating_hi;
  rep.tau_bar = tau_bar;
  rep.spectrum = spectrum(p.net);
  if (!rep.spectrum.connected) {
    throw std::invalid_argument("step bound needs a connected network");
  }

  // Worst-case curvature across nodes; gradients are monotone so their
  // magnitude peaks at the range endpoints.
  rep.curvature = CurvatureBounds{};
  rep.curvature.v = std::numeric_limits<double>::infinity();
  double radius = 0.0;
  for (const NodeCost& c : p.costs) {
    const CurvatureBounds b = curvature_bounds(c, operating_lo, operating_hi);
    rep.curvature.u = std::max(rep.curvature.u, b.u);
    rep.curvature.v = std::min(rep.curvature.v, b.v);
    radius = std::max({radius, std::abs(c.gradient(operating_lo)),
                       std::abs(c.gradient(operating_hi))});
  }
  rep.curvature.strictly_convex = rep.curvature.v > 0.0;
  rep.gradient_radius = radius;

  rep.sector = sector_bounds(g_link, std::max(radius, 1e-9));
  if (!rep.sector.bounded()) {
    throw std::domain_error(
        "link nonlinearity has no finite upper sector near the origin; "
        "the guaranteed step-rate bound does not apply");
  }

  StepBoundInputs in;
  in.sector_lower = rep.sector.lower;
  in.sector_upper = rep.sector.upper;
  in.lambda2 = rep.spectrum.lambda2;
  in.lambdaN = rep.spectrum.lambdaN;
  in.curvature_upper = rep.curvature.u;
  in.tau_bar = 0;
  rep.delay_free_bound = step_bound(in);
  in.tau_bar = tau_bar;
  rep.bound = step_bound(in);
  return rep;
}

BoundReport compute_step_bound(const Problem& p, const NonlinearMap& g_link, int tau_bar,
                               std::span<const Box> boxes) {
  double lo, hi;
  if (!boxes.empty()) {
    lo = boxes[0].lo;
    hi = boxes[0].hi;
    for (const Box& b : boxes) {
      lo = std::min(lo, b.lo);
      hi = std::max(hi, b.hi);
    }
  } else {
    const double span = std::max(std::abs(p.demand), 100.0);
    lo = -span;
    hi = span;
  }
  return compute_step_bound(p, g_link, tau_bar, lo - 50.0, hi + 50.0);
}

namespace {

// Solve dh(z) = target for a strictly increasing gradient by safeguarded
// bisection; closed form for unpenalized (regularized) quadratics.
double invert_gradient(const NodeCost& cost, double target) {
  const double quad = cost.quad_coeff() + cost.regularizer();
  if (!cost.penalized()) {
    return (target - cost.linear_coeff()) / (2.0 * quad);
  }

  double lo = cost.box()->lo;
  double hi = cost.box()->hi;
  double span = std::max(hi - lo, 1.0);
  for (int i = 0; i < 200 && cost.gradient(lo) > target; ++i, span *= 2.0) lo -= span;
  span = std::max(hi - lo, 1.0);
  for (int i = 0; i < 200 && cost.gradient(hi) < target; ++i, span *= 2.0) hi += span;
  if (cost.gradient(lo) > target || cost.gradient(hi) < target) {
    throw std::runtime_error("oracle could not bracket the per-node gradient equation");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cost.gradient(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

OracleSolution solve_centralized(const Problem& p) {
  p.validate();
  for (const NodeCost& c : p.costs) {
    if (!c.strictly_convex()) {
      throw std::invalid_argument(
          "oracle needs strictly convex costs; add a regularizer to linear ones");
    }
  }

  const int n = p.size();
  const auto balance_at = [&](double lambda, Eigen::VectorXd* out) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = invert_gradient(p.costs[i], p.sign(i) * lambda);
      if (out) (*out)[i] = z;
      s += p.sign(i) * z;
    }
    return s - p.demand;
  };

  // Bracket the multiplier: gradients at box-ish extremes plus headroom,
  // expanded geometrically if the demand still falls outside.
  double lam_lo = std::numeric_limits<double>::infinity();
  double lam_hi = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const Box fallback{-std::abs(p.demand) - 100.0, std::abs(p.demand) + 100.0};
    const Box b = p.costs[i].box().value_or(fallback);
    for (double z : {b.lo, b.hi}) {
      const double g = p.sign(i) * p.costs[i].gradient(z);
      lam_lo = std::min(lam_lo, g);
      lam_hi = std::max(lam_hi, g);
    }
  }
  lam_lo -= 1.0;
  lam_hi += 1.0;
  for (int i = 0; i < 200 && balance_at(lam_lo, nullptr) > 0.0; ++i) {
    lam_lo -= (lam_hi - lam_lo);
  }
  for (int i = 0; i < 200 && balance_at(lam_hi, nullptr) < 0.0; ++i) {
    lam_hi += (lam_hi - lam_lo);
  }
  if (balance_at(lam_lo, nullptr) > 0.0 || balance_at(lam_hi, nullptr) < 0.0) {
    throw std::runtime_error("oracle could not bracket the demand multiplier");
  }

  // Tight enough for both |gap| <= 1e-10*n and <= 1e-10*max(1,|b|).
  const double gap_tol =
      1e-10 * std::max(1.0, std::min(std::abs(p.demand), static_cast<double>(n)));
  OracleSolution sol;
  sol.z_star.resize(n);
  double lambda = 0.5 * (lam_lo + lam_hi);
  for (int it = 0; it < 400; ++it) {
    lambda = 0.5 * (lam_lo + lam_hi);
    const double gap = balance_at(lambda, &sol.z_star);
    if (std::abs(gap) <= gap_tol) break;
    (gap < 0.0 ? lam_lo : lam_hi) = lambda;
  }

  sol.lambda_star = lambda;
  sol.optimal_cost = p.objective(sol.z_star);
  return sol;
}

RunClassification classify_run(const RunResult& run, const ClassifyThresholds& t) {
  if (run.metrics.empty()) throw std::invalid_argument("empty trajectory");

  RunClassification c;
  c.final_residual = run.metrics.back().residual;
  c.final_spread = run.metrics.back().grad_spread;
  c.max_feas_gap = run.max_abs_feas_gap;

  const bool have_residual = !std::isnan(run.metrics.front().residual);

  if (have_residual) {
    const double initial = run.metrics.front().residual;
    const double target = t.threshold_fraction * initial;
    // The floor keeps oracle-precision jitter around zero residual from
    // registering as 100x growth.
    const double floor = 1e-9 * std::max(1.0, std::abs(initial));
    double min_res = std::numeric_limits<double>::infinity();
    bool grew = false;
    for (const IterationRecord& rec : run.metrics) {
      if (c.iterations_to_threshold < 0 && rec.residual <= target) {
        c.iterations_to_threshold = rec.k;
      }
      min_res = std::min(min_res, rec.residual);
      if (rec.residual > t.residual_growth_factor * std::max(min_res, floor) &&
          rec.residual > initial) {
        grew = true;
      }
    }
    if (run.status == RunStatus::unstable || grew) {
      c.verdict = RunStatus::unstable;
      return c;
    }
  } else if (run.status == RunStatus::unstable) {
    c.verdict = RunStatus::unstable;
    return c;
  }

  c.verdict = c.final_spread <= t.grad_tol ? RunStatus::converged : run.status;
  return c;
}

}  // namespace dra
