#include "dra/costs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dra {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_penalty_params(PenaltyKind kind, double sigma) {
  if (kind == PenaltyKind::power && sigma < 2.0) {
    throw std::invalid_argument("power penalty needs sigma >= 2 for a C1 gradient");
  }
  if (kind == PenaltyKind::softplus && sigma <= 0.0) {
    throw std::invalid_argument("softplus penalty needs sigma > 0");
  }
}

}  // namespace

double penalty_plus(double u, PenaltyKind kind, double sigma) {
  check_penalty_params(kind, sigma);
  if (kind == PenaltyKind::power) {
    return u > 0.0 ? std::pow(u, sigma) : 0.0;
  }
  // (1/s)(max(su,0) + log1p(exp(-|su|))) avoids overflow for large su.
  const double su = sigma * u;
  return (std::max(su, 0.0) + std::log1p(std::exp(-std::abs(su)))) / sigma;
}

double penalty_plus_derivative(double u, PenaltyKind kind, double sigma) {
  check_penalty_params(kind, sigma);
  if (kind == PenaltyKind::power) {
    return u > 0.0 ? sigma * std::pow(u, sigma - 1.0) : 0.0;
  }
  return stable_sigmoid(sigma * u);
}

double penalty_plus_curvature(double u, PenaltyKind kind, double sigma) {
  check_penalty_params(kind, sigma);
  if (kind == PenaltyKind::power) {
    if (u <= 0.0) return 0.0;
    return sigma * (sigma - 1.0) * std::pow(u, sigma - 2.0);
  }
  const double s = stable_sigmoid(sigma * u);
  return sigma * s * (1.0 - s);
}

NodeCost NodeCost::quadratic(double gamma, double beta, double alpha) {
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("quadratic cost needs gamma > 0");
  }
  NodeCost c;
  c.gamma_ = gamma;
  c.beta_ = beta;
  c.alpha_ = alpha;
  return c;
}

NodeCost NodeCost::linear(double beta, double alpha) {
  NodeCost c;
  c.beta_ = beta;
  c.alpha_ = alpha;
  return c;
}

NodeCost& NodeCost::with_box(Box box, double epsilon, PenaltyKind kind, double sigma) {
  if (!(box.lo < box.hi)) throw std::invalid_argument("box needs lo < hi");
  if (epsilon < 0.0) throw std::invalid_argument("penalty weight must be >= 0");
  check_penalty_params(kind, sigma);
  box_ = box;
  epsilon_ = epsilon;
  kind_ = kind;
  sigma_ = sigma;
  return *this;
}

NodeCost& NodeCost::with_regularizer(double rho) {
  if (rho < 0.0) throw std::invalid_argument("regularizer must be >= 0");
  reg_ = rho;
  return *this;
}

double NodeCost::value(double z) const {
  double v = (gamma_ + reg_) * z * z + beta_ * z + alpha_;
  if (penalized()) {
    v += epsilon_ * (penalty_plus(z - box_->hi, kind_, sigma_) +
                     penalty_plus(box_->lo - z, kind_, sigma_));
  }
  return v;
}

double NodeCost::gradient(double z) const {
  double g = 2.0 * (gamma_ + reg_) * z + beta_;
  if (penalized()) {
    g += epsilon_ * (penalty_plus_derivative(z - box_->hi, kind_, sigma_) -
                     penalty_plus_derivative(box_->lo - z, kind_, sigma_));
  }
  return g;
}

double NodeCost::curvature(double z) const {
  double c = 2.0 * (gamma_ + reg_);
  if (penalized()) {
    c += epsilon_ * (penalty_plus_curvature(z - box_->hi, kind_, sigma_) +
                     penalty_plus_curvature(box_->lo - z, kind_, sigma_));
  }
  return c;
}

CurvatureBounds curvature_bounds(const NodeCost& cost, double z_min, double z_max) {
  if (!(z_min < z_max)) throw std::invalid_argument("curvature range needs z_min < z_max");

  // Dense scan plus the penalty kink points; the supported curvature shapes
  // are piecewise monotone between those, so this captures the extremes.
  constexpr int kGridPoints = 4096;
  std::vector<double> samples;
  samples.reserve(kGridPoints + 8);
  const double step = (z_max - z_min) / (kGridPoints - 1);
  for (int i = 0; i < kGridPoints; ++i) samples.push_back(z_min + i * step);
  if (cost.box()) {
    for (double edge : {cost.box()->lo, cost.box()->hi}) {
      for (double x : {edge - 1e-9, edge, edge + 1e-9}) {
        if (x >= z_min && x <= z_max) samples.push_back(x);
      }
    }
  }

  double lo = cost.curvature(samples.front());
  double hi = lo;
  for (double z : samples) {
    const double c = cost.curvature(z);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }

  CurvatureBounds b;
  b.u = 0.5 * hi * 1.05;
  b.v = std::max(0.0, 0.5 * lo * 0.95);
  b.strictly_convex = lo > 0.0;
  return b;
}

}  // namespace dra
