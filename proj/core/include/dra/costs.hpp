#pragma once

#include <optional>

namespace dra {

enum class PenaltyKind { power, softplus };

// Box-violation penalty [u]^+:
//   power:    max(u, 0)^sigma           (sigma >= 2 keeps the gradient C1)
//   softplus: (1/sigma) log(1+exp(sigma u)), evaluated in log-sum-exp form
double penalty_plus(double u, PenaltyKind kind, double sigma);
double penalty_plus_derivative(double u, PenaltyKind kind, double sigma);
double penalty_plus_curvature(double u, PenaltyKind kind, double sigma);

struct Box {
  double lo = 0.0;
  double hi = 0.0;
};

// Per-node cost h_i in $: quadratic (gamma z^2 + beta z + alpha) or linear
// (beta z + alpha) base, plus an optional box penalty
// eps * ([z - hi]^+ + [lo - z]^+) and an optional quadratic regularizer used
// to make linear battery costs strictly convex.
//
// Value objects; immutable once configured and thread-safe.
class NodeCost {
 public:
  static NodeCost quadratic(double gamma, double beta, double alpha = 0.0);
  static NodeCost linear(double beta, double alpha = 0.0);

  NodeCost& with_box(Box box, double epsilon, PenaltyKind kind = PenaltyKind::power,
                     double sigma = 2.0);
  NodeCost& with_regularizer(double rho);

  double value(double z) const;
  double gradient(double z) const;
  double curvature(double z) const;  // d^2 h / dz^2

  bool strictly_convex() const { return gamma_ + reg_ > 0.0; }
  bool penalized() const { return box_.has_value() && epsilon_ > 0.0; }

  double quad_coeff() const { return gamma_; }
  double linear_coeff() const { return beta_; }
  double constant() const { return alpha_; }
  double regularizer() const { return reg_; }
  double epsilon() const { return epsilon_; }
  double sigma() const { return sigma_; }
  PenaltyKind penalty_kind() const { return kind_; }
  const std::optional<Box>& box() const { return box_; }

 private:
  NodeCost() = default;

  double gamma_ = 0.0;
  double beta_ = 0.0;
  double alpha_ = 0.0;
  double reg_ = 0.0;
  std::optional<Box> box_;
  double epsilon_ = 0.0;
  PenaltyKind kind_ = PenaltyKind::power;
  double sigma_ = 2.0;
};

// Computable stand-ins for the strict curvature inequalities 2v < h'' < 2u:
// u carries a +5% margin over the scanned maximum, v a -5% margin floored at
// zero. strictly_convex is false when h'' touches zero on the range (pure
// linear costs).
struct CurvatureBounds {
  double v = 0.0;
  double u = 0.0;
  bool strictly_convex = false;
};

CurvatureBounds curvature_bounds(const NodeCost& cost, double z_min, double z_max);

}  // namespace dra
