#pragma once

#include <utility>
#include <vector>

namespace dra {

// sign(u) * |u|^mu, with value 0 at u = 0.
double sgn_pow(double u, double mu);

// Sign-preserving odd scalar map applied on nodes (g_n) or links (g_l).
//
// Every kind satisfies g(-u) = -g(u) bit-exactly and u*g(u) > 0 for u != 0
// (the table kind can be built with flat-zero spans for experiments; such
// maps fail the sector computation instead of being rejected here).
class NonlinearMap {
 public:
  enum class Kind { identity, saturation, log_quantizer, sgn_composite, table };

  static NonlinearMap identity();
  static NonlinearMap saturation(double limit);
  // sign(u) * rho^round(log_rho |u|); standard logarithmic quantizer.
  static NonlinearMap log_quantizer(double rho = 1.2);
  // sgn^mu1(u) + sgn^mu2(u) with 0 < mu1 < 1 < mu2.
  static NonlinearMap sgn_composite(double mu1, double mu2);
  // Piecewise-linear odd map through (0,0) and the given positive knots
  // (u ascending, values >= 0); extrapolates with the last segment slope.
  static NonlinearMap table(std::vector<std::pair<double, double>> knots);

  double operator()(double u) const;

  Kind kind() const { return kind_; }
  bool is_identity() const { return kind_ == Kind::identity; }
  double saturation_limit() const { return p1_; }
  double quantizer_rho() const { return p1_; }
  double mu1() const { return p1_; }
  double mu2() const { return p2_; }
  const std::vector<std::pair<double, double>>& table_knots() const { return knots_; }

 private:
  NonlinearMap(Kind kind, double p1, double p2) : kind_(kind), p1_(p1), p2_(p2) {}

  Kind kind_ = Kind::identity;
  double p1_ = 0.0;
  double p2_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

// kappa <= g(u)/u <= Kappa for 0 < |u| <= range. upper is +inf when the
// ratio is unbounded near the origin (sgn composites with mu1 < 1); such
// maps are excluded from the guaranteed step-rate path.
struct SectorBounds {
  double lower = 0.0;
  double upper = 0.0;
  double range = 0.0;

  bool bounded() const;
};

// Throws std::domain_error when the lower sector slope is not positive on
// the range (the map is then unusable in the convergence bound).
SectorBounds sector_bounds(const NonlinearMap& map, double range);

}  // namespace dra
