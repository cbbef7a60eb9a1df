#include "dra/nonlin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dra {

double sgn_pow(double u, double mu) {
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), mu), u);
}

NonlinearMap NonlinearMap::identity() { return {Kind::identity, 0.0, 0.0}; }

NonlinearMap NonlinearMap::saturation(double limit) {
  if (!(limit > 0.0)) throw std::invalid_argument("saturation limit must be > 0");
  return {Kind::saturation, limit, 0.0};
}

NonlinearMap NonlinearMap::log_quantizer(double rho) {
  if (!(rho > 1.0)) throw std::invalid_argument("log quantizer level must be > 1");
  return {Kind::log_quantizer, rho, 0.0};
}

NonlinearMap NonlinearMap::sgn_composite(double mu1, double mu2) {
  if (!(mu1 > 0.0 && mu1 < 1.0)) {
    throw std::invalid_argument("sgn composite needs 0 < mu1 < 1");
  }
  if (!(mu2 > 1.0)) throw std::invalid_argument("sgn composite needs mu2 > 1");
  return {Kind::sgn_composite, mu1, mu2};
}

NonlinearMap NonlinearMap::table(std::vector<std::pair<double, double>> knots) {
  if (knots.empty()) throw std::invalid_argument("table map needs at least one knot");
  double prev_u = 0.0;
  for (const auto& [u, v] : knots) {
    if (!(u > prev_u)) throw std::invalid_argument("table knots must be ascending and > 0");
    if (v < 0.0) throw std::invalid_argument("table values must be >= 0");
    prev_u = u;
  }
  NonlinearMap m(Kind::table, 0.0, 0.0);
  m.knots_ = std::move(knots);
  return m;
}

double NonlinearMap::operator()(double u) const {
  switch (kind_) {
    case Kind::identity:
      return u;
    case Kind::saturation:
      return std::clamp(u, -p1_, p1_);
    case Kind::log_quantizer: {
      if (u == 0.0) return 0.0;
      const double level = std::round(std::log(std::abs(u)) / std::log(p1_));
      return std::copysign(std::pow(p1_, level), u);
    }
    case Kind::sgn_composite:
      return sgn_pow(u, p1_) + sgn_pow(u, p2_);
    case Kind::table: {
      if (u == 0.0) return 0.0;
      const double t = std::abs(u);
      double u0 = 0.0, v0 = 0.0;
      for (const auto& [uk, vk] : knots_) {
        if (t <= uk) {
          const double val = v0 + (vk - v0) * (t - u0) / (uk - u0);
          return std::copysign(val, u);
        }
        u0 = uk;
        v0 = vk;
      }
      // Beyond the last knot: continue with the final segment slope.
      const auto& [ul, vl] = knots_.back();
      double slope;
      if (knots_.size() == 1) {
        slope = vl / ul;
      } else {
        const auto& [up, vp] = knots_[knots_.size() - 2];
        slope = (vl - vp) / (ul - up);
      }
      return std::copysign(vl + slope * (t - ul), u);
    }
  }
  return u;
}

bool SectorBounds::bounded() const { return std::isfinite(upper); }

namespace {

SectorBounds make_bounds(double lower, double upper, double range) {
  if (!(lower > 0.0)) {
    throw std::domain_error("sector violation: g(u)/u reaches " +
                            std::to_string(lower) + " on the requested range");
  }
  SectorBounds s;
  s.lower = lower;
  s.upper = upper;
  s.range = range;
  return s;
}

}  // namespace

SectorBounds sector_bounds(const NonlinearMap& map, double range) {
  if (!(range > 0.0)) throw std::invalid_argument("sector range must be > 0");

  switch (map.kind()) {
    case NonlinearMap::Kind::identity:
      return make_bounds(1.0, 1.0, range);

    case NonlinearMap::Kind::saturation: {
      // g(u)/u = 1 inside the limit and s/|u| beyond it.
      const double s = map.saturation_limit();
      return make_bounds(std::min(1.0, s / range), 1.0, range);
    }

    case NonlinearMap::Kind::log_quantizer: {
      // Ratio rho^(round(x)-x) stays in [rho^-1/2, rho^1/2] for any u.
      const double rho = map.quantizer_rho();
      return make_bounds(1.0 / std::sqrt(rho), std::sqrt(rho), range);
    }

    case NonlinearMap::Kind::sgn_composite: {
      // Ratio f(u) = u^(mu1-1) + u^(mu2-1) on (0, r]: decreasing up to
      // u* = ((1-mu1)/(mu2-1))^(1/(mu2-mu1)), increasing after, and
      // unbounded as u -> 0.
      const double mu1 = map.mu1();
      const double mu2 = map.mu2();
      const auto ratio = [&](double u) {
        return std::pow(u, mu1 - 1.0) + std::pow(u, mu2 - 1.0);
      };
      const double u_star = std::pow((1.0 - mu1) / (mu2 - 1.0), 1.0 / (mu2 - mu1));
      const double lower = ratio(std::min(range, u_star));
      return make_bounds(lower, std::numeric_limits<double>::infinity(), range);
    }

    case NonlinearMap::Kind::table: {
      // On each linear segment a*u + b the ratio a + b/u is monotone, so the
      // extremes sit at the knots, the range end, and the u -> 0 limit
      // (first-segment slope).
      const auto& knots = map.table_knots();
      std::vector<double> probes;
      probes.push_back(knots.front().second / knots.front().first);
      for (const auto& [u, v] : knots) {
        if (u <= range) probes.push_back(v / u);
      }
      probes.push_back(map(range) / range);
      const auto [lo_it, hi_it] = std::minmax_element(probes.begin(), probes.end());
      return make_bounds(*lo_it, *hi_it, range);
    }
  }
  throw std::logic_error("unreachable map kind");
}

}  // namespace dra
