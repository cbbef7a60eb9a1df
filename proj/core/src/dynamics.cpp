#include "dra/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "run_loop.hpp"

namespace dra {

double Problem::objective(const Eigen::VectorXd& z) const {
  double h = 0.0;
  for (int i = 0; i < size(); ++i) h += costs[i].value(z[i]);
  return h;
}

double Problem::scaled_gradient(int i, double z_i) const {
  return sign(i) * costs[i].gradient(z_i);
}

Eigen::VectorXd Problem::scaled_gradients(const Eigen::VectorXd& z) const {
  Eigen::VectorXd g(size());
  for (int i = 0; i < size(); ++i) g[i] = scaled_gradient(i, z[i]);
  return g;
}

double Problem::feasibility_gap(const Eigen::VectorXd& z) const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += sign(i) * z[i];
  return s - demand;
}

double Problem::gradient_spread(const Eigen::VectorXd& z) const {
  double lo = scaled_gradient(0, z[0]);
  double hi = lo;
  for (int i = 1; i < size(); ++i) {
    const double g = scaled_gradient(i, z[i]);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  return hi - lo;
}

void Problem::validate() const {
  const auto n = static_cast<std::size_t>(net.size());
  if (costs.size() != n) {
    throw std::invalid_argument("cost count mismatch: " + std::to_string(costs.size()) +
                                " costs for " + std::to_string(n) + " nodes");
  }
  if (roles.size() != n) {
    throw std::invalid_argument("role count mismatch: " + std::to_string(roles.size()) +
                                " roles for " + std::to_string(n) + " nodes");
  }
  if (!net.connected()) {
    throw std::invalid_argument("scenario network must be connected");
  }
}

Eigen::VectorXd feasible_init_equal_surplus(std::span<const NodeRole> roles, double demand,
                                            std::span<const Box> boxes) {
  if (roles.size() != boxes.size()) {
    throw std::invalid_argument("feasible init needs one box per node");
  }
  const int n = static_cast<int>(roles.size());
  double cap_lo = 0.0, cap_hi = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(boxes[i].lo < boxes[i].hi)) throw std::invalid_argument("box needs lo < hi");
    if (roles[i] == NodeRole::generator) {
      cap_lo += boxes[i].lo;
      cap_hi += boxes[i].hi;
    } else {
      cap_lo -= boxes[i].hi;
      cap_hi -= boxes[i].lo;
    }
  }
  if (demand < cap_lo || demand > cap_hi) {
    throw std::invalid_argument("demand " + std::to_string(demand) +
                                " outside box capacity [" + std::to_string(cap_lo) + ", " +
                                std::to_string(cap_hi) + "]");
  }

  const double t = (demand - cap_lo) / (cap_hi - cap_lo);
  Eigen::VectorXd z(n);
  for (int i = 0; i < n; ++i) {
    const double width = boxes[i].hi - boxes[i].lo;
    z[i] = roles[i] == NodeRole::generator ? boxes[i].lo + t * width
                                           : boxes[i].hi - t * width;
  }
  // Absorb the last few ulps of rounding so the balance starts exact.
  double gap = -demand;
  for (int i = 0; i < n; ++i) gap += role_sign(roles[i]) * z[i];
  z[0] -= role_sign(roles[0]) * gap;
  return z;
}

void validate_explicit_init(std::span<const NodeRole> roles, double demand,
                            std::span<const Box> boxes, const Eigen::VectorXd& z0) {
  if (static_cast<std::size_t>(z0.size()) != roles.size()) {
    throw std::invalid_argument("initial state size mismatch");
  }
  double s = 0.0;
  for (int i = 0; i < z0.size(); ++i) s += role_sign(roles[i]) * z0[i];
  const double tol = 1e-9 * std::max(1.0, std::abs(demand));
  if (std::abs(s - demand) > tol) {
    throw std::invalid_argument("initial state violates the balance: sum a_i z_i = " +
                                std::to_string(s) + ", demand = " + std::to_string(demand));
  }
  if (!boxes.empty()) {
    if (boxes.size() != roles.size()) {
      throw std::invalid_argument("box count mismatch in initial-state check");
    }
    for (int i = 0; i < z0.size(); ++i) {
      if (z0[i] < boxes[i].lo || z0[i] > boxes[i].hi) {
        throw std::invalid_argument("initial state of node " + std::to_string(i) +
                                    " outside its box");
      }
    }
  }
}

namespace detail {

// Per-node sums acc_i = sum_j W_ij g_n(phi_j - phi_i) with phi = g_l(A grad H).
// Neighbor order is ascending so the delayed path can reproduce the exact
// floating-point sequence at tau_bar = 0.
Eigen::VectorXd link_sums(const Problem& p, const Eigen::VectorXd& phi,
                          const NonlinearMap& g_node) {
  const int n = p.size();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j : p.net.neighbors()[i]) {
      s += p.net.weight(i, j) * g_node(phi[j] - phi[i]);
    }
    acc[i] = s;
  }
  return acc;
}

Eigen::VectorXd link_nonlinearity(const Problem& p, const Eigen::VectorXd& z,
                                  const NonlinearMap& g_link) {
  Eigen::VectorXd phi(p.size());
  for (int i = 0; i < p.size(); ++i) phi[i] = g_link(p.scaled_gradient(i, z[i]));
  return phi;
}

}  // namespace detail

Eigen::VectorXd protocol_rhs(const Problem& p, const Eigen::VectorXd& z,
                             const NonlinearMap& g_node, const NonlinearMap& g_link,
                             double eta) {
  if (z.size() != p.size()) throw std::invalid_argument("state size mismatch");
  if (!(eta > 0.0)) throw std::invalid_argument("step rate must be > 0");
  const Eigen::VectorXd phi = detail::link_nonlinearity(p, z, g_link);
  const Eigen::VectorXd acc = detail::link_sums(p, phi, g_node);
  Eigen::VectorXd rhs(p.size());
  for (int i = 0; i < p.size(); ++i) rhs[i] = eta * (p.sign(i) * acc[i]);
  return rhs;
}

bool step_euler(const Problem& p, SimState& state, const NonlinearMap& g_node,
                const NonlinearMap& g_link, double eta_tau) {
  const Eigen::VectorXd phi = detail::link_nonlinearity(p, state.z, g_link);
  const Eigen::VectorXd acc = detail::link_sums(p, phi, g_node);
  Eigen::VectorXd next(p.size());
  for (int i = 0; i < p.size(); ++i) {
    next[i] = state.z[i] + eta_tau * (p.sign(i) * acc[i]);
  }
  if (!next.allFinite()) return false;
  state.z = std::move(next);
  state.iteration += 1;
  return true;
}

bool step_momentum(const Problem& p, SimState& state, const Eigen::VectorXd& prev_z,
                   double beta_bar, double eta_tau) {
  const NonlinearMap id = NonlinearMap::identity();
  const Eigen::VectorXd phi = detail::link_nonlinearity(p, state.z, id);
  const Eigen::VectorXd acc = detail::link_sums(p, phi, id);
  Eigen::VectorXd next(p.size());
  for (int i = 0; i < p.size(); ++i) {
    next[i] = state.z[i] + eta_tau * (p.sign(i) * acc[i]) +
              beta_bar * (state.z[i] - prev_z[i]);
  }
  if (!next.allFinite()) return false;
  state.z = std::move(next);
  state.iteration += 1;
  return true;
}

RunResult run_protocol(const Problem& p, const NonlinearMap& g_node,
                       const NonlinearMap& g_link, double eta_tau, Eigen::VectorXd z0,
                       const Termination& term, const RunOptions& options) {
  p.validate();
  if (!(eta_tau > 0.0)) throw std::invalid_argument("step rate must be > 0");
  if (options.momentum != 0.0 && !(g_node.is_identity() && g_link.is_identity())) {
    throw std::invalid_argument("momentum baseline supports identity maps only");
  }

  if (options.momentum != 0.0) {
    Eigen::VectorXd prev = z0;
    return detail::run_loop(p, std::move(z0), term, options,
                            [&](SimState& state) {
                              Eigen::VectorXd cur = state.z;
                              const bool ok = step_momentum(p, state, prev, options.momentum,
                                                            eta_tau);
                              if (ok) prev = std::move(cur);
                              return ok;
                            });
  }
  return detail::run_loop(p, std::move(z0), term, options, [&](SimState& state) {
    return step_euler(p, state, g_node, g_link, eta_tau);
  });
}

}  // namespace dra
