#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "dra/costs.hpp"
#include "dra/graph.hpp"
#include "dra/nonlin.hpp"

namespace dra {

// Role sign a_i: +1 for generating nodes, -1 for reserving (battery) nodes.
enum class NodeRole : int { generator = +1, battery = -1 };

inline double role_sign(NodeRole r) { return static_cast<double>(static_cast<int>(r)); }

// A complete allocation problem instance: who talks to whom, what each node
// pays, which side of the balance it sits on, and the demand b in
// sum_i a_i z_i = b.
struct Problem {
  Network net;
  std::vector<NodeCost> costs;
  std::vector<NodeRole> roles;
  double demand = 0.0;

  int size() const { return net.size(); }
  double sign(int i) const { return role_sign(roles[i]); }

  double objective(const Eigen::VectorXd& z) const;
  // a_i * dh_i/dz at z_i; equalized across nodes at an interior optimum.
  double scaled_gradient(int i, double z_i) const;
  Eigen::VectorXd scaled_gradients(const Eigen::VectorXd& z) const;
  double feasibility_gap(const Eigen::VectorXd& z) const;  // sum a_i z_i - b
  double gradient_spread(const Eigen::VectorXd& z) const;  // max - min of a_i dh_i

  void validate() const;  // counts consistent, network connected
};

// Feasible starting point with every node at the same fraction of its box:
// z_i = lo_i + t (hi_i - lo_i) for generators (mirrored for batteries), with
// t chosen so that sum a_i z_i = b. Throws when b is outside box capacity.
Eigen::VectorXd feasible_init_equal_surplus(std::span<const NodeRole> roles, double demand,
                                            std::span<const Box> boxes);

// Validates a user-supplied start: balance within 1e-9*max(1,|b|) and inside
// the boxes when given.
void validate_explicit_init(std::span<const NodeRole> roles, double demand,
                            std::span<const Box> boxes, const Eigen::VectorXd& z0);

struct SimState {
  Eigen::VectorXd z;
  long iteration = 0;
};

// Right-hand side of the continuous-time protocol,
//   zdot_i = eta a_i sum_j W_ij g_n( g_l(a_j dh_j) - g_l(a_i dh_i) ).
// By construction sum_i a_i zdot_i = 0, so the balance never moves.
Eigen::VectorXd protocol_rhs(const Problem& p, const Eigen::VectorXd& z,
                             const NonlinearMap& g_node, const NonlinearMap& g_link,
                             double eta);

// One explicit Euler step z(k+1) = z(k) + eta_tau * rhs(z(k)). Returns false
// and leaves the state frozen if the update produced non-finite values.
bool step_euler(const Problem& p, SimState& state, const NonlinearMap& g_node,
                const NonlinearMap& g_link, double eta_tau);

// Linear protocol step plus a heavy-ball term beta_bar * (z(k) - z(k-1)).
// Identity maps only; prev_z is the previous state (pass z(k) itself at k=0).
bool step_momentum(const Problem& p, SimState& state, const Eigen::VectorXd& prev_z,
                   double beta_bar, double eta_tau);

struct Termination {
  double grad_tol = 1e-6;          // stop when gradient spread falls below
  double residual_tol = -1.0;      // additional stop on residual when >= 0
  long max_iterations = 100000;
  double divergence_factor = 1e6;  // |z|_inf > factor * max(|b|, |z0|_inf) => unstable
};

enum class RunStatus { converged, unstable, budget_exhausted };

struct IterationRecord {
  long k = 0;
  double residual = 0.0;  // H(z(k)) - H(z*) when the optimum is known, else NaN
  double feas_gap = 0.0;
  double grad_spread = 0.0;
};

struct RunResult {
  RunStatus status = RunStatus::budget_exhausted;
  SimState final_state;
  std::vector<IterationRecord> metrics;     // one row per visited iterate
  std::vector<Eigen::VectorXd> states;      // filled when keep_states
  double max_abs_feas_gap = 0.0;
  double max_abs_state = 0.0;
  long iterations = 0;
};

struct RunOptions {
  bool keep_states = false;
  std::optional<double> optimal_cost;  // H(z*) for the residual column
  double momentum = 0.0;               // heavy-ball coefficient (identity maps only)
};

RunResult run_protocol(const Problem& p, const NonlinearMap& g_node,
                       const NonlinearMap& g_link, double eta_tau, Eigen::VectorXd z0,
                       const Termination& term, const RunOptions& options = {});

}  // namespace dra
