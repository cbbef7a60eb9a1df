#pragma once

#include <cstdint>
#include <vector>

#include "dra/dynamics.hpp"
#include "dra/graph.hpp"

namespace dra {

enum class DelayMode { time_varying, time_invariant };

// Per-link integer message delays, bounded by tau_bar and symmetric across
// each undirected link. Draws are pure functions of (seed, link, step), so a
// schedule reproduces exactly on any platform and extends to the negative
// send steps used to bootstrap the protocol.
class DelaySchedule {
 public:
  static DelaySchedule sample(const Network& net, int tau_bar, DelayMode mode,
                              std::uint64_t seed);

  // Delay of the message sent on link {i,j} at (possibly negative) step k.
  int delay(long step, int i, int j) const;

  int tau_bar() const { return tau_bar_; }
  DelayMode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }
  int node_count() const { return node_count_; }

 private:
  DelaySchedule(int node_count, int tau_bar, DelayMode mode, std::uint64_t seed)
      : node_count_(node_count), tau_bar_(tau_bar), mode_(mode), seed_(seed) {}

  int node_count_ = 0;
  int tau_bar_ = 0;
  DelayMode mode_ = DelayMode::time_varying;
  std::uint64_t seed_ = 0;
};

// 1 iff the message sent on {i,j} at step receive_step - lag carries delay
// exactly `lag`, i.e. it arrives at receive_step. Send steps before the
// start are covered by the schedule's negative-step extension.
int indicator(const DelaySchedule& schedule, long receive_step, int i, int j, int lag);

// Ring of link-transformed scaled gradients phi_i(k) = g_l(a_i dh_i(z_i(k))),
// depth tau_bar + 1. Slots before k = 0 hold the k = 0 values, matching the
// convention that nodes transmitted their initial gradient before start.
class GradientHistory {
 public:
  GradientHistory(int tau_bar, Eigen::VectorXd phi0);

  void push(Eigen::VectorXd phi);  // phi for the next step
  double at(int node, long step) const;
  long newest_step() const { return newest_step_; }
  int depth() const { return static_cast<int>(ring_.size()); }

 private:
  std::vector<Eigen::VectorXd> ring_;
  long newest_step_ = 0;
};

// One step of the delayed discrete protocol,
//   z_i(k+1) = z_i(k) + eta_tau a_i sum_j sum_r W_ij
//              ( g_l(a_j dh_j(k-r)) - g_l(a_i dh_i(k-r)) ) * I_{k-r,ij}(r).
// Node nonlinearity is excluded here: with delays, only the identity g_n
// keeps the balance exact. A node pairs its own gradient at the same lag r
// as the neighbour's, read from local history. Returns false on a non-finite
// update (state frozen).
bool step_delayed(const Problem& p, SimState& state, GradientHistory& history,
                  const DelaySchedule& schedule, const NonlinearMap& g_link,
                  double eta_tau);

RunResult run_delayed(const Problem& p, const NonlinearMap& g_link, double eta_tau,
                      Eigen::VectorXd z0, const DelaySchedule& schedule,
                      const Termination& term, const RunOptions& options = {});

}  // namespace dra
