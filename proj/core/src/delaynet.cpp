#include "dra/delaynet.hpp"

#include <stdexcept>
#include <utility>

#include "dra/rng.hpp"
#include "run_loop.hpp"

namespace dra {

DelaySchedule DelaySchedule::sample(const Network& net, int tau_bar, DelayMode mode,
                                    std::uint64_t seed) {
  if (tau_bar < 0) throw std::invalid_argument("max delay must be >= 0");
  return DelaySchedule(net.size(), tau_bar, mode, seed);
}

int DelaySchedule::delay(long step, int i, int j) const {
  if (tau_bar_ == 0) return 0;
  if (i == j || i < 0 || j < 0 || i >= node_count_ || j >= node_count_) {
    throw std::invalid_argument("delay queried for an invalid link");
  }
  // Canonical link id keeps tau_ij == tau_ji.
  const int lo = i < j ? i : j;
  const int hi = i < j ? j : i;
  const std::uint64_t link = static_cast<std::uint64_t>(lo) * node_count_ + hi;
  std::uint64_t h = hash_combine(seed_, link);
  if (mode_ == DelayMode::time_varying) {
    h = hash_combine(h, static_cast<std::uint64_t>(step));
  }
  return static_cast<int>(h % static_cast<std::uint64_t>(tau_bar_ + 1));
}

int indicator(const DelaySchedule& schedule, long receive_step, int i, int j, int lag) {
  if (lag < 0 || lag > schedule.tau_bar()) {
    throw std::invalid_argument("indicator lag outside [0, tau_bar]");
  }
  return schedule.delay(receive_step - lag, i, j) == lag ? 1 : 0;
}

GradientHistory::GradientHistory(int tau_bar, Eigen::VectorXd phi0) {
  if (tau_bar < 0) throw std::invalid_argument("max delay must be >= 0");
  ring_.assign(static_cast<std::size_t>(tau_bar) + 1, phi0);
  newest_step_ = 0;
}

void GradientHistory::push(Eigen::VectorXd phi) {
  newest_step_ += 1;
  ring_[static_cast<std::size_t>(newest_step_ % depth())] = std::move(phi);
}

double GradientHistory::at(int node, long step) const {
  if (step < 0) step = 0;  // pre-start slots hold the initial gradient
  if (step > newest_step_ || step < newest_step_ - depth() + 1) {
    throw std::out_of_range("gradient history queried outside its window");
  }
  return ring_[static_cast<std::size_t>(step % depth())][node];
}

bool step_delayed(const Problem& p, SimState& state, GradientHistory& history,
                  const DelaySchedule& schedule, const NonlinearMap& g_link,
                  double eta_tau) {
  const int n = p.size();
  const long k = state.iteration;
  const int tau_bar = schedule.tau_bar();

  Eigen::VectorXd next(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j : p.net.neighbors()[i]) {
      const double w = p.net.weight(i, j);
      for (int r = 0; r <= tau_bar; ++r) {
        if (schedule.delay(k - r, i, j) != r) continue;
        acc += w * (history.at(j, k - r) - history.at(i, k - r));
      }
    }
    next[i] = state.z[i] + eta_tau * (p.sign(i) * acc);
  }
  if (!next.allFinite()) return false;

  state.z = std::move(next);
  state.iteration += 1;

  Eigen::VectorXd phi(n);
  for (int i = 0; i < n; ++i) phi[i] = g_link(p.scaled_gradient(i, state.z[i]));
  history.push(std::move(phi));
  return true;
}

RunResult run_delayed(const Problem& p, const NonlinearMap& g_link, double eta_tau,
                      Eigen::VectorXd z0, const DelaySchedule& schedule,
                      const Termination& term, const RunOptions& options) {
  p.validate();
  if (!(eta_tau > 0.0)) throw std::invalid_argument("step rate must be > 0");
  if (options.momentum != 0.0) {
    throw std::invalid_argument("momentum baseline is delay-free only");
  }
  if (schedule.node_count() != p.size()) {
    throw std::invalid_argument("delay schedule was sampled for a different network");
  }

  Eigen::VectorXd phi0(p.size());
  for (int i = 0; i < p.size(); ++i) phi0[i] = g_link(p.scaled_gradient(i, z0[i]));
  GradientHistory history(schedule.tau_bar(), std::move(phi0));

  return detail::run_loop(p, std::move(z0), term, options, [&](SimState& state) {
    return step_delayed(p, state, history, schedule, g_link, eta_tau);
  });
}

}  // namespace dra
