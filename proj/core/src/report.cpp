#include "dra/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <thread>

namespace dra {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_metrics_csv(std::ostream& os, const RunResult& run, bool per_node_states) {
  os << "k,residual,feas_gap,grad_spread";
  if (per_node_states) {
    const long n = run.final_state.z.size();
    for (long i = 0; i < n; ++i) os << ",z_" << i;
  }
  os << "\n";
  for (std::size_t row = 0; row < run.metrics.size(); ++row) {
    const IterationRecord& rec = run.metrics[row];
    os << rec.k << ',' << format_double(rec.residual) << ',' << format_double(rec.feas_gap)
       << ',' << format_double(rec.grad_spread);
    if (per_node_states) {
      const Eigen::VectorXd& z = run.states.at(row);
      for (long i = 0; i < z.size(); ++i) os << ',' << format_double(z[i]);
    }
    os << "\n";
  }
}

const char* status_name(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::unstable: return "unstable";
    case RunStatus::budget_exhausted: return "budget_exhausted";
  }
  return "?";
}

int status_exit_code(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return 0;
    case RunStatus::budget_exhausted: return 2;
    case RunStatus::unstable: return 3;
  }
  return 2;
}

RunArtifact make_artifact(const std::string& name, const ScenarioConfig& config,
                          const BuiltScenario& built, const RunResult& run,
                          std::string csv_path) {
  const RunClassification cls = classify_run(run);

  RunArtifact a;
  a.name = name;
  a.csv_path = std::move(csv_path);
  a.verdict = cls.verdict;
  a.iterations = run.iterations;
  a.iterations_to_threshold = cls.iterations_to_threshold;
  a.final_residual = cls.final_residual;
  a.max_feas_gap = run.max_abs_feas_gap;
  a.eta_tau = built.eta_tau;
  if (built.schedule) {
    a.tau_bar = built.schedule->tau_bar();
    a.delay_mode = built.schedule->mode() == DelayMode::time_varying ? "time_varying"
                                                                     : "time_invariant";
  }

  json j;
  j["name"] = name;
  j["verdict"] = status_name(cls.verdict);
  j["iterations"] = run.iterations;
  j["iterations_to_threshold"] = cls.iterations_to_threshold;
  j["final_residual"] = cls.final_residual;
  j["final_grad_spread"] = cls.final_spread;
  j["max_feas_gap"] = run.max_abs_feas_gap;
  j["max_abs_state"] = run.max_abs_state;
  j["eta_tau"] = built.eta_tau;
  j["eta_auto"] = built.eta_auto;
  if (built.bound) {
    j["bound"] = {{"value", built.bound->bound},
                  {"delay_free", built.bound->delay_free_bound},
                  {"lambda2", built.bound->spectrum.lambda2},
                  {"lambdaN", built.bound->spectrum.lambdaN},
                  {"sector_lower", built.bound->sector.lower},
                  {"sector_upper", built.bound->sector.upper},
                  {"curvature_u", built.bound->curvature.u},
                  {"curvature_v", built.bound->curvature.v},
                  {"tau_bar", built.bound->tau_bar}};
  }
  if (built.oracle) {
    j["oracle"] = {{"lambda_star", built.oracle->lambda_star},
                   {"optimal_cost", built.oracle->optimal_cost}};
  }
  j["csv"] = a.csv_path;
  j["config"] = json::parse(config_echo_json(config));
  a.summary_json = j.dump(2);
  return a;
}

std::string comparison_table(std::span<const RunArtifact> artifacts) {
  std::vector<std::size_t> order(artifacts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const long ia = artifacts[a].iterations_to_threshold;
    const long ib = artifacts[b].iterations_to_threshold;
    if (ia != ib) return static_cast<unsigned long>(ia) < static_cast<unsigned long>(ib);
    return a < b;
  });

  std::ostringstream os;
  os << "scenario                     verdict            iters@1%   final_residual   max_feas_gap\n";
  for (std::size_t idx : order) {
    const RunArtifact& a = artifacts[idx];
    char line[256];
    std::snprintf(line, sizeof(line), "%-28s %-18s %9ld   %-14.6g   %-12.3g\n",
                  a.name.c_str(), status_name(a.verdict), a.iterations_to_threshold,
                  a.final_residual, a.max_feas_gap);
    os << line;
  }
  return os.str();
}

std::string comparison_csv(std::span<const RunArtifact> artifacts) {
  std::ostringstream os;
  os << "scenario,verdict,eta_tau,tau_bar,delay_mode,iterations,iters_to_threshold,"
        "final_residual,max_feas_gap\n";
  for (const RunArtifact& a : artifacts) {
    os << a.name << ',' << status_name(a.verdict) << ',' << format_double(a.eta_tau) << ','
       << a.tau_bar << ',' << a.delay_mode << ',' << a.iterations << ','
       << a.iterations_to_threshold << ',' << format_double(a.final_residual) << ','
       << format_double(a.max_feas_gap) << "\n";
  }
  return os.str();
}

std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const SweepSpec& spec,
                                 unsigned workers) {
  struct Point {
    double eta;
    int tau;
    DelayMode mode;
  };
  std::vector<Point> grid;
  for (double eta : spec.step_rates) {
    for (int tau : spec.tau_bars) {
      for (DelayMode mode : spec.modes) grid.push_back({eta, tau, mode});
    }
  }

  std::vector<SweepCell> cells(grid.size());
  const auto run_one = [&](std::size_t idx) {
    const Point& pt = grid[idx];
    ScenarioConfig config = base;
    config.step_rate = pt.eta;
    DelayConfig d = config.delay.value_or(DelayConfig{});
    d.tau_bar = pt.tau;
    d.mode = pt.mode;
    config.delay = d;

    const BuiltScenario built = build_scenario(config);
    const RunResult run = execute(built);
    const RunClassification cls = classify_run(run);

    SweepCell& cell = cells[idx];
    cell.eta_tau = pt.eta;
    cell.tau_bar = pt.tau;
    cell.mode = pt.mode;
    cell.verdict = cls.verdict;
    cell.iterations = run.iterations;
    cell.final_residual = cls.final_residual;
    cell.max_feas_gap = run.max_abs_feas_gap;
  };

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, grid.size() > 0 ? grid.size() : 1);

  if (workers <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) run_one(i);
  } else {
    // Failures inside a worker are carried back and rethrown after the join;
    // the first grid-order failure wins.
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < grid.size(); i += workers) run_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }
  return cells;
}

std::string sweep_csv(std::span<const SweepCell> cells) {
  std::ostringstream os;
  os << "eta_tau,tau_bar,mode,verdict,iterations,final_residual,max_feas_gap\n";
  for (const SweepCell& c : cells) {
    os << format_double(c.eta_tau) << ',' << c.tau_bar << ','
       << (c.mode == DelayMode::time_varying ? "time_varying" : "time_invariant") << ','
       << status_name(c.verdict) << ',' << c.iterations << ','
       << format_double(c.final_residual) << ',' << format_double(c.max_feas_gap) << "\n";
  }
  return os.str();
}

}  // namespace dra
