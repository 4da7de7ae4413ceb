#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "mdq/geometry.hpp"
#include "mdq/network.hpp"
#include "mdq/problems.hpp"
#include "mdq/quantizer.hpp"

namespace mdq {

/// Power-law stepsize alpha(t) = a0/(t+1)^rho1 and quantization parameter
/// beta(t) = b0/(t+1)^rho2, with a uniform integer delay tau.
struct Schedules {
  double a0 = 1.0;
  double rho1 = 0.5;
  double b0 = 1.0;
  double rho2 = 0.5;
  int tau = 0;
  int horizon = 1000;

  double alpha(int t) const { return a0 / std::pow(t + 1.0, rho1); }
  double beta(int t) const { return b0 / std::pow(t + 1.0, rho2); }
};

/// Deliberate defect injection for mutation-sensitivity testing.
enum class Mutation {
  None,
  DropOneMinusBeta,  // z-update loses its (1 - beta(t+1)) stepsize factor
  ForceK1,           // quantizer runs with a single interior level
};

struct EngineOptions {
  int k_levels = 5;
  bool quantize = true;
  Mutation mutation = Mutation::None;
  double monitor_tol = 1e-8;
  /// Sampled divergence-perturbation monitor; intended for small instances.
  bool perturbation_monitor = false;
};

struct MonitorEvent {
  int t = 0;
  int agent = -1;
  std::string name;
  double magnitude = 0.0;
};

struct StepDiagnostics {
  double d_coord = 0.0;             // [d(t)]_j (all coordinates equal)
  double e_bound = 0.0;             // E(t)
  double quant_err_max = 0.0;       // max_j ||e_j(t)||
  double proj_err_max = 0.0;        // max_i ||p_i(t)||
  double bregman_err_max = 0.0;     // max_i ||eps_i(t)||
  double containment_violation = 0.0;
  double zx_gap_excess = 0.0;
  double z_law_residual = 0.0;
  double descent_slack_min = 0.0;
  std::vector<double> descent_slack;  // per agent
  double consensus = 0.0;             // sum_i ||x_i - xbar|| after the update
  int y_outside_set = 0;
  std::uint64_t bits = 0;
};

struct RunRecord {
  int n_agents = 0;
  int horizon = 0;
  double f_star = 0.0;
  bool f_star_zero = false;  // relative error falls back to absolute error
  std::string scaling_note;

  // Rows indexed by t = 1..T (index t-1 in the vectors below).
  std::vector<double> f_hat_avg;                // (1/N) sum_l f(x_hat_l(t))
  std::vector<std::vector<double>> f_hat_agent; // [t-1][agent]
  std::vector<double> consensus;
  std::vector<double> quant_err_max;
  std::vector<double> e_bound;
  std::vector<double> proj_err_max;
  std::vector<double> bregman_err_max;
  std::vector<double> slack_min;
  std::vector<std::uint64_t> bits_cum;
  std::vector<double> disagreement_cum;  // sum_{s<=t} sum_i ||x_i(s)-xbar(s)||
  std::vector<double> disagreement_envelope;

  std::vector<MonitorEvent> violations;
};

struct ConsensusProfile {
  std::vector<double> measured_cum;
  std::vector<double> envelope;
  bool within_envelope = true;
};

/// One Algorithm-1 state machine: per-agent decision variables, quantizer
/// mid-values, delayed projected-average history, and per-step monitors for
/// every analysis bound.
class Engine {
 public:
  Engine(DistributedProblem problem, BregmanGeometry geom, FeasibleSet set,
         GraphSchedule network, Schedules schedules, EngineOptions options,
         std::vector<Vec> init_points, std::vector<std::deque<Vec>> init_history);

  /// Deterministic random initialization: feasible points and tau buffered
  /// history entries per agent, drawn from the seed.
  static Engine initialize(DistributedProblem problem, BregmanGeometry geom, FeasibleSet set,
                           GraphSchedule network, Schedules schedules, EngineOptions options,
                           std::uint64_t seed);

  StepDiagnostics step();
  RunRecord run(int horizon);

  int time() const { return t_; }
  const Vec& state(int agent) const { return x_[agent]; }
  const Vec& mid_value(int agent) const { return z_[agent]; }
  Vec ergodic_average(int agent) const;
  const DistributedProblem& problem() const { return problem_; }
  double initial_norm_sum() const { return a_init_; }  // A = sum_j ||x_j(0)||

 private:
  void check(std::vector<MonitorEvent>& sink, int t, int agent, const std::string& name,
             double excess);
  double divergence_to_opt(const Vec& point) const;

  DistributedProblem problem_;
  BregmanGeometry geom_;
  FeasibleSet set_;
  GraphSchedule network_;
  Schedules sched_;
  EngineOptions opt_;

  int t_ = 0;
  std::vector<Vec> x_;
  std::vector<Vec> z_;
  std::vector<std::deque<Vec>> y_hist_;  // ytilde(t-tau) ... ytilde(t-1)
  std::vector<Vec> running_sum_;         // sum_{s=1..t} x_i(s)
  Vec x_star_domain_;
  DivergenceBudget budget_;
  double a_init_ = 0.0;
  std::uint64_t bits_total_ = 0;
  std::vector<MonitorEvent> pending_events_;
};

/// Measured cumulative disagreement against the analytic envelope
/// (N*omega/(1-gamma))*A + (2N + N^2*omega/(1-gamma)) * sum_t (G*alpha/sigma + 3N*E).
ConsensusProfile consensus_profile(const RunRecord& record);

}  // namespace mdq
