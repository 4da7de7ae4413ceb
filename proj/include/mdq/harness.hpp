#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdq/engine.hpp"

namespace mdq {

/// Flat key = value experiment configuration with explicit seeds; everything
/// needed to reproduce a run byte for byte.
struct RunConfig {
  std::string problem = "quadratic";  // quadratic | l1
  int n_agents = 30;
  int dim = 10;
  double coeff_lo = 0.5;
  double coeff_hi = 1.5;
  double box_halfwidth = 100.0;
  // Region the local targets b_j are drawn from; defaults to the feasible box.
  double target_center = 0.0;
  double target_halfwidth = -1.0;  // negative: use box_halfwidth
  std::string geometry = "euclidean";  // euclidean | entropy
  std::string network = "ring_gossip"; // ring_gossip | complete_gossip | metropolis_ring | metropolis_complete
  double a0 = 1.0;
  double rho1 = 0.5;
  double b0 = 1.0;
  double rho2 = 0.5;
  int tau = 0;
  int horizon = 5000;
  int k_levels = 5;
  bool quantize = true;
  std::uint64_t problem_seed = 1;
  std::uint64_t init_seed = 1;
  std::string out = "";

  static RunConfig load(const std::string& path);
  static RunConfig from_map(const std::map<std::string, std::string>& kv);
  Schedules schedules() const;
};

struct RateFit {
  bool refused = false;
  std::string reason;
  double rho_hat = 0.0;
  double ci95 = 0.0;      // half-width of the 95% slope interval
  double residual = 0.0;  // RMS residual of the log-log fit
  int t_min = 0;
};

/// Least-squares slope of log e(T) against log T over [t_min, T]. The errors
/// vector is indexed by T = 1..size().
RateFit fit_rate_exponent(const std::vector<double>& errors, int t_min);

struct ConditionReport {
  bool tail_stepsize_ok = false;   // 1/(T*alpha(T+tau)) -> 0
  bool cesaro_alpha_ok = false;    // (1/T) sum alpha -> 0
  bool cesaro_beta_ok = false;     // (1/T) sum beta -> 0
  bool pass = false;
  bool delay_free_pass = false;    // same conditions with tau = 0
  bool forms_agree = false;
};

/// Numerical check of the convergence conditions at T = 1e3, 1e4, 1e5, in
/// both the tau-shifted and the delay-free forms.
ConditionReport condition_check(const Schedules& schedules);

/// Per-agent and network-averaged relative error |f(xhat) - f*| / |f*| for
/// each T; falls back to absolute error when f* = 0 (record flags it).
std::vector<double> relative_error_avg(const RunRecord& record);
std::vector<double> relative_error_agent(const RunRecord& record, int agent);

struct ExperimentResult {
  RunRecord record;
  std::vector<double> rel_err_avg;
  RateFit fit;
  std::string csv_path;
  std::string plot_path;
};

/// Builds problem, network, and engine from the config, runs, and writes the
/// CSV (and an SVG of the error curve) when an output stem is configured.
ExperimentResult run_experiment(const RunConfig& config);

void write_csv(const RunRecord& record, const std::string& path);
void write_svg_plot(const std::vector<double>& rel_err_avg, const std::string& path);

struct SweepCell {
  double rho1 = 0.0;
  double rho2 = 0.0;
  double predicted = 0.0;  // min(rho1, rho2, 1 - rho1)
  RateFit fit;
};

/// 3x3-style rate sweep over the given exponent grids; one run per cell plus
/// a comparison CSV when out_dir is nonempty.
std::vector<SweepCell> rate_sweep(const RunConfig& base, const std::vector<double>& rho1_grid,
                                  const std::vector<double>& rho2_grid, int fit_t_min,
                                  const std::string& out_dir);

/// Aggregated invariant suite across all modules; prints one line per check
/// with its worst slack. Returns the number of failed checks.
int validate_suite(Mutation mutation, std::ostream& out);

}  // namespace mdq
