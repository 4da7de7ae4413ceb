#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mdq/geometry.hpp"

namespace mdq {

/// Sum-of-local-functions objective with exact subgradient oracles, an
/// analytic subgradient bound G over the feasible set, and the centralized
/// optimum used for relative-error reporting. The reported objective carries
/// the 1/N scaling the reference experiments plot; the per-agent oracles the
/// iteration consumes are unscaled, and G bounds those.
class DistributedProblem {
 public:
  enum class Kind { QuadraticEstimation, L1Median };

  /// f_j(x) = a_j * ||x - b_j||^2 with a_j > 0 drawn from [coeff_lo, coeff_hi]
  /// and targets b_j uniform in the box. Optimum is the weighted centroid.
  static DistributedProblem make_estimation_problem(int n_agents, int dim, double coeff_lo,
                                                    double coeff_hi, const FeasibleSet& box,
                                                    std::uint64_t seed);

  /// f_j(x) = ||x - b_j||_1; subgradient sign(x - b_j) with ties broken to 0.
  /// Optimum is the coordinate-wise median of the targets.
  static DistributedProblem make_l1_problem(int n_agents, int dim, const FeasibleSet& box,
                                            std::uint64_t seed);

  Kind kind() const { return kind_; }
  int n_agents() const { return n_agents_; }
  int dim() const { return dim_; }
  double g_bound() const { return g_bound_; }
  const Vec& optimizer() const { return optimizer_; }
  double optimal_value() const { return optimal_value_; }
  const std::vector<Vec>& targets() const { return targets_; }
  std::string scaling_note() const { return "objective = (1/N) * sum_j f_j"; }

  /// Overrides the recorded optimum, e.g. after re-solving over a feasible
  /// set smaller than the sampling box.
  void set_optimum(Vec optimizer, double value) {
    optimizer_ = std::move(optimizer);
    optimal_value_ = value;
  }

  double local_eval(int agent, const Vec& x) const;
  Vec local_subgrad(int agent, const Vec& x) const;
  /// (1/N) * sum_j f_j(x).
  double objective(const Vec& x) const;

 private:
  Kind kind_ = Kind::QuadraticEstimation;
  int n_agents_ = 0;
  int dim_ = 0;
  std::vector<double> coeffs_;  // a_j (quadratic only)
  std::vector<Vec> targets_;    // b_j
  double g_bound_ = 0.0;
  Vec optimizer_;
  double optimal_value_ = 0.0;
};

struct OracleResult {
  Vec optimizer;
  double value = 0.0;
  bool exact = true;       // closed form vs. iterative fallback
  double achieved_gap = 0.0;
};

/// Closed form where available (quadratic: weighted centroid; L1: coordinate
/// medians); otherwise a projected-subgradient run with averaging, reported as
/// approximate with the achieved optimality gap.
OracleResult centralized_oracle(const DistributedProblem& problem, const FeasibleSet& set);

/// max over sampled feasible points of ||g_j(x)|| / G. At most 1 when the
/// analytic bound is correct.
double subgradient_bound_check(const DistributedProblem& problem, const FeasibleSet& set,
                               int samples, std::uint64_t seed = 7);

}  // namespace mdq
