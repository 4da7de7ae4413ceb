#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdq/geometry.hpp"

namespace mdq {

/// omega, gamma from the geometric-mixing bound
/// |[P(m,n)]_ij - 1/N| <= omega * gamma^(m-n).
struct MixingConstants {
  double omega = 1.0;
  double gamma = 0.0;
};

using EdgeList = std::vector<std::pair<int, int>>;

/// Time-varying doubly stochastic weight schedule t -> P(t) with a certified
/// connectivity window B and minimum positive entry theta.
class GraphSchedule {
 public:
  enum class Kind { GossipCycle, Metropolis, Static };

  /// P(t) cycles through the pairwise-averaging matrices of the base edges.
  /// Doubly stochastic by construction; B = number of base edges.
  static GraphSchedule gossip_cycle(int n_agents, const EdgeList& base_edges);
  /// Static Metropolis weights over a fixed connected undirected graph; B = 1.
  static GraphSchedule metropolis(int n_agents, const EdgeList& edges);
  /// A single fixed matrix repeated forever.
  static GraphSchedule static_matrix(Mat p, int b_window);

  Kind kind() const { return kind_; }
  int n_agents() const { return n_; }
  int b_window() const { return b_; }
  /// Minimum positive entry realized over one period of the schedule.
  double theta() const { return theta_; }
  MixingConstants mixing() const;

  const Mat& matrix(int t) const;

  /// Structured text serialization (N, B, theta, kind, explicit matrices).
  void save(const std::string& path) const;
  static GraphSchedule load(const std::string& path);

 private:
  GraphSchedule() = default;
  static GraphSchedule from_period(Kind kind, int n, std::vector<Mat> period);

  Kind kind_ = Kind::Static;
  int n_ = 0;
  int b_ = 1;
  double theta_ = 0.0;
  std::vector<Mat> period_;  // P(t) = period_[t % period_.size()]
};

struct StochasticCheck {
  bool pass = false;
  double max_deviation = 0.0;  // worst row/column sum deviation or negativity
};

StochasticCheck check_doubly_stochastic(const Mat& p, double tol = 1e-12);

struct ConnectivityCheck {
  bool pass = false;
  int first_failing_window = -1;
};

/// Union graph over each window (cB, (c+1)B] must be strongly connected.
ConnectivityCheck check_b_connectivity(const GraphSchedule& schedule, int horizon);

/// P(m, n) = P(m) * P(m-1) * ... * P(n); P(n-1, n) = identity.
Mat transition_product(const GraphSchedule& schedule, int m, int n);

/// Worst ratio max |[P(m,n)]_ij - 1/N| / (omega * gamma^(m-n)) over
/// 1 <= n <= m <= horizon. At most 1 (plus float noise) when the
/// geometric-mixing bound holds.
double mixing_check(const GraphSchedule& schedule, int horizon);

EdgeList ring_edges(int n);
EdgeList complete_edges(int n);

}  // namespace mdq
