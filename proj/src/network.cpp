#include "mdq/network.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <stdexcept>

namespace mdq {

namespace {

bool strongly_connected(int n, const std::set<std::pair<int, int>>& edges) {
  if (n <= 1) return true;
  // Directed reachability from every node; N <= 100 so this is cheap.
  std::vector<std::vector<int>> adj(n);
  for (const auto& [i, j] : edges) adj[i].push_back(j);
  for (int s = 0; s < n; ++s) {
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    q.push(s);
    seen[s] = 1;
    int count = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          q.push(v);
        }
      }
    }
    if (count != n) return false;
  }
  return true;
}

double min_positive_entry(const std::vector<Mat>& period) {
  double theta = 1.0;
  for (const Mat& p : period) {
    for (int i = 0; i < p.rows(); ++i) {
      for (int j = 0; j < p.cols(); ++j) {
        if (p(i, j) > 0.0) theta = std::min(theta, p(i, j));
      }
    }
  }
  return theta;
}

}  // namespace

GraphSchedule GraphSchedule::from_period(Kind kind, int n, std::vector<Mat> period) {
  GraphSchedule s;
  s.kind_ = kind;
  s.n_ = n;
  s.b_ = static_cast<int>(period.size());
  s.period_ = std::move(period);
  s.theta_ = min_positive_entry(s.period_);
  for (const Mat& p : s.period_) {
    const auto check = check_doubly_stochastic(p);
    if (!check.pass) throw std::invalid_argument("schedule matrix not doubly stochastic");
  }
  const auto conn = check_b_connectivity(s, s.b_);
  if (!conn.pass) throw std::invalid_argument("schedule base graph not strongly connected");
  return s;
}

GraphSchedule GraphSchedule::gossip_cycle(int n_agents, const EdgeList& base_edges) {
  if (n_agents < 1) throw std::invalid_argument("gossip_cycle: n_agents >= 1 required");
  std::vector<Mat> period;
  if (n_agents == 1 || base_edges.empty()) {
    if (n_agents > 1) throw std::invalid_argument("gossip_cycle: base graph disconnected");
    period.push_back(Mat::Identity(1, 1));
    return from_period(Kind::GossipCycle, 1, std::move(period));
  }
  for (const auto& [i, j] : base_edges) {
    if (i < 0 || j < 0 || i >= n_agents || j >= n_agents || i == j) {
      throw std::invalid_argument("gossip_cycle: bad edge");
    }
    Mat p = Mat::Identity(n_agents, n_agents);
    p(i, i) = p(j, j) = 0.5;
    p(i, j) = p(j, i) = 0.5;
    period.push_back(std::move(p));
  }
  return from_period(Kind::GossipCycle, n_agents, std::move(period));
}

GraphSchedule GraphSchedule::metropolis(int n_agents, const EdgeList& edges) {
  std::vector<int> deg(n_agents, 0);
  for (const auto& [i, j] : edges) {
    ++deg[i];
    ++deg[j];
  }
  Mat p = Mat::Zero(n_agents, n_agents);
  for (const auto& [i, j] : edges) {
    const double w = 1.0 / (1.0 + std::max(deg[i], deg[j]));
    p(i, j) = p(j, i) = w;
  }
  for (int i = 0; i < n_agents; ++i) p(i, i) = 1.0 - p.row(i).sum();
  std::vector<Mat> period{std::move(p)};
  return from_period(Kind::Metropolis, n_agents, std::move(period));
}

GraphSchedule GraphSchedule::static_matrix(Mat p, int b_window) {
  const int n = static_cast<int>(p.rows());
  auto s = from_period(Kind::Static, n, {std::move(p)});
  s.b_ = b_window;
  return s;
}

const Mat& GraphSchedule::matrix(int t) const {
  if (t < 0) throw std::invalid_argument("matrix: negative time");
  return period_[t % period_.size()];
}

MixingConstants GraphSchedule::mixing() const {
  // theta = 1 only for the trivial single-agent schedule; clamp so the
  // constants stay well defined (the bound is vacuous for N = 1).
  const double theta = std::min(theta_, 0.5);
  const double base = 1.0 - theta / (4.0 * n_ * n_);
  MixingConstants m;
  m.omega = 1.0 / (base * base);
  m.gamma = std::pow(base, 1.0 / b_);
  return m;
}

void GraphSchedule::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save: cannot open " + path);
  out.precision(17);
  out << "n_agents " << n_ << "\n";
  out << "b_window " << b_ << "\n";
  out << "theta " << theta_ << "\n";
  out << "kind "
      << (kind_ == Kind::GossipCycle ? "gossip_cycle"
                                     : kind_ == Kind::Metropolis ? "metropolis" : "static")
      << "\n";
  out << "period " << period_.size() << "\n";
  for (const Mat& p : period_) {
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < n_; ++j) out << p(i, j) << (j + 1 == n_ ? '\n' : ' ');
    }
  }
}

GraphSchedule GraphSchedule::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load: cannot open " + path);
  std::string key, kind_str;
  int n = 0, b = 0;
  double theta = 0.0;
  std::size_t count = 0;
  in >> key >> n >> key >> b >> key >> theta >> key >> kind_str >> key >> count;
  if (!in || n < 1 || count == 0) throw std::runtime_error("load: malformed schedule file");
  std::vector<Mat> period(count, Mat(n, n));
  for (auto& p : period) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) in >> p(i, j);
    }
  }
  if (!in) throw std::runtime_error("load: truncated schedule file");
  const Kind kind = kind_str == "gossip_cycle" ? Kind::GossipCycle
                    : kind_str == "metropolis" ? Kind::Metropolis
                                               : Kind::Static;
  auto s = from_period(kind, n, std::move(period));
  s.b_ = b;
  return s;
}

StochasticCheck check_doubly_stochastic(const Mat& p, double tol) {
  StochasticCheck c;
  if (p.rows() != p.cols()) return c;
  double dev = 0.0;
  for (int i = 0; i < p.rows(); ++i) {
    dev = std::max(dev, std::abs(p.row(i).sum() - 1.0));
    dev = std::max(dev, std::abs(p.col(i).sum() - 1.0));
  }
  const double neg = p.minCoeff() < 0.0 ? -p.minCoeff() : 0.0;
  c.max_deviation = std::max(dev, neg);
  c.pass = dev <= tol && neg == 0.0;
  return c;
}

ConnectivityCheck check_b_connectivity(const GraphSchedule& schedule, int horizon) {
  ConnectivityCheck c;
  const int b = schedule.b_window();
  const int n = schedule.n_agents();
  if (horizon < b) throw std::invalid_argument("check_b_connectivity: horizon < B");
  for (int w = 0; (w + 1) * b <= horizon; ++w) {
    std::set<std::pair<int, int>> edges;
    for (int t = w * b + 1; t <= (w + 1) * b; ++t) {
      const Mat& p = schedule.matrix(t);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (p(i, j) > 0.0) edges.emplace(j, i);
        }
      }
    }
    if (!strongly_connected(n, edges)) {
      c.first_failing_window = w;
      return c;
    }
  }
  c.pass = true;
  return c;
}

Mat transition_product(const GraphSchedule& schedule, int m, int n) {
  if (n < 0 || m < n - 1) throw std::invalid_argument("transition_product: need m >= n-1 >= -1");
  Mat prod = Mat::Identity(schedule.n_agents(), schedule.n_agents());
  for (int t = n; t <= m; ++t) prod = schedule.matrix(t) * prod;
  return prod;
}

double mixing_check(const GraphSchedule& schedule, int horizon) {
  const int num = schedule.n_agents();
  const auto mc = schedule.mixing();
  double worst = 0.0;
  for (int n = 1; n <= horizon; ++n) {
    Mat prod = Mat::Identity(num, num);
    for (int m = n; m <= horizon; ++m) {
      prod = schedule.matrix(m) * prod;
      const double dev = (prod.array() - 1.0 / num).abs().maxCoeff();
      const double bound = mc.omega * std::pow(mc.gamma, m - n);
      worst = std::max(worst, dev / bound);
    }
  }
  return worst;
}

EdgeList ring_edges(int n) {
  EdgeList e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  if (n == 2) e.pop_back();  // single edge, not a doubled one
  if (n == 1) e.clear();
  return e;
}

EdgeList complete_edges(int n) {
  EdgeList e;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return e;
}

}  // namespace mdq
