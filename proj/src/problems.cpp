#include "mdq/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mdq {

namespace {

// Distance from b to the farthest corner of the box.
double corner_distance(const FeasibleSet& box, const Vec& b) {
  double d2 = 0.0;
  for (int i = 0; i < box.dim(); ++i) {
    const double lo = std::abs(b[i] - box.lower()[i]);
    const double hi = std::abs(b[i] - box.upper()[i]);
    d2 += std::max(lo, hi) * std::max(lo, hi);
  }
  return std::sqrt(d2);
}

double coordinate_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

DistributedProblem DistributedProblem::make_estimation_problem(int n_agents, int dim,
                                                               double coeff_lo, double coeff_hi,
                                                               const FeasibleSet& box,
                                                               std::uint64_t seed) {
  if (n_agents < 1 || dim < 1) throw std::invalid_argument("estimation: bad sizes");
  if (coeff_lo <= 0.0 || coeff_hi < coeff_lo) {
    throw std::invalid_argument("estimation: coefficients must be positive");
  }
  if (box.kind() != SetKind::Box || box.dim() != dim) {
    throw std::invalid_argument("estimation: need a box of matching dimension");
  }
  DistributedProblem p;
  p.kind_ = Kind::QuadraticEstimation;
  p.n_agents_ = n_agents;
  p.dim_ = dim;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coeff(coeff_lo, coeff_hi);
  double g = 0.0;
  for (int j = 0; j < n_agents; ++j) {
    p.coeffs_.push_back(coeff(rng));
    p.targets_.push_back(box.sample(rng));
    g = std::max(g, 2.0 * p.coeffs_[j] * corner_distance(box, p.targets_[j]));
  }
  p.g_bound_ = g;
  // Weighted centroid: a convex combination of the targets, hence feasible.
  double wsum = 0.0;
  Vec centroid = Vec::Zero(dim);
  for (int j = 0; j < n_agents; ++j) {
    wsum += p.coeffs_[j];
    centroid += p.coeffs_[j] * p.targets_[j];
  }
  p.optimizer_ = centroid / wsum;
  p.optimal_value_ = p.objective(p.optimizer_);
  return p;
}

DistributedProblem DistributedProblem::make_l1_problem(int n_agents, int dim,
                                                       const FeasibleSet& box,
                                                       std::uint64_t seed) {
  if (n_agents < 1 || dim < 1) throw std::invalid_argument("l1: bad sizes");
  if (box.kind() != SetKind::Box || box.dim() != dim) {
    throw std::invalid_argument("l1: need a box of matching dimension");
  }
  DistributedProblem p;
  p.kind_ = Kind::L1Median;
  p.n_agents_ = n_agents;
  p.dim_ = dim;
  std::mt19937_64 rng(seed);
  for (int j = 0; j < n_agents; ++j) p.targets_.push_back(box.sample(rng));
  p.g_bound_ = std::sqrt(static_cast<double>(dim));
  Vec med(dim);
  for (int i = 0; i < dim; ++i) {
    std::vector<double> coords;
    for (const Vec& b : p.targets_) coords.push_back(b[i]);
    med[i] = coordinate_median(std::move(coords));
  }
  p.optimizer_ = med;
  p.optimal_value_ = p.objective(p.optimizer_);
  return p;
}

double DistributedProblem::local_eval(int agent, const Vec& x) const {
  const Vec r = x - targets_[agent];
  if (kind_ == Kind::QuadraticEstimation) return coeffs_[agent] * r.squaredNorm();
  return r.lpNorm<1>();
}

Vec DistributedProblem::local_subgrad(int agent, const Vec& x) const {
  const Vec r = x - targets_[agent];
  if (kind_ == Kind::QuadraticEstimation) return 2.0 * coeffs_[agent] * r;
  Vec g(dim_);
  for (int i = 0; i < dim_; ++i) g[i] = r[i] > 0.0 ? 1.0 : (r[i] < 0.0 ? -1.0 : 0.0);
  return g;
}

double DistributedProblem::objective(const Vec& x) const {
  double s = 0.0;
  for (int j = 0; j < n_agents_; ++j) s += local_eval(j, x);
  return s / n_agents_;
}

OracleResult centralized_oracle(const DistributedProblem& problem, const FeasibleSet& set) {
  OracleResult r;
  if (set.kind() == SetKind::Box) {
    // Closed forms: the centroid is a convex combination of in-box targets and
    // the coordinate median lies between in-box targets, so both are feasible.
    r.optimizer = euclidean_project(set, problem.optimizer());
    r.value = problem.objective(r.optimizer);
    r.exact = true;
    return r;
  }
  // Iterative fallback for other sets: projected subgradient with averaging.
  const int cap = 1000000;
  const double tol = 1e-10;
  std::mt19937_64 rng(11);
  Vec x = set.sample(rng);
  Vec sum = Vec::Zero(set.dim());
  double best = problem.objective(x);
  Vec best_x = x;
  for (int t = 1; t <= cap; ++t) {
    Vec g = Vec::Zero(set.dim());
    for (int j = 0; j < problem.n_agents(); ++j) g += problem.local_subgrad(j, x);
    g /= problem.n_agents();
    const double step = 1.0 / (problem.g_bound() * std::sqrt(static_cast<double>(t)));
    x = euclidean_project(set, x - step * g);
    sum += x;
    if (t % 1000 == 0) {
      const Vec avg = sum / t;
      const double v = problem.objective(avg);
      if (v < best) {
        const double gap = best - v;
        best = v;
        best_x = avg;
        if (gap < tol * std::max(1.0, std::abs(best))) break;
      }
    }
  }
  r.optimizer = best_x;
  r.value = best;
  r.exact = false;
  r.achieved_gap = tol;
  return r;
}

double subgradient_bound_check(const DistributedProblem& problem, const FeasibleSet& set,
                               int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("subgradient_bound_check: samples >= 1");
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Vec x = set.sample(rng);
    for (int j = 0; j < problem.n_agents(); ++j) {
      worst = std::max(worst, problem.local_subgrad(j, x).norm());
    }
  }
  return worst / problem.g_bound();
}

}  // namespace mdq
