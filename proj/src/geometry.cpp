#include "mdq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mdq {

FeasibleSet FeasibleSet::box(Vec lower, Vec upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw std::invalid_argument("box: bound dimensions must match and be nonzero");
  }
  for (int i = 0; i < lower.size(); ++i) {
    if (lower[i] > upper[i]) throw std::invalid_argument("box: lower > upper");
  }
  FeasibleSet s;
  s.kind_ = SetKind::Box;
  s.dim_ = static_cast<int>(lower.size());
  s.lower_ = std::move(lower);
  s.upper_ = std::move(upper);
  return s;
}

FeasibleSet FeasibleSet::centered_box(int dim, double halfwidth) {
  return box(Vec::Constant(dim, -halfwidth), Vec::Constant(dim, halfwidth));
}

FeasibleSet FeasibleSet::simplex(int dim) {
  if (dim < 1) throw std::invalid_argument("simplex: dim >= 1 required");
  FeasibleSet s;
  s.kind_ = SetKind::Simplex;
  s.dim_ = dim;
  return s;
}

bool FeasibleSet::contains(const Vec& x, double tol) const {
  if (x.size() != dim_) return false;
  if (kind_ == SetKind::Box) {
    for (int i = 0; i < dim_; ++i) {
      if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
    }
    return true;
  }
  if (x.minCoeff() < -tol) return false;
  return std::abs(x.sum() - 1.0) <= tol * dim_;
}

Vec FeasibleSet::sample(std::mt19937_64& rng) const {
  Vec x(dim_);
  if (kind_ == SetKind::Box) {
    for (int i = 0; i < dim_; ++i) {
      std::uniform_real_distribution<double> u(lower_[i], upper_[i]);
      x[i] = u(rng);
    }
    return x;
  }
  std::exponential_distribution<double> e(1.0);
  for (int i = 0; i < dim_; ++i) x[i] = e(rng);
  return x / x.sum();
}

BregmanGeometry BregmanGeometry::euclidean() {
  BregmanGeometry g;
  g.kind_ = GeometryKind::Euclidean;
  g.sigma_ = 1.0;
  g.l_ = 1.0;
  return g;
}

BregmanGeometry BregmanGeometry::negative_entropy(int dim, double eps) {
  if (dim < 1 || eps <= 0.0 || eps >= 1.0) {
    throw std::invalid_argument("negative_entropy: need dim >= 1 and eps in (0,1)");
  }
  BregmanGeometry g;
  g.kind_ = GeometryKind::NegativeEntropy;
  g.sigma_ = 1.0;              // Pinsker: KL(a,b) >= 0.5*||a-b||_1^2 >= 0.5*||a-b||^2
  g.l_ = dim / eps;            // sup of 1/x_i over the eps-interior
  g.eps_ = eps;
  g.dim_ = dim;
  return g;
}

double BregmanGeometry::phi(const Vec& x) const {
  if (kind_ == GeometryKind::Euclidean) return 0.5 * x.squaredNorm();
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw std::domain_error("entropy phi: negative coordinate");
    if (x[i] > 0.0) s += x[i] * std::log(x[i]);
  }
  return s;
}

Vec BregmanGeometry::grad_phi(const Vec& x) const {
  if (kind_ == GeometryKind::Euclidean) return x;
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0) throw std::domain_error("entropy grad: nonpositive coordinate");
    g[i] = 1.0 + std::log(x[i]);
  }
  return g;
}

Vec BregmanGeometry::to_domain(const FeasibleSet& set, const Vec& x) const {
  if (kind_ == GeometryKind::Euclidean) return x;
  if (set.kind() != SetKind::Simplex) {
    throw std::invalid_argument("entropy geometry requires a simplex set");
  }
  const int n = set.dim();
  return (1.0 - eps_) * x + Vec::Constant(n, eps_ / n);
}

double bregman_divergence(const BregmanGeometry& geom, const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("bregman_divergence: dim mismatch");
  if (geom.kind() == GeometryKind::Euclidean) {
    return 0.5 * (a - b).squaredNorm();
  }
  // Sum a_i*log(a_i/b_i) - sum a_i + sum b_i, valid for nonnegative a and
  // strictly positive b (not necessarily normalized).
  double v = 0.0;
  for (int i = 0; i < a.size(); ++i) {
    if (b[i] <= 0.0) throw std::domain_error("bregman_divergence: nonpositive b coordinate");
    if (a[i] < 0.0) throw std::domain_error("bregman_divergence: negative a coordinate");
    if (a[i] > 0.0) v += a[i] * std::log(a[i] / b[i]);
    v += b[i] - a[i];
  }
  return std::max(v, 0.0);
}

static Vec project_simplex(const Vec& y) {
  // Sort-based water-filling; O(n log n).
  const int n = static_cast<int>(y.size());
  std::vector<double> u(y.data(), y.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = std::max(y[i] - theta, 0.0);
  return x;
}

Vec euclidean_project(const FeasibleSet& set, const Vec& y) {
  if (y.size() != set.dim()) throw std::invalid_argument("project: dim mismatch");
  if (set.kind() == SetKind::Box) {
    return y.cwiseMax(set.lower()).cwiseMin(set.upper());
  }
  return project_simplex(y);
}

// Entropy prox over {x in simplex : x_i >= lo}. KKT gives
// x_i = max(lo, w_i * s) with the scale s chosen so the coordinates sum to 1;
// the sum is strictly increasing in s, so bisection suffices.
static Vec entropy_prox_interior(const Vec& anchor, const Vec& g, double eta, double lo) {
  const int n = static_cast<int>(anchor.size());
  Vec logw(n);
  for (int i = 0; i < n; ++i) {
    if (anchor[i] <= 0.0) throw std::domain_error("entropy prox: anchor not strictly positive");
    logw[i] = std::log(anchor[i]) - eta * g[i];
  }
  const double shift = logw.maxCoeff();
  Vec w = (logw.array() - shift).exp();

  auto total = [&](double s) {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += std::max(lo, w[i] * s);
    return t;
  };
  double shi = 1.0;
  while (total(shi) < 1.0) shi *= 2.0;
  double slo = 0.0;
  for (int it = 0; it < 200 && (shi - slo) > 1e-16 * shi; ++it) {
    const double mid = 0.5 * (slo + shi);
    (total(mid) < 1.0 ? slo : shi) = mid;
  }
  const double s = 0.5 * (slo + shi);
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = std::max(lo, w[i] * s);
  x /= x.sum();  // renormalize residual bisection error
  return x;
}

Vec mirror_step(const BregmanGeometry& geom, const FeasibleSet& set, const Vec& anchor,
                const Vec& g, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("mirror_step: eta must be positive");
  if (anchor.size() != set.dim() || g.size() != set.dim()) {
    throw std::invalid_argument("mirror_step: dim mismatch");
  }
  if (geom.kind() == GeometryKind::Euclidean) {
    return euclidean_project(set, anchor - eta * g);
  }
  if (set.kind() != SetKind::Simplex) {
    throw std::invalid_argument("mirror_step: entropy geometry requires a simplex set");
  }
  const double lo = geom.interior_eps() / set.dim();
  return entropy_prox_interior(anchor, g, eta, lo);
}

double prox_nonexpansiveness_gap(const BregmanGeometry& geom, const FeasibleSet& set,
                                 const Vec& anchor, const Vec& g1, const Vec& g2, double eta) {
  const Vec x1 = mirror_step(geom, set, anchor, g1, eta);
  const Vec x2 = mirror_step(geom, set, anchor, g2, eta);
  return (eta / geom.sigma()) * (g2 - g1).norm() - (x2 - x1).norm();
}

DivergenceBudget divergence_budget(const BregmanGeometry& geom, const FeasibleSet& set,
                                   int samples) {
  if (samples < 1) throw std::invalid_argument("divergence_budget: samples >= 1 required");
  DivergenceBudget b;
  if (geom.kind() == GeometryKind::Euclidean && set.kind() == SetKind::Box) {
    b.d_phi = 0.5 * (set.upper() - set.lower()).squaredNorm();
  } else if (geom.kind() == GeometryKind::NegativeEntropy && set.kind() == SetKind::Simplex) {
    // V(a,b) <= sum a_i log(a_i / (eps/n)) <= log(n/eps) on the eps-interior.
    b.d_phi = std::log(set.dim() / geom.interior_eps());
  } else {
    std::mt19937_64 rng(0x5eedu);
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      const Vec a = geom.to_domain(set, set.sample(rng));
      const Vec c = geom.to_domain(set, set.sample(rng));
      worst = std::max(worst, bregman_divergence(geom, a, c));
    }
    b.d_phi = worst;
  }
  b.diameter = std::sqrt(2.0 * b.d_phi / geom.sigma());
  return b;
}

}  // namespace mdq
