#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>

namespace mdq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class GeometryKind { Euclidean, NegativeEntropy };
enum class SetKind { Box, Simplex };

/// Compact convex feasible set: an axis-aligned box or the probability simplex.
class FeasibleSet {
 public:
  static FeasibleSet box(Vec lower, Vec upper);
  /// Symmetric box [-halfwidth, halfwidth]^dim.
  static FeasibleSet centered_box(int dim, double halfwidth);
  static FeasibleSet simplex(int dim);

  SetKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }

  bool contains(const Vec& x, double tol = 1e-9) const;
  /// Uniform sample from the set (Dirichlet(1) on the simplex).
  Vec sample(std::mt19937_64& rng) const;

 private:
  FeasibleSet() = default;
  SetKind kind_ = SetKind::Box;
  int dim_ = 0;
  Vec lower_, upper_;  // box only
};

/// Distance-generating function with its strong-convexity modulus and
/// gradient Lipschitz constant. Two closed-form instances: phi = 0.5*||x||^2
/// over boxes, and negative entropy over the eps-interior of the simplex.
class BregmanGeometry {
 public:
  static BregmanGeometry euclidean();
  /// Negative entropy, domain restricted to {x in simplex : x_i >= eps/dim}
  /// so the gradient stays Lipschitz with constant dim/eps.
  static BregmanGeometry negative_entropy(int dim, double eps = 1e-6);

  GeometryKind kind() const { return kind_; }
  double sigma() const { return sigma_; }
  double lipschitz() const { return l_; }
  double interior_eps() const { return eps_; }
  int entropy_dim() const { return dim_; }

  double phi(const Vec& x) const;
  Vec grad_phi(const Vec& x) const;

  /// Maps a feasible point into the geometry's domain (identity for
  /// Euclidean; eps-mixing with the uniform vector for entropy).
  Vec to_domain(const FeasibleSet& set, const Vec& x) const;

 private:
  BregmanGeometry() = default;
  GeometryKind kind_ = GeometryKind::Euclidean;
  double sigma_ = 1.0;
  double l_ = 1.0;
  double eps_ = 0.0;
  int dim_ = 0;
};

struct DivergenceBudget {
  double d_phi = 0.0;     // sup of V_phi over the set
  double diameter = 0.0;  // sqrt(2 d_phi / sigma)
};

/// V_phi(a, b) = phi(a) - phi(b) - <grad phi(b), a - b>.
double bregman_divergence(const BregmanGeometry& geom, const Vec& a, const Vec& b);

/// Nearest point of the set in Euclidean norm. Coordinate-wise clamp for
/// boxes; the usual sort-based algorithm for the simplex.
Vec euclidean_project(const FeasibleSet& set, const Vec& y);

/// argmin_{x in set} { <g, x> + V_phi(x, anchor) / eta }. Closed form in all
/// supported (geometry, set) pairings; entropy over a box is rejected.
Vec mirror_step(const BregmanGeometry& geom, const FeasibleSet& set, const Vec& anchor,
                const Vec& g, double eta);

/// (eta/sigma)*||g2-g1|| - ||mirror_step(g2) - mirror_step(g1)||; nonnegative
/// up to float noise by the prox perturbation bound.
double prox_nonexpansiveness_gap(const BregmanGeometry& geom, const FeasibleSet& set,
                                 const Vec& anchor, const Vec& g1, const Vec& g2, double eta);

/// Uniform Bregman bound over set x set. Analytic for Euclidean boxes and
/// the entropy simplex; otherwise the max over sampled pairs.
DivergenceBudget divergence_budget(const BregmanGeometry& geom, const FeasibleSet& set,
                                   int samples);

}  // namespace mdq
