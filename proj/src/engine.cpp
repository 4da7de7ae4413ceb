#include "mdq/engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdq {

Engine::Engine(DistributedProblem problem, BregmanGeometry geom, FeasibleSet set,
               GraphSchedule network, Schedules schedules, EngineOptions options,
               std::vector<Vec> init_points, std::vector<std::deque<Vec>> init_history)
    : problem_(std::move(problem)),
      geom_(std::move(geom)),
      set_(std::move(set)),
      network_(std::move(network)),
      sched_(schedules),
      opt_(options) {
  const int n_agents = problem_.n_agents();
  if (network_.n_agents() != n_agents) throw std::invalid_argument("engine: network size mismatch");
  if (static_cast<int>(init_points.size()) != n_agents ||
      static_cast<int>(init_history.size()) != n_agents) {
    throw std::invalid_argument("engine: need one init point and history per agent");
  }
  for (int i = 0; i < n_agents; ++i) {
    if (!set_.contains(init_points[i], 1e-9)) {
      throw std::invalid_argument("engine: infeasible initial point");
    }
    if (static_cast<int>(init_history[i].size()) != sched_.tau) {
      throw std::invalid_argument("engine: history length must equal tau");
    }
    for (const Vec& y : init_history[i]) {
      if (!set_.contains(y, 1e-9)) throw std::invalid_argument("engine: infeasible history point");
    }
  }
  x_ = std::move(init_points);
  for (Vec& xi : x_) xi = geom_.to_domain(set_, xi);
  z_ = x_;  // z_i(0) = x_i(0)
  y_hist_ = std::move(init_history);
  for (auto& h : y_hist_) {
    for (Vec& y : h) y = geom_.to_domain(set_, y);
  }
  running_sum_.assign(n_agents, Vec::Zero(problem_.dim()));
  x_star_domain_ = geom_.to_domain(set_, problem_.optimizer());
  budget_ = divergence_budget(geom_, set_, 1000);
  for (const Vec& xi : x_) a_init_ += xi.norm();
}

Engine Engine::initialize(DistributedProblem problem, BregmanGeometry geom, FeasibleSet set,
                          GraphSchedule network, Schedules schedules, EngineOptions options,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n_agents = problem.n_agents();
  std::vector<Vec> init;
  std::vector<std::deque<Vec>> hist(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    init.push_back(set.sample(rng));
    for (int s = 0; s < schedules.tau; ++s) hist[i].push_back(set.sample(rng));
  }
  return Engine(std::move(problem), std::move(geom), std::move(set), std::move(network), schedules,
                options, std::move(init), std::move(hist));
}

void Engine::check(std::vector<MonitorEvent>& sink, int t, int agent, const std::string& name,
                   double excess) {
  if (excess > opt_.monitor_tol) sink.push_back({t, agent, name, excess});
}

double Engine::divergence_to_opt(const Vec& point) const {
  return bregman_divergence(geom_, x_star_domain_, point);
}

StepDiagnostics Engine::step() {
  const int t = t_;
  const int n_agents = problem_.n_agents();
  const int dim = problem_.dim();
  const double sigma = geom_.sigma();
  const double g_bound = problem_.g_bound();
  StepDiagnostics diag;
  std::vector<MonitorEvent> events;

  const double alpha_t = sched_.alpha(t);
  const double beta_t = sched_.beta(t);
  const Vec d = adaptive_interval(g_bound, sigma, alpha_t, beta_t, dim);
  const double e_bound = opt_.quantize
                             ? quantization_error_bound(g_bound, dim, sigma, alpha_t, beta_t)
                             : 0.0;
  diag.d_coord = d[0];
  diag.e_bound = e_bound;

  // Interval containment: z_i(t) - d(t) <= x_i(t) <= z_i(t) + d(t).
  for (int i = 0; i < n_agents; ++i) {
    const double viol = ((x_[i] - z_[i]).cwiseAbs() - d).maxCoeff();
    diag.containment_violation = std::max(diag.containment_violation, viol);
    check(events, t, i, "lemma_containment", viol);
  }

  // Quantized exchange. Every value crosses the bit-exact codec so the run
  // exercises exactly what a wire transport would carry.
  const int k = opt_.mutation == Mutation::ForceK1 ? 1 : opt_.k_levels;
  std::vector<Vec> q(n_agents);
  std::vector<Vec> e(n_agents);
  int payload = dim * 64;
  for (int j = 0; j < n_agents; ++j) {
    if (opt_.quantize) {
      QuantizerSpec spec{k, z_[j], d};
      payload = spec.payload_bits();
      q[j] = decode(spec, encode(spec, x_[j]));
      e[j] = q[j] - x_[j];
      const double err = e[j].norm();
      diag.quant_err_max = std::max(diag.quant_err_max, err);
      check(events, t, j, "quant_err_le_E", err - e_bound);
      check(events, t, j, "quant_err_le_sqrt_n_d", err - std::sqrt(double(dim)) * d[0]);
    } else {
      q[j] = x_[j];
      e[j] = Vec::Zero(dim);
    }
  }

  const Mat& p_t = network_.matrix(t);
  std::uint64_t messages = 0;
  for (int i = 0; i < n_agents; ++i) {
    for (int j = 0; j < n_agents; ++j) {
      if (i != j && p_t(i, j) > 0.0) ++messages;
    }
  }
  diag.bits = messages * static_cast<std::uint64_t>(payload);
  bits_total_ += diag.bits;

  // Mix, project, and bound the projection error.
  std::vector<Vec> y_tilde(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    Vec y = Vec::Zero(dim);
    for (int j = 0; j < n_agents; ++j) {
      if (p_t(i, j) != 0.0) y += p_t(i, j) * q[j];
    }
    if (!set_.contains(y, 1e-12)) ++diag.y_outside_set;
    Vec yt = euclidean_project(set_, y);
    yt = geom_.to_domain(set_, yt);
    const double perr = (yt - y).norm();
    diag.proj_err_max = std::max(diag.proj_err_max, perr);
    if (opt_.quantize) check(events, t, i, "proj_err_le_2NE", perr - 2.0 * n_agents * e_bound);
    y_tilde[i] = std::move(yt);
  }

  // Divergence-perturbation bound, sampled (small instances only).
  if (opt_.perturbation_monitor && geom_.kind() == GeometryKind::Euclidean) {
    const double l_phi = geom_.lipschitz();
    const double envelope = 2.0 * (4.0 * n_agents * n_agents + 1.0) * l_phi * e_bound * e_bound +
                            (2.0 * n_agents + 1.0) * l_phi * budget_.diameter * e_bound;
    for (int i = 0; i < n_agents; ++i) {
      const int j = (i + t) % n_agents;
      const Vec p_i = y_tilde[i] - [&] {
        Vec y = Vec::Zero(dim);
        for (int jj = 0; jj < n_agents; ++jj) y += p_t(i, jj) * q[jj];
        return y;
      }();
      const double lhs = divergence_to_opt(x_[j] + e[j] + p_i);
      const double rhs = divergence_to_opt(x_[j]) + envelope;
      check(events, t, i, "divergence_perturbation", lhs - rhs);
    }
  }

  // Delayed subgradients and the dual mirror updates.
  const double alpha_next = sched_.alpha(t + 1);
  const double beta_next = sched_.beta(t + 1);
  const double eta_x = alpha_next;
  const double eta_z_law = alpha_next * (1.0 - beta_next);
  const double eta_z = opt_.mutation == Mutation::DropOneMinusBeta ? alpha_next : eta_z_law;
  diag.descent_slack.resize(n_agents);
  diag.descent_slack_min = std::numeric_limits<double>::infinity();
  std::vector<Vec> x_new(n_agents), z_new(n_agents);
  // Before round tau no subgradient information has arrived, so those rounds
  // are consensus-only (g = 0).
  const bool info_available = t >= sched_.tau;
  for (int i = 0; i < n_agents; ++i) {
    const Vec& anchor_delayed = sched_.tau == 0 ? y_tilde[i] : y_hist_[i].front();
    const Vec g = info_available ? problem_.local_subgrad(i, anchor_delayed)
                                 : Vec::Zero(dim).eval();
    check(events, t, i, "subgrad_le_G", g.norm() - g_bound);

    x_new[i] = mirror_step(geom_, set_, y_tilde[i], g, eta_x);
    z_new[i] = mirror_step(geom_, set_, y_tilde[i], g, eta_z);

    const double eps_norm = (x_new[i] - y_tilde[i]).norm();
    diag.bregman_err_max = std::max(diag.bregman_err_max, eps_norm);
    check(events, t, i, "bregman_err_le_G_alpha", eps_norm - g_bound * alpha_next / sigma);

    const double zx_gap = (x_new[i] - z_new[i]).norm();
    const double zx_excess = zx_gap - g_bound * alpha_next * beta_next / sigma;
    diag.zx_gap_excess = std::max(diag.zx_gap_excess, zx_excess);
    check(events, t, i, "zx_gap_le_d_next", zx_excess);

    // Defining law of the z-update, recomputed from the logged inputs.
    const double law = (z_new[i] - mirror_step(geom_, set_, y_tilde[i], g, eta_z_law)).norm();
    diag.z_law_residual = std::max(diag.z_law_residual, law);
    check(events, t, i, "z_update_law", law);

    const double slack = (divergence_to_opt(y_tilde[i]) - divergence_to_opt(x_new[i])) / eta_x +
                         g_bound * g_bound * eta_x / (2.0 * sigma) -
                         g.dot(y_tilde[i] - x_star_domain_);
    diag.descent_slack[i] = slack;
    diag.descent_slack_min = std::min(diag.descent_slack_min, slack);
    check(events, t, i, "descent_slack", -slack);
  }

  // Commit the round.
  for (int i = 0; i < n_agents; ++i) {
    if (sched_.tau > 0) {
      y_hist_[i].push_back(y_tilde[i]);
      y_hist_[i].pop_front();
    }
    x_[i] = x_new[i];
    z_[i] = z_new[i];
    running_sum_[i] += x_[i];
  }
  ++t_;

  Vec xbar = Vec::Zero(dim);
  for (const Vec& xi : x_) xbar += xi;
  xbar /= n_agents;
  for (const Vec& xi : x_) diag.consensus += (xi - xbar).norm();

  pending_events_.insert(pending_events_.end(), events.begin(), events.end());
  return diag;
}

Vec Engine::ergodic_average(int agent) const {
  if (t_ < 1) throw std::logic_error("ergodic_average: no completed iterations");
  return running_sum_[agent] / t_;
}

RunRecord Engine::run(int horizon) {
  if (horizon < 1) throw std::invalid_argument("run: horizon >= 1 required");
  const int n_agents = problem_.n_agents();
  RunRecord rec;
  rec.n_agents = n_agents;
  rec.horizon = horizon;
  rec.f_star = problem_.optimal_value();
  rec.f_star_zero = std::abs(rec.f_star) < 1e-15;
  rec.scaling_note = problem_.scaling_note();

  const auto mc = network_.mixing();
  const double sigma = geom_.sigma();
  const double g_bound = problem_.g_bound();
  const double b_const = 2.0 * n_agents + n_agents * n_agents * mc.omega / (1.0 - mc.gamma);
  double envelope_sum = g_bound * sched_.alpha(0) / sigma +
                        (opt_.quantize ? 3.0 * n_agents *
                                             quantization_error_bound(g_bound, problem_.dim(),
                                                                      sigma, sched_.alpha(0),
                                                                      sched_.beta(0))
                                       : 0.0);
  double measured_cum = 0.0;

  for (int s = 0; s < horizon; ++s) {
    const StepDiagnostics diag = step();
    const int t = t_;  // row index, t = s + 1

    double f_sum = 0.0;
    std::vector<double> f_agents(n_agents);
    for (int l = 0; l < n_agents; ++l) {
      f_agents[l] = problem_.objective(ergodic_average(l));
      f_sum += f_agents[l];
    }
    rec.f_hat_avg.push_back(f_sum / n_agents);
    rec.f_hat_agent.push_back(std::move(f_agents));
    rec.consensus.push_back(diag.consensus);
    rec.quant_err_max.push_back(diag.quant_err_max);
    rec.e_bound.push_back(diag.e_bound);
    rec.proj_err_max.push_back(diag.proj_err_max);
    rec.bregman_err_max.push_back(diag.bregman_err_max);
    rec.slack_min.push_back(diag.descent_slack_min);
    rec.bits_cum.push_back(bits_total_);

    measured_cum += diag.consensus;
    const double et = opt_.quantize ? quantization_error_bound(g_bound, problem_.dim(), sigma,
                                                               sched_.alpha(t), sched_.beta(t))
                                    : 0.0;
    envelope_sum += g_bound * sched_.alpha(t) / sigma + 3.0 * n_agents * et;
    const double envelope = n_agents * mc.omega / (1.0 - mc.gamma) * a_init_ +
                            b_const * envelope_sum;
    rec.disagreement_cum.push_back(measured_cum);
    rec.disagreement_envelope.push_back(envelope);
    if (measured_cum > envelope + opt_.monitor_tol) {
      pending_events_.push_back({t, -1, "consensus_envelope", measured_cum - envelope});
    }
  }
  rec.violations = std::move(pending_events_);
  pending_events_.clear();
  return rec;
}

ConsensusProfile consensus_profile(const RunRecord& record) {
  ConsensusProfile p;
  p.measured_cum = record.disagreement_cum;
  p.envelope = record.disagreement_envelope;
  for (std::size_t i = 0; i < p.measured_cum.size(); ++i) {
    if (p.measured_cum[i] > p.envelope[i] + 1e-8) p.within_envelope = false;
  }
  return p;
}

}  // namespace mdq
