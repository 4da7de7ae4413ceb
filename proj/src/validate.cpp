#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <vector>

#include "mdq/harness.hpp"

namespace mdq {

namespace {

struct SuiteLine {
  std::string name;
  bool pass = false;
  double worst = 0.0;  // worst observed slack / excess, sign convention per check
};

// Positive excess means the bound was exceeded.
SuiteLine excess_line(std::string name, double worst_excess, double tol) {
  return SuiteLine{std::move(name), worst_excess <= tol, worst_excess};
}

int mutated_k(Mutation mutation) { return mutation == Mutation::ForceK1 ? 1 : 5; }

void quantizer_checks(Mutation mutation, std::vector<SuiteLine>& lines) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> zdist(-10.0, 10.0);
  std::uniform_real_distribution<double> ddist(0.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int k = mutated_k(mutation);

  double worst_scalar = -1e300;  // vs 2d/K
  double worst_eq2 = -1e300;     // vector error vs sqrt(n)*max d
  double worst_mono = -1e300;
  for (int trial = 0; trial < 100000; ++trial) {
    const double z = zdist(rng);
    const double d = (trial % 50 == 0) ? 0.0 : ddist(rng);
    const double x = z - d + 2.0 * d * unit(rng);
    const double q = quantize_scalar(z, d, k, x);
    worst_scalar = std::max(worst_scalar, std::abs(x - q) - (k >= 1 ? 2.0 * d / k : d));
  }
  for (int trial = 0; trial < 20000; ++trial) {
    QuantizerSpec spec;
    spec.k = k;
    const int n = 1 + static_cast<int>(rng() % 6);
    spec.z = Vec::NullaryExpr(n, [&](Eigen::Index) { return zdist(rng); });
    const double d = ddist(rng);
    spec.d = Vec::Constant(n, d);
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = spec.z[i] - d + 2.0 * d * unit(rng);
    const Vec q = quantize_vector(spec, x);
    worst_eq2 = std::max(worst_eq2, (x - q).norm() - std::sqrt(double(n)) * d);
  }
  {
    const double z = 0.3, d = 2.0;
    double prev = -1e300;
    for (int i = 0; i <= 4000; ++i) {
      const double x = z - 1.5 * d + 3.0 * d * i / 4000.0;
      const double q = quantize_scalar(z, d, k, x);
      worst_mono = std::max(worst_mono, prev - q);
      prev = q;
    }
  }
  lines.push_back(excess_line("quantizer_scalar_error_le_2d_over_K", worst_scalar, 1e-12));
  lines.push_back(excess_line("quantizer_vector_error_le_sqrt_n_d", worst_eq2, 1e-12));
  lines.push_back(excess_line("quantizer_monotone", worst_mono, 0.0));

  bool codec_ok = true;
  std::uint64_t bit_mismatch = 0;
  for (int trial = 0; trial < 10000 && codec_ok; ++trial) {
    QuantizerSpec spec;
    spec.k = std::max(k, 2);
    const int n = 1 + static_cast<int>(rng() % 12);
    spec.z = Vec::NullaryExpr(n, [&](Eigen::Index) { return zdist(rng); });
    spec.d = Vec::NullaryExpr(n, [&](Eigen::Index) { return ddist(rng); });
    Vec x(n);
    for (int i = 0; i < n; ++i) {
      x[i] = spec.z[i] + 3.0 * spec.d[i] * (unit(rng) - 0.5);  // includes saturation
    }
    const auto msg = encode(spec, x);
    const auto wire = msg.pack(spec);
    const auto back = QuantizedMessage::unpack(spec, wire);
    const Vec direct = quantize_vector(spec, x);
    const Vec decoded = decode(spec, back);
    for (int i = 0; i < n; ++i) {
      if (decoded[i] != direct[i]) {
        codec_ok = false;
        ++bit_mismatch;
      }
    }
    const int expect_bits = n * spec.bits_per_coord();
    if (spec.payload_bits() != expect_bits ||
        static_cast<int>(wire.size()) != (expect_bits + 7) / 8) {
      codec_ok = false;
    }
  }
  lines.push_back(SuiteLine{"quantizer_codec_roundtrip", codec_ok, double(bit_mismatch)});
}

void geometry_checks(std::vector<SuiteLine>& lines) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> gd(-3.0, 3.0);

  const struct {
    const char* tag;
    BregmanGeometry geom;
    FeasibleSet set;
  } cases[2] = {
      {"euclidean", BregmanGeometry::euclidean(), FeasibleSet::centered_box(4, 2.5)},
      {"entropy", BregmanGeometry::negative_entropy(4), FeasibleSet::simplex(4)},
  };

  for (const auto& c : cases) {
    double worst_gap = 1e300;
    double worst_feas = -1e300;
    double worst_budget = -1e300;
    const auto budget = divergence_budget(c.geom, c.set, 4000);
    for (int trial = 0; trial < 1000; ++trial) {
      Vec anchor = c.geom.to_domain(c.set, c.set.sample(rng));
      Vec g1 = Vec::NullaryExpr(4, [&](Eigen::Index) { return gd(rng); });
      Vec g2 = Vec::NullaryExpr(4, [&](Eigen::Index) { return gd(rng); });
      const double eta = 0.01 + 0.5 * std::abs(gd(rng));
      worst_gap = std::min(worst_gap,
                           prox_nonexpansiveness_gap(c.geom, c.set, anchor, g1, g2, eta));
      const Vec step = mirror_step(c.geom, c.set, anchor, g1, eta);
      worst_feas = std::max(worst_feas, c.set.contains(step, 1e-8) ? 0.0 : 1.0);
      Vec b = c.geom.to_domain(c.set, c.set.sample(rng));
      worst_budget = std::max(
          worst_budget, bregman_divergence(c.geom, anchor, b) - budget.d_phi);
    }
    lines.push_back(SuiteLine{std::string("geometry_prox_gap_nonneg_") + c.tag,
                              worst_gap >= -1e-8, worst_gap});
    lines.push_back(excess_line(std::string("geometry_mirror_feasible_") + c.tag,
                                worst_feas, 0.5));
    lines.push_back(excess_line(std::string("geometry_divergence_budget_") + c.tag,
                                worst_budget, 1e-9));
  }

  // Euclidean mirror step must coincide with the projected gradient step.
  double worst_eq = -1e300;
  const auto geom = BregmanGeometry::euclidean();
  const auto set = FeasibleSet::centered_box(5, 1.5);
  for (int trial = 0; trial < 1000; ++trial) {
    Vec anchor = set.sample(rng);
    Vec g = Vec::NullaryExpr(5, [&](Eigen::Index) { return gd(rng); });
    const double eta = 0.01 + std::abs(gd(rng));
    const Vec a = mirror_step(geom, set, anchor, g, eta);
    const Vec b = euclidean_project(set, anchor - eta * g);
    worst_eq = std::max(worst_eq, (a - b).lpNorm<Eigen::Infinity>());
  }
  lines.push_back(excess_line("geometry_mirror_matches_projection", worst_eq, 1e-10));
}

void network_checks(std::vector<SuiteLine>& lines) {
  const auto ring = GraphSchedule::gossip_cycle(10, ring_edges(10));
  const auto metro = GraphSchedule::metropolis(8, ring_edges(8));

  double worst_ds = 0.0;
  for (int t = 0; t < 2 * ring.b_window(); ++t) {
    worst_ds = std::max(worst_ds, check_doubly_stochastic(ring.matrix(t)).max_deviation);
  }
  worst_ds = std::max(worst_ds, check_doubly_stochastic(metro.matrix(0)).max_deviation);
  lines.push_back(excess_line("network_doubly_stochastic", worst_ds, 1e-12));

  const bool conn = check_b_connectivity(ring, 4 * ring.b_window()).pass &&
                    check_b_connectivity(metro, 8).pass;
  lines.push_back(SuiteLine{"network_b_connectivity", conn, conn ? 0.0 : 1.0});

  const double ratio =
      std::max(mixing_check(ring, 80), mixing_check(metro, 60));
  lines.push_back(excess_line("network_mixing_bound", ratio - 1.0, 1e-9));
}

void problem_checks(std::vector<SuiteLine>& lines) {
  std::mt19937_64 rng(44);
  const auto box = FeasibleSet::centered_box(3, 4.0);
  const auto quad = DistributedProblem::make_estimation_problem(6, 3, 0.5, 1.5, box, 9);
  const auto l1 = DistributedProblem::make_l1_problem(7, 3, box, 10);

  const double ratio = std::max(subgradient_bound_check(quad, box, 2000),
                                subgradient_bound_check(l1, box, 2000));
  lines.push_back(excess_line("problem_subgradient_bound", ratio - 1.0, 0.0));

  double worst_cvx = -1e300;
  double worst_opt = -1e300;
  for (const auto* p : {&quad, &l1}) {
    for (int trial = 0; trial < 5000; ++trial) {
      const Vec x = box.sample(rng);
      const Vec y = box.sample(rng);
      for (int j = 0; j < p->n_agents(); ++j) {
        const Vec g = p->local_subgrad(j, x);
        worst_cvx = std::max(worst_cvx,
                             p->local_eval(j, x) + g.dot(y - x) - p->local_eval(j, y));
      }
      worst_opt = std::max(worst_opt, p->optimal_value() - p->objective(x));
    }
  }
  lines.push_back(excess_line("problem_subgradient_inequality", worst_cvx, 1e-9));
  lines.push_back(excess_line("problem_oracle_optimality", worst_opt, 1e-9));
}

void engine_checks(Mutation mutation, std::vector<SuiteLine>& lines) {
  static const char* monitors[] = {
      "lemma_containment",  "quant_err_le_E",       "quant_err_le_sqrt_n_d",
      "proj_err_le_2NE",    "divergence_perturbation", "subgrad_le_G",
      "bregman_err_le_G_alpha", "zx_gap_le_d_next", "z_update_law",
      "descent_slack",      "consensus_envelope",
  };

  std::vector<MonitorEvent> events;
  {
    const auto box = FeasibleSet::centered_box(2, 5.0);
    auto problem = DistributedProblem::make_estimation_problem(4, 2, 0.5, 1.5, box, 5);
    Schedules sched;
    sched.a0 = 0.5;
    sched.rho1 = 0.5;
    sched.b0 = 0.5;
    sched.rho2 = 0.6;
    sched.tau = 2;
    EngineOptions opt;
    opt.mutation = mutation;
    opt.perturbation_monitor = true;
    auto engine = Engine::initialize(std::move(problem), BregmanGeometry::euclidean(), box,
                                     GraphSchedule::gossip_cycle(4, ring_edges(4)), sched, opt, 21);
    const auto record = engine.run(300);
    events.insert(events.end(), record.violations.begin(), record.violations.end());
  }
  {
    const auto box = FeasibleSet::centered_box(3, 4.0);
    auto problem = DistributedProblem::make_l1_problem(5, 3, box, 6);
    Schedules sched;
    sched.tau = 0;
    EngineOptions opt;
    opt.mutation = mutation;
    opt.perturbation_monitor = true;
    auto engine = Engine::initialize(std::move(problem), BregmanGeometry::euclidean(), box,
                                     GraphSchedule::metropolis(5, ring_edges(5)), sched, opt, 22);
    const auto record = engine.run(300);
    events.insert(events.end(), record.violations.begin(), record.violations.end());
  }

  for (const char* name : monitors) {
    double worst = 0.0;
    int count = 0;
    for (const auto& ev : events) {
      if (ev.name == name) {
        ++count;
        worst = std::max(worst, ev.magnitude);
      }
    }
    lines.push_back(SuiteLine{std::string("engine_monitor_") + name, count == 0, worst});
  }
}

}  // namespace

int validate_suite(Mutation mutation, std::ostream& out) {
  std::vector<SuiteLine> lines;
  quantizer_checks(mutation, lines);
  geometry_checks(lines);
  network_checks(lines);
  problem_checks(lines);
  engine_checks(mutation, lines);

  const auto cond = condition_check(Schedules{});
  lines.push_back(SuiteLine{"schedule_conditions_default", cond.pass && cond.forms_agree,
                            cond.pass ? 0.0 : 1.0});

  int failures = 0;
  for (const auto& line : lines) {
    if (!line.pass) ++failures;
    out << (line.pass ? "[PASS] " : "[FAIL] ") << line.name << " (worst slack = " << line.worst
        << ")\n";
  }
  out << (failures == 0 ? "validate: all checks passed\n"
                        : "validate: " + std::to_string(failures) + " check(s) failed\n");
  return failures;
}

}  // namespace mdq
