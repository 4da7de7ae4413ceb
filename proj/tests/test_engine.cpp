#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <deque>

#include "doctest.h"
#include "mdq/engine.hpp"

using namespace mdq;

namespace {

Schedules default_schedules(int tau) {
  Schedules s;
  s.tau = tau;
  return s;
}

Engine small_engine(int n_agents, int dim, int tau, bool quantize, std::uint64_t seed,
                    bool perturbation = false) {
  const auto box = FeasibleSet::centered_box(dim, 5.0);
  auto problem = DistributedProblem::make_estimation_problem(n_agents, dim, 0.5, 1.5, box, seed);
  auto network = GraphSchedule::gossip_cycle(n_agents, ring_edges(n_agents));
  EngineOptions opt;
  opt.quantize = quantize;
  opt.perturbation_monitor = perturbation;
  return Engine::initialize(std::move(problem), BregmanGeometry::euclidean(), box,
                            std::move(network), default_schedules(tau), opt, seed);
}

}  // namespace

TEST_CASE("constructor validates initial state against the feasible set and tau") {
  const auto box = FeasibleSet::centered_box(2, 1.0);
  auto problem = DistributedProblem::make_estimation_problem(1, 2, 0.5, 1.5, box, 1);
  auto network = GraphSchedule::gossip_cycle(1, {});
  EngineOptions opt;

  // tau = 0 accepts an empty history.
  CHECK_NOTHROW(Engine(problem, BregmanGeometry::euclidean(), box, network, default_schedules(0),
                       opt, {Vec::Zero(2)}, {std::deque<Vec>{}}));
  // Infeasible initial point.
  CHECK_THROWS_AS(Engine(problem, BregmanGeometry::euclidean(), box, network,
                         default_schedules(0), opt, {Vec::Constant(2, 3.0)}, {std::deque<Vec>{}}),
                  std::invalid_argument);
  // History length must equal tau.
  CHECK_THROWS_AS(Engine(problem, BregmanGeometry::euclidean(), box, network,
                         default_schedules(2), opt, {Vec::Zero(2)}, {std::deque<Vec>{}}),
                  std::invalid_argument);
  // Infeasible history entry.
  CHECK_THROWS_AS(Engine(problem, BregmanGeometry::euclidean(), box, network,
                         default_schedules(1), opt, {Vec::Zero(2)},
                         {std::deque<Vec>{Vec::Constant(2, 9.0)}}),
                  std::invalid_argument);
}

TEST_CASE("single agent without delay or quantization is projected subgradient") {
  const auto box = FeasibleSet::centered_box(3, 2.0);
  auto problem = DistributedProblem::make_estimation_problem(1, 3, 0.5, 1.5, box, 77);
  auto network = GraphSchedule::gossip_cycle(1, {});
  EngineOptions opt;
  opt.quantize = false;
  const Schedules sched = default_schedules(0);
  Vec x = Vec::Constant(3, 1.5);
  Engine engine(problem, BregmanGeometry::euclidean(), box, network, sched, opt, {x},
                {std::deque<Vec>{}});
  for (int t = 0; t < 50; ++t) {
    engine.step();
    const Vec g = problem.local_subgrad(0, x);
    x = euclidean_project(box, x - sched.alpha(t + 1) * g);
    CHECK((engine.state(0) - x).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("vanishing beta without quantization makes z and x coincide") {
  const auto box = FeasibleSet::centered_box(2, 3.0);
  auto problem = DistributedProblem::make_estimation_problem(3, 2, 0.5, 1.5, box, 5);
  auto network = GraphSchedule::gossip_cycle(3, ring_edges(3));
  EngineOptions opt;
  opt.quantize = false;
  Schedules sched = default_schedules(0);
  sched.b0 = 1e-300;  // (1 - beta) rounds to 1.0 in double precision
  auto engine = Engine::initialize(problem, BregmanGeometry::euclidean(), box, network, sched,
                                   opt, 5);
  for (int t = 0; t < 30; ++t) {
    engine.step();
    for (int i = 0; i < 3; ++i) {
      CHECK((engine.state(i) - engine.mid_value(i)).norm() == 0.0);
    }
  }
}

TEST_CASE("runs are deterministic for a fixed seed") {
  auto a = small_engine(4, 2, 2, true, 13).run(150);
  auto b = small_engine(4, 2, 2, true, 13).run(150);
  REQUIRE(a.f_hat_avg.size() == b.f_hat_avg.size());
  for (std::size_t i = 0; i < a.f_hat_avg.size(); ++i) {
    CHECK(a.f_hat_avg[i] == b.f_hat_avg[i]);
    CHECK(a.consensus[i] == b.consensus[i]);
    CHECK(a.quant_err_max[i] == b.quant_err_max[i]);
    CHECK(a.bits_cum[i] == b.bits_cum[i]);
  }
  CHECK(a.violations.size() == b.violations.size());
}

TEST_CASE("ergodic average after one step equals the first iterate") {
  auto engine = small_engine(3, 2, 0, true, 21);
  engine.step();
  for (int i = 0; i < 3; ++i) {
    CHECK((engine.ergodic_average(i) - engine.state(i)).norm() == 0.0);
  }
}

TEST_CASE("ergodic average before any step is rejected") {
  auto engine = small_engine(2, 2, 0, true, 3);
  CHECK_THROWS_AS(engine.ergodic_average(0), std::logic_error);
}

TEST_CASE("every per-step monitor stays quiet on a clean delayed run") {
  auto engine = small_engine(3, 2, 1, true, 7, /*perturbation=*/true);
  const auto rec = engine.run(200);
  CHECK(rec.violations.empty());
  for (double s : rec.slack_min) CHECK(s >= -1e-8);
  for (std::size_t t = 0; t < rec.quant_err_max.size(); ++t) {
    CHECK(rec.quant_err_max[t] <= rec.e_bound[t] + 1e-12);
  }
}

TEST_CASE("measured disagreement stays under the analytic envelope") {
  auto engine = small_engine(3, 2, 0, true, 19);
  const auto rec = engine.run(100);
  const auto profile = consensus_profile(rec);
  CHECK(profile.within_envelope);
  REQUIRE(profile.measured_cum.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(profile.measured_cum[i] <= profile.envelope[i] + 1e-8);
  }
}

TEST_CASE("bit accounting matches messages times payload") {
  const int dim = 2;
  auto engine = small_engine(4, dim, 0, true, 8);
  const auto rec = engine.run(10);
  // Each gossip matrix of the 4-ring activates one edge: 2 directed messages,
  // each dim * ceil(log2(5 + 2)) = 6 bits.
  const std::uint64_t per_round = 2 * dim * 3;
  for (std::size_t t = 0; t < rec.bits_cum.size(); ++t) {
    CHECK(rec.bits_cum[t] == per_round * (t + 1));
  }
}

TEST_CASE("dropping the (1 - beta) factor trips the z-update law monitor fast") {
  const auto box = FeasibleSet::centered_box(2, 5.0);
  auto problem = DistributedProblem::make_estimation_problem(3, 2, 0.5, 1.5, box, 7);
  auto network = GraphSchedule::gossip_cycle(3, ring_edges(3));
  EngineOptions opt;
  opt.mutation = Mutation::DropOneMinusBeta;
  auto engine = Engine::initialize(problem, BregmanGeometry::euclidean(), box, network,
                                   default_schedules(0), opt, 7);
  const auto rec = engine.run(5);
  int z_law = 0;
  for (const auto& ev : rec.violations) {
    if (ev.name == "z_update_law") ++z_law;
  }
  CHECK(z_law > 0);
}

TEST_CASE("forcing K = 1 breaks the quantization error bound") {
  const auto box = FeasibleSet::centered_box(2, 5.0);
  auto problem = DistributedProblem::make_estimation_problem(3, 2, 0.5, 1.5, box, 7);
  auto network = GraphSchedule::gossip_cycle(3, ring_edges(3));
  EngineOptions opt;
  opt.mutation = Mutation::ForceK1;
  auto engine = Engine::initialize(problem, BregmanGeometry::euclidean(), box, network,
                                   default_schedules(0), opt, 7);
  const auto rec = engine.run(50);
  int quant = 0;
  for (const auto& ev : rec.violations) {
    if (ev.name == "quant_err_le_E" || ev.name == "quant_err_le_sqrt_n_d") ++quant;
  }
  CHECK(quant > 0);
}

TEST_CASE("rounds before tau are pure consensus") {
  // Until the first delayed subgradient arrives the update must reduce to
  // mixing alone: x(t+1) = P(t) x(t) when quantization is off and the box is
  // never active.
  const int tau = 3;
  const auto box = FeasibleSet::centered_box(2, 5.0);
  auto problem = DistributedProblem::make_estimation_problem(3, 2, 0.5, 1.5, box, 44);
  auto network = GraphSchedule::gossip_cycle(3, ring_edges(3));
  EngineOptions opt;
  opt.quantize = false;
  auto engine = Engine::initialize(problem, BregmanGeometry::euclidean(), box, network,
                                   default_schedules(tau), opt, 44);
  std::vector<Vec> x(3);
  for (int i = 0; i < 3; ++i) x[i] = engine.state(i);
  for (int t = 0; t < tau; ++t) {
    engine.step();
    std::vector<Vec> mixed(3);
    const Mat& p = network.matrix(t);
    for (int i = 0; i < 3; ++i) {
      mixed[i] = Vec::Zero(2);
      for (int j = 0; j < 3; ++j) mixed[i] += p(i, j) * x[j];
      CHECK((engine.state(i) - mixed[i]).lpNorm<Eigen::Infinity>() <= 1e-12);
    }
    x = mixed;
  }
}

TEST_CASE("run record metadata") {
  auto engine = small_engine(3, 2, 0, true, 2);
  const auto rec = engine.run(25);
  CHECK(rec.n_agents == 3);
  CHECK(rec.horizon == 25);
  CHECK_FALSE(rec.f_star_zero);
  CHECK(rec.scaling_note == "objective = (1/N) * sum_j f_j");
  CHECK(rec.f_hat_agent.size() == 25);
  CHECK(rec.f_hat_agent[0].size() == 3);
}
