#include "mdq/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mdq {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_kv(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = val;
  }
  return kv;
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
  RunConfig c;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  if (auto v = get("problem")) c.problem = *v;
  if (auto v = get("n_agents")) c.n_agents = std::stoi(*v);
  if (auto v = get("dim")) c.dim = std::stoi(*v);
  if (auto v = get("coeff_lo")) c.coeff_lo = std::stod(*v);
  if (auto v = get("coeff_hi")) c.coeff_hi = std::stod(*v);
  if (auto v = get("box")) c.box_halfwidth = std::stod(*v);
  if (auto v = get("target_center")) c.target_center = std::stod(*v);
  if (auto v = get("target_halfwidth")) c.target_halfwidth = std::stod(*v);
  if (auto v = get("geometry")) c.geometry = *v;
  if (auto v = get("network")) c.network = *v;
  if (auto v = get("a0")) c.a0 = std::stod(*v);
  if (auto v = get("rho1")) c.rho1 = std::stod(*v);
  if (auto v = get("b0")) c.b0 = std::stod(*v);
  if (auto v = get("rho2")) c.rho2 = std::stod(*v);
  if (auto v = get("tau")) c.tau = std::stoi(*v);
  if (auto v = get("T")) c.horizon = std::stoi(*v);
  if (auto v = get("K")) c.k_levels = std::stoi(*v);
  if (auto v = get("quantize")) c.quantize = (*v == "true" || *v == "1" || *v == "yes");
  if (auto v = get("seed")) c.problem_seed = c.init_seed = std::stoull(*v);
  if (auto v = get("problem_seed")) c.problem_seed = std::stoull(*v);
  if (auto v = get("init_seed")) c.init_seed = std::stoull(*v);
  if (auto v = get("out")) c.out = *v;
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  return from_map(parse_kv(in));
}

Schedules RunConfig::schedules() const {
  Schedules s;
  s.a0 = a0;
  s.rho1 = rho1;
  s.b0 = b0;
  s.rho2 = rho2;
  s.tau = tau;
  s.horizon = horizon;
  return s;
}

RateFit fit_rate_exponent(const std::vector<double>& errors, int t_min) {
  RateFit fit;
  fit.t_min = t_min;
  const int t_max = static_cast<int>(errors.size());
  if (t_min < 1 || t_max < t_min + 8) {
    fit.refused = true;
    fit.reason = "window too short";
    return fit;
  }
  if (errors[t_max - 1] >= errors[t_min - 1]) {
    fit.refused = true;
    fit.reason = "non-decreasing error tail";
    return fit;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int t = t_min; t <= t_max; ++t) {
    const double e = errors[t - 1];
    if (e <= 0.0) continue;
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 8) {
    fit.refused = true;
    fit.reason = "too few positive samples";
    return fit;
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double ss = 0.0;
  for (int t = t_min; t <= t_max; ++t) {
    const double e = errors[t - 1];
    if (e <= 0.0) continue;
    const double x = std::log(static_cast<double>(t));
    const double r = std::log(e) - (intercept + slope * x);
    ss += r * r;
  }
  fit.rho_hat = -slope;
  fit.residual = std::sqrt(ss / n);
  const double slope_var = (ss / (n - 2)) / (sxx - sx * sx / n);
  fit.ci95 = 1.96 * std::sqrt(std::max(slope_var, 0.0));
  return fit;
}

ConditionReport condition_check(const Schedules& schedules) {
  auto evaluate = [&](int tau) {
    std::array<double, 3> q1{}, q2{}, q3{};
    const int checkpoints[3] = {1000, 10000, 100000};
    for (int c = 0; c < 3; ++c) {
      const int t_cap = checkpoints[c];
      q1[c] = 1.0 / (t_cap * schedules.alpha(t_cap + tau));
      double sa = 0.0, sb = 0.0;
      for (int t = 1; t <= t_cap + tau; ++t) {
        sa += schedules.alpha(t);
        sb += schedules.beta(t);
      }
      q2[c] = sa / t_cap;
      q3[c] = sb / t_cap;
    }
    auto vanishing = [](const std::array<double, 3>& q) {
      return q[1] < q[0] && q[2] < q[1] && q[2] < 0.9 * q[0];
    };
    return std::array<bool, 3>{vanishing(q1), vanishing(q2), vanishing(q3)};
  };
  ConditionReport r;
  const auto shifted = evaluate(schedules.tau);
  r.tail_stepsize_ok = shifted[0];
  r.cesaro_alpha_ok = shifted[1];
  r.cesaro_beta_ok = shifted[2];
  r.pass = shifted[0] && shifted[1] && shifted[2];
  const auto free_form = evaluate(0);
  r.delay_free_pass = free_form[0] && free_form[1] && free_form[2];
  r.forms_agree = r.pass == r.delay_free_pass;
  return r;
}

std::vector<double> relative_error_avg(const RunRecord& record) {
  std::vector<double> e;
  e.reserve(record.f_hat_avg.size());
  const double denom = record.f_star_zero ? 1.0 : std::abs(record.f_star);
  for (double f : record.f_hat_avg) e.push_back(std::abs(f - record.f_star) / denom);
  return e;
}

std::vector<double> relative_error_agent(const RunRecord& record, int agent) {
  std::vector<double> e;
  e.reserve(record.f_hat_agent.size());
  const double denom = record.f_star_zero ? 1.0 : std::abs(record.f_star);
  for (const auto& row : record.f_hat_agent) e.push_back(std::abs(row[agent] - record.f_star) / denom);
  return e;
}

namespace {

struct Instance {
  DistributedProblem problem;
  BregmanGeometry geom;
  FeasibleSet set;
  GraphSchedule network;
};

Instance build_instance(const RunConfig& c) {
  if (c.rho1 <= 0.0 || c.rho1 >= 1.0 || c.rho2 <= 0.0 || c.rho2 >= 1.0) {
    throw std::invalid_argument("config: rho1, rho2 must lie in (0,1)");
  }
  const auto cond = condition_check(c.schedules());
  if (!cond.pass) throw std::invalid_argument("config: schedules fail the convergence conditions");

  const bool entropy = c.geometry == "entropy";
  FeasibleSet set = entropy ? FeasibleSet::simplex(c.dim)
                            : FeasibleSet::centered_box(c.dim, c.box_halfwidth);
  FeasibleSet sample_box = entropy
                               ? FeasibleSet::box(Vec::Zero(c.dim), Vec::Ones(c.dim))
                               : set;
  // The quadratic G bound is certified over the sampling box, so a target
  // region smaller than the feasible box is only sound for the L1 family.
  if (c.target_halfwidth >= 0.0 && c.problem != "l1") {
    throw std::invalid_argument("config: target region requires problem = l1");
  }
  if (!entropy && c.target_halfwidth >= 0.0) {
    const Vec ctr = Vec::Constant(c.dim, c.target_center);
    sample_box = FeasibleSet::box(ctr - Vec::Constant(c.dim, c.target_halfwidth),
                                  ctr + Vec::Constant(c.dim, c.target_halfwidth));
    for (int i = 0; i < c.dim; ++i) {
      if (sample_box.lower()[i] < set.lower()[i] || sample_box.upper()[i] > set.upper()[i]) {
        throw std::invalid_argument("config: target region must lie inside the feasible box");
      }
    }
  }
  DistributedProblem problem =
      c.problem == "l1"
          ? DistributedProblem::make_l1_problem(c.n_agents, c.dim, sample_box, c.problem_seed)
          : DistributedProblem::make_estimation_problem(c.n_agents, c.dim, c.coeff_lo, c.coeff_hi,
                                                        sample_box, c.problem_seed);
  if (entropy) {
    const auto oracle = centralized_oracle(problem, set);
    problem.set_optimum(oracle.optimizer, oracle.value);
  }
  BregmanGeometry geom = entropy ? BregmanGeometry::negative_entropy(c.dim)
                                 : BregmanGeometry::euclidean();

  GraphSchedule network = [&] {
    if (c.network == "complete_gossip") {
      return GraphSchedule::gossip_cycle(c.n_agents, complete_edges(c.n_agents));
    }
    if (c.network == "metropolis_ring") {
      return GraphSchedule::metropolis(c.n_agents, ring_edges(c.n_agents));
    }
    if (c.network == "metropolis_complete") {
      return GraphSchedule::metropolis(c.n_agents, complete_edges(c.n_agents));
    }
    return GraphSchedule::gossip_cycle(c.n_agents, ring_edges(c.n_agents));
  }();
  return Instance{std::move(problem), std::move(geom), std::move(set), std::move(network)};
}

}  // namespace

void write_csv(const RunRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << "t,agent,rel_err,rel_err_avg,consensus,quant_err_max,E_t,proj_err_max,"
         "bregman_err_max,bits_cum,slack_min\n";
  const auto avg = relative_error_avg(record);
  const double denom = record.f_star_zero ? 1.0 : std::abs(record.f_star);
  std::string buf;
  for (int t = 1; t <= record.horizon; ++t) {
    const int r = t - 1;
    for (int a = 0; a < record.n_agents; ++a) {
      buf.clear();
      buf += std::to_string(t);
      buf += ',';
      buf += std::to_string(a);
      buf += ',';
      buf += fmt(std::abs(record.f_hat_agent[r][a] - record.f_star) / denom);
      buf += ',';
      buf += fmt(avg[r]);
      buf += ',';
      buf += fmt(record.consensus[r]);
      buf += ',';
      buf += fmt(record.quant_err_max[r]);
      buf += ',';
      buf += fmt(record.e_bound[r]);
      buf += ',';
      buf += fmt(record.proj_err_max[r]);
      buf += ',';
      buf += fmt(record.bregman_err_max[r]);
      buf += ',';
      buf += std::to_string(record.bits_cum[r]);
      buf += ',';
      buf += fmt(record.slack_min[r]);
      buf += '\n';
      out << buf;
    }
  }
}

void write_svg_plot(const std::vector<double>& rel_err_avg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_svg_plot: cannot open " + path);
  const int w = 640, h = 420, margin = 50;
  double ymin = 1e300, ymax = -1e300;
  for (double e : rel_err_avg) {
    if (e > 0.0) {
      ymin = std::min(ymin, std::log10(e));
      ymax = std::max(ymax, std::log10(e));
    }
  }
  if (ymin > ymax) {
    ymin = -1;
    ymax = 1;
  }
  const double xmax = std::log10(static_cast<double>(std::max<std::size_t>(rel_err_avg.size(), 2)));
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << w / 2 << "' y='20' text-anchor='middle'>relative error vs iteration "
      << "(log-log)</text>\n<polyline fill='none' stroke='steelblue' stroke-width='1' points='";
  for (std::size_t t = 1; t <= rel_err_avg.size(); ++t) {
    const double e = rel_err_avg[t - 1];
    if (e <= 0.0) continue;
    const double px = margin + (std::log10(double(t)) / xmax) * (w - 2 * margin);
    const double py =
        h - margin - ((std::log10(e) - ymin) / std::max(ymax - ymin, 1e-12)) * (h - 2 * margin);
    out << fmt(px) << ',' << fmt(py) << ' ';
  }
  out << "'/>\n<line x1='" << margin << "' y1='" << h - margin << "' x2='" << w - margin
      << "' y2='" << h - margin << "' stroke='black'/>\n<line x1='" << margin << "' y1='" << margin
      << "' x2='" << margin << "' y2='" << h - margin << "' stroke='black'/>\n</svg>\n";
}

ExperimentResult run_experiment(const RunConfig& config) {
  Instance inst = build_instance(config);
  EngineOptions opt;
  opt.k_levels = config.k_levels;
  opt.quantize = config.quantize;
  Engine engine = Engine::initialize(inst.problem, inst.geom, inst.set, inst.network,
                                     config.schedules(), opt, config.init_seed);
  ExperimentResult res;
  res.record = engine.run(config.horizon);
  res.rel_err_avg = relative_error_avg(res.record);
  res.fit = fit_rate_exponent(res.rel_err_avg, std::max(10, config.horizon / 10));
  if (!config.out.empty()) {
    const std::filesystem::path stem(config.out);
    if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
    res.csv_path = config.out + ".csv";
    res.plot_path = config.out + ".svg";
    write_csv(res.record, res.csv_path);
    write_svg_plot(res.rel_err_avg, res.plot_path);
  }
  return res;
}

std::vector<SweepCell> rate_sweep(const RunConfig& base, const std::vector<double>& rho1_grid,
                                  const std::vector<double>& rho2_grid, int fit_t_min,
                                  const std::string& out_dir) {
  std::vector<SweepCell> cells;
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  for (double r1 : rho1_grid) {
    for (double r2 : rho2_grid) {
      RunConfig c = base;
      c.rho1 = r1;
      c.rho2 = r2;
      std::ostringstream name;
      name << "cell_r1_" << r1 << "_r2_" << r2;
      c.out = out_dir.empty() ? "" : out_dir + "/" + name.str();
      ExperimentResult res = run_experiment(c);
      SweepCell cell;
      cell.rho1 = r1;
      cell.rho2 = r2;
      cell.predicted = std::min({r1, r2, 1.0 - r1});
      cell.fit = fit_rate_exponent(res.rel_err_avg, fit_t_min);
      cells.push_back(cell);
    }
  }
  if (!out_dir.empty()) {
    std::ofstream out(out_dir + "/comparison.csv", std::ios::binary);
    out << "rho1,rho2,predicted,rho_hat,ci95,residual,refused\n";
    for (const auto& cell : cells) {
      out << fmt(cell.rho1) << ',' << fmt(cell.rho2) << ',' << fmt(cell.predicted) << ','
          << fmt(cell.fit.rho_hat) << ',' << fmt(cell.fit.ci95) << ',' << fmt(cell.fit.residual)
          << ',' << (cell.fit.refused ? 1 : 0) << '\n';
    }
  }
  return cells;
}

}  // namespace mdq
