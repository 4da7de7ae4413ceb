#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdq/harness.hpp"

namespace {

std::vector<double> parse_grid(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

// Pulls the rel_err_avg column (one value per t, first agent row) out of a
// run CSV so previously recorded experiments can be re-fit.
std::vector<double> load_rel_err(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("rates: cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> errors;
  int last_t = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 4) continue;
    const int t = std::stoi(cells[0]);
    if (t == last_t) continue;
    if (t != last_t + 1) throw std::runtime_error("rates: non-contiguous t column");
    last_t = t;
    errors.push_back(std::stod(cells[3]));
  }
  return errors;
}

int cmd_run(const std::string& config_path, bool no_quantize, int tau_override,
            const std::string& out_override) {
  mdq::RunConfig config = mdq::RunConfig::load(config_path);
  if (no_quantize) config.quantize = false;
  if (tau_override >= 0) config.tau = tau_override;
  if (!out_override.empty()) config.out = out_override;
  const auto result = mdq::run_experiment(config);
  const auto& rec = result.record;
  std::cout << "agents=" << rec.n_agents << " T=" << rec.horizon << " f*=" << rec.f_star
            << (rec.f_star_zero ? " (zero; absolute error reported)" : "") << "\n"
            << rec.scaling_note << "\n"
            << "final rel_err_avg=" << result.rel_err_avg.back()
            << " bits=" << rec.bits_cum.back() << " monitor violations=" << rec.violations.size()
            << "\n";
  if (!result.fit.refused) {
    std::cout << "fitted rate rho_hat=" << result.fit.rho_hat << " +/- " << result.fit.ci95
              << " (rms residual " << result.fit.residual << ")\n";
  }
  if (!result.csv_path.empty()) {
    std::cout << "wrote " << result.csv_path << " and " << result.plot_path << "\n";
  }
  for (const auto& ev : rec.violations) {
    std::cerr << "violation t=" << ev.t << " agent=" << ev.agent << " " << ev.name
              << " excess=" << ev.magnitude << "\n";
  }
  return rec.violations.empty() ? 0 : 2;
}

int cmd_sweep(const std::string& grid_path) {
  std::ifstream in(grid_path);
  if (!in) throw std::runtime_error("sweep: cannot open " + grid_path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r\n");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  const mdq::RunConfig base = mdq::RunConfig::from_map(kv);
  const auto rho1_grid = parse_grid(kv.count("rho1_grid") ? kv["rho1_grid"] : "0.55,0.65,0.75");
  const auto rho2_grid = parse_grid(kv.count("rho2_grid") ? kv["rho2_grid"] : "0.35,0.55,0.75");
  const int fit_t_min =
      kv.count("fit_t_min") ? std::stoi(kv["fit_t_min"]) : std::max(10, base.horizon / 10);
  const std::string out_dir = kv.count("out_dir") ? kv["out_dir"] : "sweep_out";
  const auto cells = mdq::rate_sweep(base, rho1_grid, rho2_grid, fit_t_min, out_dir);
  std::cout << "rho1\trho2\tpredicted\trho_hat\tci95\n";
  for (const auto& c : cells) {
    std::cout << c.rho1 << '\t' << c.rho2 << '\t' << c.predicted << '\t';
    if (c.fit.refused) {
      std::cout << "refused (" << c.fit.reason << ")\n";
    } else {
      std::cout << c.fit.rho_hat << '\t' << c.fit.ci95 << '\n';
    }
  }
  std::cout << "comparison written to " << out_dir << "/comparison.csv\n";
  return 0;
}

int cmd_rates(const std::string& record_path, int t_min) {
  const auto errors = load_rel_err(record_path);
  const auto fit = mdq::fit_rate_exponent(
      errors, t_min > 0 ? t_min : std::max(10, static_cast<int>(errors.size()) / 10));
  if (fit.refused) {
    std::cout << "fit refused: " << fit.reason << "\n";
    return 3;
  }
  std::cout << "rho_hat=" << fit.rho_hat << " ci95=" << fit.ci95 << " residual=" << fit.residual
            << " window=[" << fit.t_min << "," << errors.size() << "]\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delayed mirror-descent simulator"};
  app.require_subcommand(1);

  std::string config_path, grid_path, record_path, out_override, mutation_name = "none";
  bool no_quantize = false;
  int tau_override = -1, fit_t_min = 0;

  auto* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("--config", config_path, "key = value config file")->required();
  run->add_flag("--no-quantize", no_quantize, "send exact states instead of quantized ones");
  run->add_option("--tau", tau_override, "override the delay");
  run->add_option("--out", out_override, "override the output stem");

  auto* sweep = app.add_subcommand("sweep", "rate sweep over exponent grids");
  sweep->add_option("--grid", grid_path, "grid description file")->required();

  auto* validate = app.add_subcommand("validate", "run the invariant suite");
  validate->add_option("--mutation", mutation_name, "none | drop-one-minus-beta | force-k1")
      ->group("");  // hidden: defect injection for sensitivity testing

  auto* rates = app.add_subcommand("rates", "fit a decay exponent from a recorded CSV");
  rates->add_option("--record", record_path, "CSV written by run")->required();
  rates->add_option("--t-min", fit_t_min, "start of the fit window");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, no_quantize, tau_override, out_override);
    if (sweep->parsed()) return cmd_sweep(grid_path);
    if (rates->parsed()) return cmd_rates(record_path, fit_t_min);
    mdq::Mutation mutation = mdq::Mutation::None;
    if (mutation_name == "drop-one-minus-beta") mutation = mdq::Mutation::DropOneMinusBeta;
    else if (mutation_name == "force-k1") mutation = mdq::Mutation::ForceK1;
    else if (mutation_name != "none") throw std::runtime_error("unknown mutation");
    return mdq::validate_suite(mutation, std::cout) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
