#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "cranopt/errors.hpp"
#include "cranopt_cli/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kInfeasible = 3;

using cranopt::cli::ConfigError;
using cranopt::cli::ExperimentConfig;

int run(const ExperimentConfig& cfg, const std::string& out_path) {
  const auto rows = cranopt::cli::run_experiment(cfg);
  const std::string path = out_path.empty() ? cfg.output : out_path;
  if (path.empty() || path == "-") {
    cranopt::cli::write_csv(std::cout, rows);
  } else {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    cranopt::cli::write_csv(out, rows);
  }
  std::size_t infeasible = 0;
  for (const auto& r : rows) infeasible += r.status == "infeasible" ? 1U : 0U;
  if (!rows.empty() && infeasible == rows.size()) {
    std::cerr << "cranopt: every instance was infeasible\n";
    return kInfeasible;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint precoding and backhaul compression for cloud radio access networks"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Run a sweep and write CSV rows");
  std::string preset_name, config_path, sweep_spec, out_path;
  int trials = 0;
  std::uint64_t seed = 0;
  int jobs = -1;
  bool timing = false;
  auto* preset_opt = run_cmd->add_option("--preset", preset_name, "Figure preset (fig3, fig5 .. fig9)");
  auto* config_opt = run_cmd->add_option("--config", config_path, "JSON config file");
  run_cmd->add_option("--sweep", sweep_spec, "Sweep override, VAR=v1,v2,...");
  auto* trials_opt = run_cmd->add_option("--trials", trials, "Fading draws per sweep value")->check(CLI::PositiveNumber);
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Base seed; trial t uses seed + t");
  run_cmd->add_option("--out", out_path, "CSV output path, - for stdout");
  run_cmd->add_option("--jobs", jobs, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--timing", timing, "Record wall_ms (makes the CSV run-dependent)");
  preset_opt->excludes(config_opt);

  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance and print a report");
  std::string solve_config, json_out;
  solve_cmd->add_option("--config", solve_config, "JSON config file")->required();
  solve_cmd->add_option("--json", json_out, "Also write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run_cmd) {
      ExperimentConfig cfg;
      if (!preset_name.empty()) {
        cfg = cranopt::cli::preset(preset_name);
      } else if (!config_path.empty()) {
        cfg = cranopt::cli::load_config(config_path);
      } else {
        throw ConfigError("run needs --preset or --config");
      }
      if (!sweep_spec.empty()) cfg.sweep = cranopt::cli::parse_sweep(sweep_spec);
      if (*trials_opt) cfg.trials = trials;
      if (*seed_opt) cfg.seed = seed;
      if (jobs >= 0) cfg.jobs = jobs;
      if (timing) cfg.timing = true;
      cfg.validate();
      return run(cfg, out_path);
    }
    const auto cfg = cranopt::cli::load_config(solve_config);
    const auto result = cranopt::cli::solve_once(cfg);
    cranopt::cli::print_report(std::cout, result);
    if (!json_out.empty()) {
      std::ofstream out(json_out);
      if (!out) throw ConfigError("cannot write '" + json_out + "'");
      out << cranopt::cli::report_json(result) << '\n';
    }
    return result.result.status == cranopt::SolveStatus::Infeasible ? kInfeasible : 0;
  } catch (const ConfigError& e) {
    std::cerr << "cranopt: " << e.what() << '\n';
    return kConfigError;
  } catch (const cranopt::InfeasibleError& e) {
    std::cerr << "cranopt: infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "cranopt: " << e.what() << '\n';
    return 1;
  }
}
