#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "stormrtc/runner.hpp"

namespace {

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int print_findings(const std::vector<stormrtc::Finding>& findings) {
  int errors = 0;
  for (const auto& f : findings) {
    const bool is_error = f.severity == stormrtc::Finding::Severity::kError;
    errors += is_error ? 1 : 0;
    std::cout << (is_error ? "error: " : "warning: ") << f.message << '\n';
  }
  if (findings.empty()) std::cout << "no findings\n";
  return errors;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stormrtc: coupled watershed-reservoir-channel simulation and "
               "valve-control comparison"};
  app.require_subcommand(1);

  std::string config_path;
  std::string controllers_csv;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int decimate = 0;

  CLI::App* run = app.add_subcommand("run", "simulate the configured controllers");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_option("--controllers", controllers_csv, "comma-separated subset");
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--seed", seed, "rng seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  run->add_option("--decimate", decimate, "log every n-th step");

  CLI::App* validate = app.add_subcommand("validate", "check a config without simulating");
  validate->add_option("config", config_path, "scenario config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const stormrtc::ScenarioConfig cfg = stormrtc::load_config(config_path);
    const auto findings = stormrtc::validate_scenario(cfg);

    if (validate->parsed()) {
      print_findings(findings);
      return 0;
    }

    if (print_findings(findings) > 0) {
      std::cerr << "run refused: config has validation errors\n";
      return 2;
    }

    stormrtc::RunOptions opt;
    opt.controllers = split_list(controllers_csv);
    if (seed_set) opt.seed = seed;
    if (decimate > 0) opt.decimate = decimate;
    if (!out_dir.empty()) opt.out_dir = out_dir;

    const stormrtc::Scenario scenario = stormrtc::build_scenario(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const stormrtc::RunResult result = stormrtc::run_scenario(scenario, opt);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const std::string dir = opt.out_dir.empty() ? cfg.output.directory : opt.out_dir;
    stormrtc::write_outputs(result, scenario, dir,
                            opt.decimate.value_or(cfg.output.decimate));

    for (const auto& log : result.logs) {
      std::printf("%-10s steps=%zu clipped_commands=%d warnings in %s\n",
                  log.controller.c_str(), log.records.size(), log.clipped_commands, dir.c_str());
    }
    std::printf("completed %zu controller run(s) in %.1f s; outputs in %s\n",
                result.logs.size(), wall, dir.c_str());
    return 0;
  } catch (const stormrtc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const stormrtc::SimulationError& e) {
    std::cerr << "simulation instability: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
