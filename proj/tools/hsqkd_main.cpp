// SPDX-License-Identifier: Apache-2.0
//
// hsqkd — key-rate simulation for multiplexed heralded single-photon BB84.
//
//   hsqkd sweep       --config exp.cfg [--out DIR] [--svg]
//   hsqkd optimize    --config exp.cfg
//   hsqkd validate-mc --config exp.cfg [--seed N]
//   hsqkd compare     --config a.cfg --config b.cfg [--out DIR] [--name out.csv]

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsqkd/cli.hpp"

namespace {

int exit_code_for(const hsqkd::error& e) {
  switch (e.code()) {
    case hsqkd::errc::io_write:
      return hsqkd::cli::kExitIo;
    default:
      return hsqkd::cli::kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BB84 key-rate simulation for multiplexed heralded single-photon sources"};
  app.require_subcommand(1);

  std::vector<std::string> config_paths;
  std::string out_dir = ".";
  std::string compare_name = "compare.csv";
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  bool svg = false;

  auto add_common = [&](CLI::App* cmd, bool multi_config) {
    auto* opt = cmd->add_option("--config", config_paths, "experiment config file");
    opt->required();
    if (!multi_config) opt->expected(1);
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option_function<std::uint64_t>(
           "--seed", [&](std::uint64_t s) { seed_override = s; seed_given = true; },
           "override the mc seed");
    cmd->add_flag("--svg", svg, "also write an SVG rate plot");
  };

  auto* cmd_sweep = app.add_subcommand("sweep", "loss sweep to CSV");
  add_common(cmd_sweep, false);
  auto* cmd_optimize = app.add_subcommand("optimize", "print optimal mu per loss");
  add_common(cmd_optimize, false);
  auto* cmd_validate = app.add_subcommand("validate-mc", "Monte Carlo vs analytic statistics");
  add_common(cmd_validate, false);
  auto* cmd_compare = app.add_subcommand("compare", "merge rate curves of several configs");
  add_common(cmd_compare, true);
  cmd_compare->add_option("--name", compare_name, "merged CSV file name");

  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<hsqkd::cli::ExperimentConfig> configs;
    configs.reserve(config_paths.size());
    for (const auto& path : config_paths) {
      auto cfg = hsqkd::cli::load_config(path);
      if (seed_given) cfg.mc.seed = seed_override;
      configs.push_back(std::move(cfg));
    }

    if (cmd_sweep->parsed()) {
      const auto out = hsqkd::cli::run_sweep(configs.front(), out_dir, svg);
      std::cout << "wrote " << out.csv_path;
      if (!out.svg_path.empty()) std::cout << " and " << out.svg_path;
      std::cout << " (" << out.records.size() << " loss points)\n";
    } else if (cmd_optimize->parsed()) {
      std::cout << hsqkd::cli::run_optimize(configs.front());
    } else if (cmd_validate->parsed()) {
      const auto report = hsqkd::cli::run_validate_mc(configs.front());
      std::cout << report.text;
      if (!report.pass) return hsqkd::cli::kExitValidation;
    } else if (cmd_compare->parsed()) {
      const auto out = hsqkd::cli::run_compare(configs, out_dir, compare_name);
      std::cout << "wrote " << out.csv_path << " (" << out.labels.size() << " series)\n";
    }
  } catch (const hsqkd::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hsqkd::cli::kExitConfig;
  }
  return hsqkd::cli::kExitOk;
}
