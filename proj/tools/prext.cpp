// SPDX-License-Identifier: Apache-2.0
//
// prext: run the seedless extraction pipeline against simulated
// untrusted devices, sweep its parameters, or sanity-check output bits.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "prext/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"physical randomness extraction toolkit"};
  app.require_subcommand(1);

  std::string config_path, grid_path, input_path;

  CLI::App* extract = app.add_subcommand(
      "extract", "run the master protocol end to end (exit 0 accept, 2 reject)");
  extract->add_option("--config", config_path, "run config (JSON)")->required();

  CLI::App* sweep =
      app.add_subcommand("sweep", "accept-rate / error-bound parameter sweep (CSV)");
  sweep->add_option("--config", config_path, "run config (JSON)")->required();
  sweep->add_option("--grid", grid_path, "grid file (JSON: eta[], noise[])")
      ->required();

  CLI::App* stats =
      app.add_subcommand("stats", "advisory statistical battery over a bit file");
  stats->add_option("--input", input_path, "raw bit file")->required();

  CLI11_PARSE(app, argc, argv);

  if (extract->parsed())
    return prext::harness::cli_extract(config_path, std::cerr);
  if (sweep->parsed())
    return prext::harness::cli_sweep(config_path, grid_path, std::cout, std::cerr);
  if (stats->parsed())
    return prext::harness::cli_stats(input_path, std::cout, std::cerr);
  return 1;
}
