#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cylev/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cylev: simulate cylindrical Lévy processes, radonify them through "
               "Hilbert-Schmidt operators, and verify the Lévy properties statistically"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string config_path;
  std::uint64_t seed_override = 0;
  bool seed_given = false;
  std::string out_override;

  app.add_option("--config", config_path, "experiment config file (json)")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed_override, "override the config seed")
      ->each([&seed_given](const std::string&) { seed_given = true; });
  app.add_option("--out", out_override, "override the config output directory");

  for (const char* name : {"simulate", "radonify", "verify", "convergence", "cf-check"}) {
    app.add_subcommand(name);
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    cylev::ExperimentConfig cfg = cylev::load_config_file(config_path);
    if (seed_given) cfg.seed = seed_override;
    if (!out_override.empty()) cfg.output_dir = out_override;
    return cylev::run_command(cfg, command);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
