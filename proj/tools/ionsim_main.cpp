#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "ionsim/cli.hpp"
#include "ionsim/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-ion sideband cooling and spectroscopy simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = ".";
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;

  app.add_option("--config", config_path, "Path to the JSON run configuration");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--preset", preset,
                 "Physics preset name (alternative to --config)");
  app.add_option("--seed", seed, "Seed override")->each([&](const std::string&) {
    seed_set = true;
  });

  for (const char* name :
       {"modes", "spectrum", "cool", "heat-scan", "fit", "budget"}) {
    app.add_subcommand(name);
  }

  CLI11_PARSE(app, argc, argv);
  const std::string subcommand = app.get_subcommands().front()->get_name();

  try {
    ionsim::RunConfig cfg;
    if (!config_path.empty() && !preset.empty()) {
      std::cerr << "--config and --preset are mutually exclusive\n";
      return 2;
    }
    if (!config_path.empty()) {
      cfg = ionsim::load_config(config_path);
    } else if (!preset.empty()) {
      cfg.preset = preset;
      cfg.physics = ionsim::preset_physics(preset);
    } else {
      std::cerr << "one of --config or --preset is required\n";
      return 2;
    }
    if (seed_set) cfg.seed = seed;
    return ionsim::run_subcommand(subcommand, cfg, out_dir, std::cout,
                                  std::cerr);
  } catch (const std::exception& e) {
    std::cerr << R"({"error":"config_error","message":")" << e.what()
              << "\"}\n";
    return 1;
  }
}
