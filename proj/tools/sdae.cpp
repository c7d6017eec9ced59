#include <CLI11.hpp>

#include <iostream>

#include "sdae/dispatch.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Switched-DAE detectability analysis and impulsive observer toolkit"};
  app.require_subcommand(1);

  std::string scenario_path;
  sdae::DispatchOptions options;
  double grid_step = -1.0;
  std::uint64_t seed = 0;
  int horizon = -1;
  bool seed_set = false, horizon_set = false, grid_set = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    cmd->add_option("--out-dir", options.out_dir,
                    "Output directory (default: scenario output.dir, then "
                    "$SDAE_OUT_DIR, then .)");
    cmd->add_option("--grid-step", grid_step, "CSV/estimator grid step override")
        ->each([&](const std::string&) { grid_set = true; });
    cmd->add_option("--seed", seed, "Noise seed override")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--horizon", horizon,
                    "Number of cycle repetitions (periodic scenarios)")
        ->each([&](const std::string&) { horizon_set = true; });
  };

  add_common(app.add_subcommand("analyze", "Per-mode decomposition report"));
  add_common(app.add_subcommand("simulate", "Trajectory CSV emission"));
  add_common(app.add_subcommand("detect", "Detectability certificate table"));
  add_common(app.add_subcommand("observe", "Run the impulsive observer"));

  CLI11_PARSE(app, argc, argv);

  if (grid_set) options.grid_step = grid_step;
  if (seed_set) options.seed = seed;
  if (horizon_set) options.horizon = horizon;

  const std::string sub = app.get_subcommands().front()->get_name();
  return sdae::dispatch(sub, scenario_path, options, std::cout, std::cerr);
}
