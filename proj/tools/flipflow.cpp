#include <cstdint>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "flipflow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"velocity-flip dynamics toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::int64_t seed_flag = -1;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--out", out_override, "output directory (overrides config)");
    sub->add_option("--seed", seed_flag,
                    "replace the seed list with this single seed")
        ->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", quiet, "suppress the summary lines");
  };

  add_common(app.add_subcommand("spectrum",
                                "modal decomposition and admissibility"));
  add_common(app.add_subcommand("simulate", "time averages along flip-noise "
                                            "trajectories"));
  add_common(app.add_subcommand("steer", "drive a state to the anchor or to "
                                         "a target state"));
  add_common(app.add_subcommand("report", "ergodicity check against the "
                                          "invariant measure"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  flipflow::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = flipflow::load_config(config_path);
    flipflow::apply_out_override(cfg, out_override);
    if (seed_flag >= 0)
      flipflow::apply_seed_override(
          cfg, static_cast<std::uint64_t>(seed_flag));
  } catch (const flipflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  return flipflow::run_command(app.get_subcommands().front()->get_name(), cfg,
                               quiet);
}
