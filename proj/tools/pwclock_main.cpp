// pwclock: run the emergent-time photon experiment described by a config
// file and write the dataset, theory-curve, and manifest artifacts.
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "pwclock/config.hpp"
#include "pwclock/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-photon emergent-time experiment simulator"};

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string mode;

  app.add_option("config", config_path, "Experiment description file (defaults apply if omitted)");
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Override the RNG seed");
  CLI::Option* out_opt = app.add_option("--out", out_dir, "Override the output directory");
  CLI::Option* mode_opt =
      app.add_option("--mode", mode, "Override the run mode")
          ->check(CLI::IsMember({"observer", "superobserver", "both"}));

  CLI11_PARSE(app, argc, argv);

  try {
    pwclock::ExperimentSpec spec =
        config_path.empty() ? pwclock::ExperimentSpec{} : pwclock::parse_spec_file(config_path);
    if (seed_opt->count() > 0) spec.seed = seed;
    if (out_opt->count() > 0) spec.output_dir = out_dir;
    if (mode_opt->count() > 0) spec.mode = pwclock::run_mode_from_string(mode);

    const pwclock::RunResult result = pwclock::run(spec);
    for (const std::string& path : result.files_written) {
      std::cout << "wrote " << path << "\n";
    }
    for (const std::string& warning : result.warnings) {
      std::cerr << "warning: " << warning << "\n";
    }
    return 0;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
}
