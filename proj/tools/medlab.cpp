#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "medlab/experiment.hpp"

namespace {

int run(const std::string& config_path, const std::string& out, bool verbose) {
  medlab::ExperimentConfig config;
  medlab::RunOptions options;
  try {
    config = medlab::load_config(config_path);
    options.seed_override = medlab::seed_override_from_env();
  } catch (const medlab::Error& e) {
    std::cerr << "medlab: invalid config: " << e.what() << '\n';
    return 2;
  }
  if (!out.empty()) options.output_dir = out;
  options.config_path = config_path;
  if (verbose) options.log = &std::cerr;
  try {
    const auto result = medlab::run_experiments(config, options);
    for (const auto& e : result.experiments) {
      if (!e.error.empty()) {
        std::cerr << "medlab: " << e.error << '\n';
      } else if (!e.passed) {
        std::cerr << "medlab: experiment '" << e.name << "' failed a check\n";
      }
    }
    std::cout << "wrote " << result.output_dir << "/manifest.json\n";
    return result.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "medlab: " << e.what() << '\n';
    return 3;
  }
}

int validate(const std::string& config_path) {
  try {
    const auto config = medlab::load_config(config_path);
    medlab::seed_override_from_env();
    std::cout << "config ok: " << config.shape.id() << ", " << config.sample_count << " samples, "
              << config.experiments.size() << " experiment(s)\n";
    return 0;
  } catch (const medlab::Error& e) {
    std::cerr << "medlab: invalid config: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"medlab: medial axes, local normal equivalence and inner metrics on sampled shapes"};
  app.require_subcommand(1);

  std::string run_config, out_dir;
  bool verbose = false;
  auto* run_cmd = app.add_subcommand("run", "Run every experiment in a config");
  run_cmd->add_option("--config", run_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run_cmd->add_flag("--verbose,-v", verbose, "Progress on stderr");

  std::string validate_config;
  auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
  validate_cmd->add_option("--config", validate_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*run_cmd) return run(run_config, out_dir, verbose);
  return validate(validate_config);
}
