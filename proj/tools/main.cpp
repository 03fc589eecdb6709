#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "poischan/config.hpp"
#include "poischan/runner.hpp"

namespace {

constexpr int kExitAllPass = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalidConfig = 2;
constexpr int kExitIoError = 3;

int do_validate(const std::string& config_path) {
  poischan::cli::ExperimentConfig config;
  try {
    config = poischan::cli::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  const std::vector<std::string> diagnostics = poischan::cli::validate(config);
  if (diagnostics.empty()) {
    std::cout << "ok: " << config_path << "\n";
    return kExitAllPass;
  }
  for (const auto& d : diagnostics) std::cerr << "invalid: " << d << "\n";
  return kExitInvalidConfig;
}

int do_run(const std::string& config_path,
           const std::optional<std::uint64_t>& seed,
           const std::optional<std::string>& out_dir) {
  poischan::cli::ExperimentConfig config;
  try {
    config = poischan::cli::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  {
    const std::vector<std::string> diagnostics =
        poischan::cli::validate(config);
    if (!diagnostics.empty()) {
      for (const auto& d : diagnostics) std::cerr << "invalid: " << d << "\n";
      return kExitInvalidConfig;
    }
  }
  poischan::cli::RunOptions options;
  options.seed = seed;
  options.out_dir = out_dir;
  poischan::cli::RunManifest manifest;
  try {
    manifest = poischan::cli::run(config, options);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kExitInvalidConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoError;
  }
  for (const auto& check : manifest.checks)
    std::cout << (check.pass ? "pass" : "FAIL") << "  " << check.name << "\n";
  std::cout << "scenario=" << manifest.scenario
            << " config_hash=" << manifest.config_hash
            << " seed=" << manifest.seed
            << " all_pass=" << (manifest.all_pass ? "true" : "false") << "\n";
  return manifest.all_pass ? kExitAllPass : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson-channel estimation and information toolkit"};
  app.require_subcommand(1);

  std::string run_config;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_out;
  CLI::App* run_cmd = app.add_subcommand("run", "Execute a configured scenario");
  run_cmd->add_option("--config", run_config, "Config file path")->required();
  run_cmd->add_option("--seed", run_seed, "Override mc.seed");
  run_cmd->add_option("--out", run_out, "Override output.dir");

  std::string validate_config;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Check a config file");
  validate_cmd->add_option("--config", validate_config, "Config file path")
      ->required();

  CLI::App* version_cmd = app.add_subcommand("version", "Print tool version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitAllPass : kExitInvalidConfig;
  }

  if (version_cmd->parsed()) {
    std::cout << poischan::cli::kToolName << " " << poischan::cli::kToolVersion
              << "\n";
    return kExitAllPass;
  }
  if (validate_cmd->parsed()) return do_validate(validate_config);
  return do_run(run_config, run_seed, run_out);
}
