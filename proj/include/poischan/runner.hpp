#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "poischan/config.hpp"

namespace poischan::cli {

inline constexpr const char* kToolName = "poischan";
inline constexpr const char* kToolVersion = "0.1.0";

struct RunOptions {
  std::optional<std::string> out_dir;     // overrides config output.dir
  std::optional<std::uint64_t> seed;      // overrides mc.seed
};

struct CheckResult {
  std::string name;
  bool pass = false;
};

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string scenario;
  double wall_seconds = 0.0;
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;  // file names inside the output dir
  bool all_pass = true;
};

// Executes the configured scenario and writes <scenario>.csv,
// <scenario>.json and manifest.json into the output directory, each through
// a temp-file-plus-rename so interrupted runs leave no partial artifact.
// The config must be valid (see validate()); diagnostics are reported via
// std::invalid_argument otherwise.
RunManifest run(const ExperimentConfig& config, const RunOptions& options);

}  // namespace poischan::cli
