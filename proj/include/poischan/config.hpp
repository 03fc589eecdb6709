#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace poischan::cli {

// Experiment description parsed from flat "dotted.key=value" text.
// Lines starting with '#' and blank lines are ignored. The only list values
// are comma-separated numbers (prior levels/weights, path members, switch
// runs, explicit observations).
struct ExperimentConfig {
  std::string scenario;

  double lambda = 1.0;
  double alpha = 1.0;
  double horizon = 1.0;
  int cells = 32;

  struct Prior {
    std::string kind = "levels";  // levels | markov | paths
    std::vector<double> levels;
    std::vector<double> weights;
    double level0 = 0.0, level1 = 1.0;
    double rate01 = 1.0, rate10 = 1.0;
    std::vector<std::vector<double>> member_values;
    std::vector<double> member_weights;
  } prior;

  struct Phi {
    bool present = false;
    std::vector<std::uint8_t> mask;
  } phi;

  struct Observation {
    bool jumps_present = false;
    std::vector<double> jumps;
    bool gaussian_present = false;
    std::vector<double> gaussian;
  } observation;

  struct Mc {
    long n_outer = 0;
    long n_prior = 0;
    std::uint64_t seed = 0;
    bool seed_present = false;
  } mc;

  struct Derivative {
    std::string param = "both";  // alpha | lambda | both
    double h = 0.0;              // 0 selects 1e-3 * parameter
  } deriv;

  std::string output_dir = "out";

  std::string raw_text;  // exact file bytes, fingerprinted into artifacts
  std::vector<std::string> parse_errors;
  std::map<std::string, std::string> entries;
};

ExperimentConfig parse_config(const std::string& text);

// Reads and parses a config file; throws std::runtime_error when the file
// cannot be read.
ExperimentConfig load_config(const std::string& path);

// Semantic diagnostics, each naming the offending key. Empty means valid.
std::vector<std::string> validate(const ExperimentConfig& config);

extern const char* const kScenarios[8];

}  // namespace poischan::cli
