#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccp/model.hpp"

namespace ccp {

// Resolved run configuration. Precedence: command-line flags over config-file
// values over these defaults; the resolved values are echoed into every
// report header.
struct RunConfig {
  double alpha = 0.1;
  std::string method = "nested";  // nested | localized | naive | oracle
  std::filesystem::path data;
  std::filesystem::path probs;
  std::filesystem::path calibration;
  std::filesystem::path model;
  std::filesystem::path predictions;
  std::filesystem::path out;
  std::vector<double> weights;  // empty -> unit weights
  std::uint64_t seed = 0;
  int replications = 1;
  // simulate shape
  int sim_classes = 3;
  int sim_features = 4;
  std::size_t n_train = 5000;
  std::size_t n_cal = 2000;
  std::size_t n_test = 20000;
  bool true_probs = false;
  OptimizerConfig optimizer;

  std::string echo() const;
};

// Flat key=value file ('#' starts a comment). Values land on top of whatever
// the config already holds.
void apply_config_file(RunConfig& config, const std::filesystem::path& file);

std::vector<double> parse_weights(const std::string& text);

// Subcommand bodies. They throw ValidationError / NumericError; run_cli maps
// those to exit codes 2 and 3.
int cmd_train(const RunConfig& config);
int cmd_calibrate(const RunConfig& config);
int cmd_predict(const RunConfig& config);
int cmd_evaluate(const RunConfig& config);
int cmd_simulate(const RunConfig& config);

// Full command-line surface shared by the binary and the tests.
int run_cli(int argc, const char* const* argv);

}  // namespace ccp
