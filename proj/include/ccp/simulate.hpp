#pragma once

#include <cstdint>
#include <vector>

#include "ccp/conformal.hpp"
#include "ccp/model.hpp"

namespace ccp {

struct SimulateOptions {
  int num_classes = 3;
  int num_features = 4;
  std::size_t n_train = 5000;
  std::size_t n_cal = 2000;
  std::size_t n_test = 20000;
  bool true_probs = false;  // skip training, feed the generator's conditionals through
  CostWeights weights;      // empty -> unit weights
  OptimizerConfig optimizer;
};

// Alpha-independent part of one replication: generate, split, train (or pass
// the true conditionals through) and score. Calibration and set construction
// happen per alpha on top of this.
struct ReplicationScores {
  std::vector<double> cal_scores;              // s(X_i, Y_i) on the calibration split
  std::vector<LabeledDistribution> cal_cases;  // for localized calibration
  std::vector<ConformityScores> test_scores;
  std::vector<ClassDistribution> test_dists;
  std::vector<int> test_forecasts;
  std::vector<int> test_outcomes;
  double model_top1_error = 0.0;  // argmax forecast vs outcome, test split
  double baseline_error = 0.0;    // always-forecast-the-training-majority rule, test split
};

ReplicationScores run_replication(const SimulateOptions& opts, std::uint64_t rep_seed);

struct MethodEval {
  double coverage = 0.0;
  double mean_set_size = 0.0;
  std::vector<double> partition_coverage;     // by forecast class; NaN when empty
  std::vector<std::size_t> partition_counts;  // test cases per forecast class
  std::vector<double> gammas;                 // 1 entry (nested) or K (localized)
};

MethodEval evaluate_nested(const ReplicationScores& rep, double alpha);
MethodEval evaluate_localized(const ReplicationScores& rep, double alpha);
// Oracle sets from the per-case distributions; meaningful when the
// replication ran with true_probs.
MethodEval evaluate_oracle(const ReplicationScores& rep, double alpha);

}  // namespace ccp
