#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "ccp/core.hpp"

namespace ccp {

// Per-class conformity scores for one case. The top-ranked class scores
// exactly 1; the class at rank j >= 1 scores the tail sum of the ranked
// probabilities from rank j. Equivalently, s(x, y) is the largest gamma for
// which y is still a member of the gamma-indexed naive set.
struct ConformityScores {
  std::vector<double> s;    // indexed by class
  std::vector<int> order;   // ranking used (descending probability)

  double score(int k) const { return s[static_cast<std::size_t>(k)]; }
  int num_classes() const { return static_cast<int>(s.size()); }
};

ConformityScores conformity_scores(const ClassDistribution& dist);

// Conformity score of the observed (x, y) pair.
double score_labeled(const ClassDistribution& dist, int outcome);

// One case of calibration data: estimated distribution plus observed outcome.
struct LabeledDistribution {
  ClassDistribution dist;
  int outcome = 0;
};

// s(X_i, Y_i) for every case.
std::vector<double> labeled_scores(std::span<const LabeledDistribution> cases);

// k = ceil((n + 1) * (1 - alpha)), the calibration order-statistic index.
std::size_t order_statistic_index(std::size_t n, double alpha);

// Split-conformal threshold fitted on a calibration set.
//
// gamma_hat is the k-th largest calibration score, i.e. 1 minus the k-th
// smallest non-conformity 1 - s_i. When k > n the quantile does not exist and
// gamma_hat degrades to 0: every prediction set becomes the full label set,
// which keeps the coverage guarantee vacuously.
struct CalibrationModel {
  double gamma_hat = 0.0;
  double alpha = 0.0;
  std::size_t n_cal = 0;
  std::size_t order_index = 0;  // k
  bool degenerate = false;      // k > n_cal
};

CalibrationModel calibrate(std::span<const double> scores, double alpha);

enum class SetMethod { nested, localized, oracle, naive };

std::string_view to_string(SetMethod method);
SetMethod set_method_from_string(std::string_view name);

// Subset of class labels emitted for one case. Membership rule is
// s(x, y) >= threshold_used (closed comparison; boundary ties stay in, which
// is the conservative direction). For method oracle the threshold lives in
// probability space instead: members = {y : p(y|x) >= threshold_used}.
struct PredictionSet {
  std::vector<int> members;  // ascending class indices
  double alpha = 0.0;        // NaN for naive sets (no coverage claim attached)
  SetMethod method = SetMethod::nested;
  double threshold_used = 0.0;

  bool contains(int y) const;
  std::size_t size() const { return members.size(); }
};

// {y : s(x, y) >= gamma} with the given tags.
PredictionSet set_at_threshold(const ConformityScores& scores, double gamma, double alpha,
                               SetMethod method);

// Algorithm step 4: {y : s(x, y) >= gamma_hat}. Always contains the
// top-ranked class because its score is 1.
PredictionSet predict_set(const ClassDistribution& dist, const CalibrationModel& cal);

// Uncalibrated gamma-indexed member of the nested family. Didactic only; it
// carries no finite-sample guarantee.
PredictionSet naive_set(const ClassDistribution& dist, double gamma);

// Best prediction set when `dist` is the *true* conditional distribution:
// the smallest descending-probability prefix whose mass reaches 1 - alpha.
// threshold is the smallest included class probability.
struct OracleResult {
  double threshold = 0.0;
  double mass = 0.0;
  PredictionSet set;
};

OracleResult oracle_threshold(const ClassDistribution& dist, double alpha);

}  // namespace ccp
