#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ccp/conformal.hpp"
#include "ccp/core.hpp"

namespace ccp {

// Relative importance of misclassifying each true class. Training multiplies
// every case's loss by w[outcome]; empirical cost ratios are then inspected
// after the fact rather than targeted analytically.
struct CostWeights {
  std::vector<double> w;

  static CostWeights ones(int num_classes);
  int num_classes() const { return static_cast<int>(w.size()); }
};

struct OptimizerConfig {
  double grad_tol = 1e-6;  // max-norm convergence threshold
  int max_iterations = 5000;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo_c = 1e-4;
};

struct TrainingInfo {
  int iterations = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double final_grad_norm = 0.0;
  bool converged = false;
};

// Multinomial logistic model over K classes. Identifiability is fixed by
// pinning the class-0 coefficient row to zero.
class SoftmaxModel {
 public:
  // coef is K x (d+1); column 0 is the intercept.
  static SoftmaxModel from_coefficients(std::vector<std::vector<double>> coef,
                                        TrainingInfo info = {});

  int num_classes() const { return static_cast<int>(coef_.size()); }
  std::size_t num_features() const { return coef_.empty() ? 0 : coef_[0].size() - 1; }
  const std::vector<std::vector<double>>& coefficients() const { return coef_; }
  bool trained() const { return trained_; }
  const TrainingInfo& info() const { return info_; }

  // Softmax of the linear scores, normalized in-op.
  ClassDistribution predict_proba(std::span<const double> features) const;

 private:
  SoftmaxModel() = default;
  friend SoftmaxModel train_softmax(const Dataset&, const CostWeights&,
                                    const OptimizerConfig&);

  std::vector<std::vector<double>> coef_;
  bool trained_ = false;
  TrainingInfo info_;
};

// Minimizes the weighted multinomial negative log-likelihood (normalized by
// total weight, so rescaling all weights changes nothing) by full-batch
// gradient descent with backtracking line search. Deterministic given data
// order and config.
SoftmaxModel train_softmax(const Dataset& data, const CostWeights& weights,
                           const OptimizerConfig& config = {});

enum class ProbSource { internal_model, external_file };

// Per-case estimated (or true) class distributions keyed by case id.
struct ProbabilityTable {
  int num_classes = 0;
  std::vector<std::int64_t> ids;  // unique, parallel to rows
  std::vector<ClassDistribution> rows;
  ProbSource source = ProbSource::internal_model;

  std::size_t size() const { return rows.size(); }
};

// Reads the probability CSV (header id,p_0,...,p_{K-1}); every row is
// validated against the distribution invariants, errors name the row.
ProbabilityTable load_probability_table(const std::filesystem::path& file, int num_classes);

ProbabilityTable predict_table(const SoftmaxModel& model, const Dataset& data);

ProbabilityTable subset_table(const ProbabilityTable& table,
                              std::span<const std::size_t> indices);

// Pairs each table row with the outcome of the dataset case carrying the same
// id; errors if either side has ids the other lacks.
std::vector<LabeledDistribution> join_outcomes(const ProbabilityTable& table,
                                               const Dataset& data);

}  // namespace ccp
