#include "ccp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "ccp/errors.hpp"

namespace ccp {

CostWeights CostWeights::ones(int num_classes) {
  return CostWeights{std::vector<double>(static_cast<std::size_t>(num_classes), 1.0)};
}

SoftmaxModel SoftmaxModel::from_coefficients(std::vector<std::vector<double>> coef,
                                             TrainingInfo info) {
  if (coef.size() < 2) {
    throw ValidationError("model needs at least 2 classes, got " + std::to_string(coef.size()));
  }
  const std::size_t cols = coef[0].size();
  if (cols < 2) throw ValidationError("model needs at least 1 feature column");
  for (std::size_t k = 0; k < coef.size(); ++k) {
    if (coef[k].size() != cols) {
      throw ValidationError("coefficient row " + std::to_string(k) + " has " +
                            std::to_string(coef[k].size()) + " entries, expected " +
                            std::to_string(cols));
    }
    for (double c : coef[k]) {
      if (!std::isfinite(c)) {
        throw ValidationError("coefficient row " + std::to_string(k) + " has a non-finite entry");
      }
    }
  }
  SoftmaxModel model;
  model.coef_ = std::move(coef);
  model.trained_ = true;
  model.info_ = info;
  return model;
}

ClassDistribution SoftmaxModel::predict_proba(std::span<const double> features) const {
  if (!trained_) throw ValidationError("predict_proba: model is not trained");
  if (features.size() != num_features()) {
    throw ValidationError("feature vector has " + std::to_string(features.size()) +
                          " entries, model expects " + std::to_string(num_features()));
  }
  const int k = num_classes();
  std::vector<double> z(static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) {
    const auto& row = coef_[static_cast<std::size_t>(c)];
    double score = row[0];
    for (std::size_t j = 0; j < features.size(); ++j) score += row[j + 1] * features[j];
    z[static_cast<std::size_t>(c)] = score;
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return ClassDistribution::from_probs(std::move(z));
}

namespace {

struct WeightedData {
  std::size_t n = 0;
  std::size_t d = 0;   // feature count (without intercept)
  int k = 0;
  const Dataset* data = nullptr;
  std::vector<double> case_weight;  // w[y_i] / sum of weights
};

// theta holds rows 1..K-1 of the coefficient matrix, flattened; row 0 is
// pinned to zero.
double loss_and_grad(const WeightedData& wd, const std::vector<double>& theta,
                     std::vector<double>* grad) {
  const std::size_t cols = wd.d + 1;
  if (grad) std::fill(grad->begin(), grad->end(), 0.0);
  std::vector<double> z(static_cast<std::size_t>(wd.k));
  std::vector<double> p(static_cast<std::size_t>(wd.k));
  double loss = 0.0;
  for (std::size_t i = 0; i < wd.n; ++i) {
    const LabeledCase& c = wd.data->cases[i];
    z[0] = 0.0;
    for (int cls = 1; cls < wd.k; ++cls) {
      const double* row = theta.data() + static_cast<std::size_t>(cls - 1) * cols;
      double score = row[0];
      for (std::size_t j = 0; j < wd.d; ++j) score += row[j + 1] * c.features[j];
      z[static_cast<std::size_t>(cls)] = score;
    }
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (int cls = 0; cls < wd.k; ++cls) {
      p[static_cast<std::size_t>(cls)] = std::exp(z[static_cast<std::size_t>(cls)] - zmax);
      sum += p[static_cast<std::size_t>(cls)];
    }
    const double wi = wd.case_weight[i];
    loss += wi * (std::log(sum) + zmax - z[static_cast<std::size_t>(c.outcome)]);
    if (grad) {
      for (int cls = 1; cls < wd.k; ++cls) {
        const double resid =
            wi * (p[static_cast<std::size_t>(cls)] / sum - (c.outcome == cls ? 1.0 : 0.0));
        double* grow = grad->data() + static_cast<std::size_t>(cls - 1) * cols;
        grow[0] += resid;
        for (std::size_t j = 0; j < wd.d; ++j) grow[j + 1] += resid * c.features[j];
      }
    }
  }
  return loss;
}

}  // namespace

SoftmaxModel train_softmax(const Dataset& data, const CostWeights& weights,
                           const OptimizerConfig& config) {
  const int k = data.num_classes;
  if (k < 2) throw ValidationError("training needs at least 2 classes, got " + std::to_string(k));
  if (data.cases.empty()) throw ValidationError("training data is empty");
  if (weights.num_classes() != k) {
    throw ValidationError("weight vector has " + std::to_string(weights.num_classes()) +
                          " entries, expected " + std::to_string(k));
  }
  for (int c = 0; c < k; ++c) {
    if (!(weights.w[static_cast<std::size_t>(c)] > 0.0)) {
      throw ValidationError("cost weight for class " + std::to_string(c) + " must be positive");
    }
  }
  std::vector<std::size_t> class_counts(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < data.cases.size(); ++i) {
    const LabeledCase& c = data.cases[i];
    if (c.outcome < 0 || c.outcome >= k) {
      throw ValidationError("case " + std::to_string(i) + " has outcome " +
                            std::to_string(c.outcome) + " out of range");
    }
    if (c.features.size() != data.num_features) {
      throw ValidationError("case " + std::to_string(i) + " has " +
                            std::to_string(c.features.size()) + " features, expected " +
                            std::to_string(data.num_features));
    }
    class_counts[static_cast<std::size_t>(c.outcome)] += 1;
  }
  for (int c = 0; c < k; ++c) {
    if (class_counts[static_cast<std::size_t>(c)] == 0) {
      throw ValidationError("degenerate training data: no cases with outcome class " +
                            std::to_string(c));
    }
  }

  WeightedData wd;
  wd.n = data.cases.size();
  wd.d = data.num_features;
  wd.k = k;
  wd.data = &data;
  wd.case_weight.resize(wd.n);
  double total_weight = 0.0;
  for (std::size_t i = 0; i < wd.n; ++i) {
    total_weight += weights.w[static_cast<std::size_t>(data.cases[i].outcome)];
  }
  for (std::size_t i = 0; i < wd.n; ++i) {
    wd.case_weight[i] = weights.w[static_cast<std::size_t>(data.cases[i].outcome)] / total_weight;
  }

  const std::size_t cols = wd.d + 1;
  std::vector<double> theta(static_cast<std::size_t>(k - 1) * cols, 0.0);
  std::vector<double> grad(theta.size(), 0.0);
  std::vector<double> trial(theta.size(), 0.0);

  TrainingInfo info;
  double step = config.initial_step;
  double loss = loss_and_grad(wd, theta, &grad);
  info.initial_loss = loss;
  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged: non-finite loss at iteration " +
                         std::to_string(iter));
    }
    double gmax = 0.0;
    double gnorm2 = 0.0;
    for (double g : grad) {
      gmax = std::max(gmax, std::abs(g));
      gnorm2 += g * g;
    }
    info.final_grad_norm = gmax;
    if (gmax < config.grad_tol) {
      info.converged = true;
      break;
    }

    // Backtracking line search on the Armijo condition.
    double t = step;
    bool accepted = false;
    double trial_loss = 0.0;
    while (t > 1e-18) {
      for (std::size_t j = 0; j < theta.size(); ++j) trial[j] = theta[j] - t * grad[j];
      trial_loss = loss_and_grad(wd, trial, nullptr);
      if (std::isfinite(trial_loss) && trial_loss <= loss - config.armijo_c * t * gnorm2) {
        accepted = true;
        break;
      }
      t *= config.backtrack;
    }
    if (!accepted) break;  // no representable step improves the loss

    theta.swap(trial);
    loss = loss_and_grad(wd, theta, &grad);
    step = std::min(t * 2.0, 1e6);
  }
  info.iterations = iter;
  info.final_loss = loss;

  std::vector<std::vector<double>> coef(static_cast<std::size_t>(k),
                                        std::vector<double>(cols, 0.0));
  for (int cls = 1; cls < k; ++cls) {
    for (std::size_t j = 0; j < cols; ++j) {
      coef[static_cast<std::size_t>(cls)][j] = theta[static_cast<std::size_t>(cls - 1) * cols + j];
    }
  }
  SoftmaxModel model;
  model.coef_ = std::move(coef);
  model.trained_ = true;
  model.info_ = info;
  return model;
}

ProbabilityTable predict_table(const SoftmaxModel& model, const Dataset& data) {
  ProbabilityTable table;
  table.num_classes = model.num_classes();
  table.source = ProbSource::internal_model;
  table.ids = data.ids;
  table.rows.reserve(data.size());
  for (const LabeledCase& c : data.cases) table.rows.push_back(model.predict_proba(c.features));
  return table;
}

ProbabilityTable subset_table(const ProbabilityTable& table,
                              std::span<const std::size_t> indices) {
  ProbabilityTable out;
  out.num_classes = table.num_classes;
  out.source = table.source;
  out.ids.reserve(indices.size());
  out.rows.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= table.size()) {
      throw ValidationError("subset index " + std::to_string(idx) + " out of range");
    }
    out.ids.push_back(table.ids[idx]);
    out.rows.push_back(table.rows[idx]);
  }
  return out;
}

std::vector<LabeledDistribution> join_outcomes(const ProbabilityTable& table,
                                               const Dataset& data) {
  if (table.size() != data.size()) {
    throw ValidationError("probability table has " + std::to_string(table.size()) +
                          " rows, dataset has " + std::to_string(data.size()));
  }
  std::unordered_map<std::int64_t, int> outcome_by_id;
  outcome_by_id.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    outcome_by_id.emplace(data.ids[i], data.cases[i].outcome);
  }
  std::vector<LabeledDistribution> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto it = outcome_by_id.find(table.ids[i]);
    if (it == outcome_by_id.end()) {
      throw ValidationError("id " + std::to_string(table.ids[i]) +
                            " present in probability table but not in dataset");
    }
    out.push_back(LabeledDistribution{table.rows[i], it->second});
  }
  return out;
}

}  // namespace ccp
