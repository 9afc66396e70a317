#include "ccp/localized.hpp"

#include <string>

#include "ccp/errors.hpp"

namespace ccp {

LocalizedCalibration localized_calibrate(std::span<const LabeledDistribution> cases,
                                         double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must be in (0, 1), got " + std::to_string(alpha));
  }
  if (cases.empty()) throw ValidationError("localized_calibrate: empty calibration set");

  const int k = cases.front().dist.num_classes();
  std::vector<std::vector<double>> partition_scores(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    if (c.dist.num_classes() != k) {
      throw ValidationError("calibration case " + std::to_string(i) + " has " +
                            std::to_string(c.dist.num_classes()) + " classes, expected " +
                            std::to_string(k));
    }
    const int forecast = argmax_class(c.dist);
    partition_scores[static_cast<std::size_t>(forecast)].push_back(
        score_labeled(c.dist, c.outcome));
  }

  LocalizedCalibration loc;
  loc.alpha = alpha;
  loc.per_forecast.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const auto& scores = partition_scores[static_cast<std::size_t>(j)];
    loc.partition_sizes.push_back(scores.size());
    loc.empty_partition.push_back(scores.empty());
    if (scores.empty()) {
      CalibrationModel empty;
      empty.alpha = alpha;
      empty.n_cal = 0;
      empty.order_index = order_statistic_index(0, alpha);
      empty.gamma_hat = 0.0;
      empty.degenerate = true;
      loc.per_forecast.push_back(empty);
    } else {
      loc.per_forecast.push_back(calibrate(scores, alpha));
    }
  }
  return loc;
}

PredictionSet localized_predict(const ClassDistribution& dist, const LocalizedCalibration& loc) {
  if (dist.num_classes() != loc.num_classes()) {
    throw ValidationError("distribution has " + std::to_string(dist.num_classes()) +
                          " classes, localized calibration has " +
                          std::to_string(loc.num_classes()));
  }
  const int forecast = argmax_class(dist);
  const CalibrationModel& cal = loc.per_forecast[static_cast<std::size_t>(forecast)];
  return set_at_threshold(conformity_scores(dist), cal.gamma_hat, loc.alpha,
                          SetMethod::localized);
}

SetSizeReport set_size_report(std::span<const ForecastSetSize> sets, int num_classes) {
  if (num_classes < 2) {
    throw ValidationError("set_size_report needs at least 2 classes, got " +
                          std::to_string(num_classes));
  }
  const auto k = static_cast<std::size_t>(num_classes);
  std::vector<std::vector<std::size_t>> counts(k, std::vector<std::size_t>(k, 0));
  std::vector<std::size_t> totals(k, 0);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& entry = sets[i];
    if (entry.forecast < 0 || entry.forecast >= num_classes) {
      throw ValidationError("set " + std::to_string(i) + " has forecast class " +
                            std::to_string(entry.forecast) + " out of range");
    }
    if (entry.set_size < 1 || entry.set_size > k) {
      throw ValidationError("set " + std::to_string(i) + " has size " +
                            std::to_string(entry.set_size) + " outside [1, " +
                            std::to_string(k) + "]");
    }
    counts[static_cast<std::size_t>(entry.forecast)][entry.set_size - 1] += 1;
    totals[static_cast<std::size_t>(entry.forecast)] += 1;
  }

  SetSizeReport report;
  report.proportions.assign(k, std::vector<double>(k, 0.0));
  report.group_counts = totals;
  report.empty_group.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    report.empty_group[j] = totals[j] == 0;
    if (totals[j] == 0) continue;
    for (std::size_t sz = 0; sz < k; ++sz) {
      report.proportions[j][sz] =
          static_cast<double>(counts[j][sz]) / static_cast<double>(totals[j]);
    }
  }
  return report;
}

}  // namespace ccp
