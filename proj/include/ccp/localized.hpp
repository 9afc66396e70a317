#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ccp/conformal.hpp"

namespace ccp {

// Per-forecast-class split calibration: calibration cases are partitioned by
// the classifier's forecast (argmax class under the shared tie rule) and the
// nested calibration runs once per partition. A future case is routed to the
// threshold of its own forecast's partition.
struct LocalizedCalibration {
  double alpha = 0.0;
  std::vector<CalibrationModel> per_forecast;  // gamma_hat_j, indexed by forecast class
  std::vector<std::size_t> partition_sizes;    // sums to the calibration-set size
  std::vector<bool> empty_partition;           // size-0 partitions, gamma pinned to 0

  int num_classes() const { return static_cast<int>(per_forecast.size()); }
};

LocalizedCalibration localized_calibrate(std::span<const LabeledDistribution> cases,
                                         double alpha);

PredictionSet localized_predict(const ClassDistribution& dist,
                                const LocalizedCalibration& loc);

// One emitted set reduced to what the size summary needs.
struct ForecastSetSize {
  int forecast = 0;
  std::size_t set_size = 0;
};

// Proportions of set sizes 1..K within each forecast class. Stored exact;
// report rendering rounds to 3 digits. Rows of non-empty groups sum to 1.
struct SetSizeReport {
  std::vector<std::vector<double>> proportions;  // [forecast][size - 1]
  std::vector<std::size_t> group_counts;
  std::vector<bool> empty_group;  // flagged rows render as zeros

  int num_classes() const { return static_cast<int>(proportions.size()); }
};

SetSizeReport set_size_report(std::span<const ForecastSetSize> sets, int num_classes);

}  // namespace ccp
