#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "ccp/conformal.hpp"

namespace ccp {

// K x K count matrix indexed (actual, predicted).
class ConfusionTable {
 public:
  explicit ConfusionTable(int num_classes);
  static ConfusionTable from_counts(const std::vector<std::vector<std::int64_t>>& counts);

  void add(int actual, int predicted);

  int num_classes() const { return k_; }
  std::int64_t count(int actual, int predicted) const;
  std::int64_t row_total(int actual) const;
  std::int64_t col_total(int predicted) const;
  std::int64_t total() const;

 private:
  int k_;
  std::vector<std::int64_t> counts_;  // row-major
};

ConfusionTable build_confusion(std::span<const std::pair<int, int>> actual_forecast,
                               int num_classes);

// P(forecast != actual | actual = cls): confusion-table row off-diagonal share.
double classification_error(const ConfusionTable& table, int cls);

// P(forecast != actual | forecast = cls): confusion-table column off-diagonal share.
double forecasting_error(const ConfusionTable& table, int cls);

// count(actual_a, pred_p) / count(actual_b, pred_q).
double empirical_cost_ratio(const ConfusionTable& table, int actual_a, int pred_p,
                            int actual_b, int pred_q);

// Fraction of cases whose actual outcome lies inside the emitted set.
double empirical_coverage(std::span<const PredictionSet> sets, std::span<const int> actuals);

struct Histogram {
  std::vector<std::int64_t> counts;  // fixed-width bins over [0, 1]
  bool empty_input = false;

  std::int64_t total() const;
};

// Histogram of the non-conformities 1 - s. Scores must lie in [0, 1]; an
// empty sequence yields a zero histogram with the empty_input flag raised.
Histogram nonconformity_histogram(std::span<const double> conformity_scores, int bins);

// Per-class rates, pairwise empirical cost ratios and the marginal outcome
// distribution, all re-derivable from the table. Undefined rates (empty row
// or column) are NaN here; the single-rate operations above throw instead.
struct ErrorReport {
  std::vector<double> classification_error;
  std::vector<double> forecasting_error;
  // cost_ratio[a][b] = count(actual=a, pred=b) / count(actual=b, pred=a);
  // diagonal and zero-denominator entries are NaN.
  std::vector<std::vector<double>> cost_ratio;
  std::vector<double> outcome_marginal;
};

ErrorReport make_error_report(const ConfusionTable& table);

}  // namespace ccp
