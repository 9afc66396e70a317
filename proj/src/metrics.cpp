#include "ccp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccp/errors.hpp"

namespace ccp {

namespace {

void check_class(int cls, int k, const char* what) {
  if (cls < 0 || cls >= k) {
    throw ValidationError(std::string(what) + " class " + std::to_string(cls) +
                          " out of range [0, " + std::to_string(k - 1) + "]");
  }
}

}  // namespace

ConfusionTable::ConfusionTable(int num_classes) : k_(num_classes) {
  if (num_classes < 2) {
    throw ValidationError("confusion table needs at least 2 classes, got " +
                          std::to_string(num_classes));
  }
  counts_.assign(static_cast<std::size_t>(k_) * static_cast<std::size_t>(k_), 0);
}

ConfusionTable ConfusionTable::from_counts(
    const std::vector<std::vector<std::int64_t>>& counts) {
  ConfusionTable table(static_cast<int>(counts.size()));
  for (std::size_t a = 0; a < counts.size(); ++a) {
    if (counts[a].size() != counts.size()) {
      throw ValidationError("confusion counts row " + std::to_string(a) + " has " +
                            std::to_string(counts[a].size()) + " entries, expected " +
                            std::to_string(counts.size()));
    }
    for (std::size_t p = 0; p < counts[a].size(); ++p) {
      if (counts[a][p] < 0) {
        throw ValidationError("confusion count at (" + std::to_string(a) + ", " +
                              std::to_string(p) + ") is negative");
      }
      table.counts_[a * counts.size() + p] = counts[a][p];
    }
  }
  return table;
}

void ConfusionTable::add(int actual, int predicted) {
  check_class(actual, k_, "actual");
  check_class(predicted, k_, "predicted");
  counts_[static_cast<std::size_t>(actual) * static_cast<std::size_t>(k_) +
          static_cast<std::size_t>(predicted)] += 1;
}

std::int64_t ConfusionTable::count(int actual, int predicted) const {
  check_class(actual, k_, "actual");
  check_class(predicted, k_, "predicted");
  return counts_[static_cast<std::size_t>(actual) * static_cast<std::size_t>(k_) +
                 static_cast<std::size_t>(predicted)];
}

std::int64_t ConfusionTable::row_total(int actual) const {
  check_class(actual, k_, "actual");
  std::int64_t total = 0;
  for (int p = 0; p < k_; ++p) total += count(actual, p);
  return total;
}

std::int64_t ConfusionTable::col_total(int predicted) const {
  check_class(predicted, k_, "predicted");
  std::int64_t total = 0;
  for (int a = 0; a < k_; ++a) total += count(a, predicted);
  return total;
}

std::int64_t ConfusionTable::total() const {
  std::int64_t total = 0;
  for (std::int64_t c : counts_) total += c;
  return total;
}

ConfusionTable build_confusion(std::span<const std::pair<int, int>> actual_forecast,
                               int num_classes) {
  ConfusionTable table(num_classes);
  for (const auto& [actual, forecast] : actual_forecast) table.add(actual, forecast);
  return table;
}

double classification_error(const ConfusionTable& table, int cls) {
  const std::int64_t row = table.row_total(cls);
  if (row == 0) {
    throw ValidationError("classification error undefined: no cases with actual class " +
                          std::to_string(cls));
  }
  return static_cast<double>(row - table.count(cls, cls)) / static_cast<double>(row);
}

double forecasting_error(const ConfusionTable& table, int cls) {
  const std::int64_t col = table.col_total(cls);
  if (col == 0) {
    throw ValidationError("forecasting error undefined: no cases forecast as class " +
                          std::to_string(cls));
  }
  return static_cast<double>(col - table.count(cls, cls)) / static_cast<double>(col);
}

double empirical_cost_ratio(const ConfusionTable& table, int actual_a, int pred_p,
                            int actual_b, int pred_q) {
  const std::int64_t denom = table.count(actual_b, pred_q);
  if (denom == 0) {
    throw ValidationError("cost ratio undefined: count(actual=" + std::to_string(actual_b) +
                          ", pred=" + std::to_string(pred_q) + ") is zero");
  }
  return static_cast<double>(table.count(actual_a, pred_p)) / static_cast<double>(denom);
}

double empirical_coverage(std::span<const PredictionSet> sets, std::span<const int> actuals) {
  if (sets.empty()) throw ValidationError("empirical_coverage: empty input");
  if (sets.size() != actuals.size()) {
    throw ValidationError("empirical_coverage: " + std::to_string(sets.size()) + " sets vs " +
                          std::to_string(actuals.size()) + " actuals");
  }
  std::size_t covered = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].contains(actuals[i])) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(sets.size());
}

std::int64_t Histogram::total() const {
  std::int64_t n = 0;
  for (std::int64_t c : counts) n += c;
  return n;
}

Histogram nonconformity_histogram(std::span<const double> conformity_scores, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least 1 bin, got " + std::to_string(bins));
  Histogram hist;
  hist.counts.assign(static_cast<std::size_t>(bins), 0);
  hist.empty_input = conformity_scores.empty();
  for (std::size_t i = 0; i < conformity_scores.size(); ++i) {
    const double s = conformity_scores[i];
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ValidationError("conformity score at index " + std::to_string(i) +
                            " outside [0, 1]");
    }
    const double v = 1.0 - s;
    auto bin = static_cast<int>(v * bins);
    bin = std::min(bin, bins - 1);
    hist.counts[static_cast<std::size_t>(bin)] += 1;
  }
  return hist;
}

ErrorReport make_error_report(const ConfusionTable& table) {
  const int k = table.num_classes();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ErrorReport report;
  report.classification_error.assign(static_cast<std::size_t>(k), nan);
  report.forecasting_error.assign(static_cast<std::size_t>(k), nan);
  report.cost_ratio.assign(static_cast<std::size_t>(k),
                           std::vector<double>(static_cast<std::size_t>(k), nan));
  report.outcome_marginal.assign(static_cast<std::size_t>(k), nan);

  const std::int64_t n = table.total();
  for (int c = 0; c < k; ++c) {
    if (table.row_total(c) > 0) {
      report.classification_error[static_cast<std::size_t>(c)] = classification_error(table, c);
    }
    if (table.col_total(c) > 0) {
      report.forecasting_error[static_cast<std::size_t>(c)] = forecasting_error(table, c);
    }
    if (n > 0) {
      report.outcome_marginal[static_cast<std::size_t>(c)] =
          static_cast<double>(table.row_total(c)) / static_cast<double>(n);
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a == b || table.count(b, a) == 0) continue;
      report.cost_ratio[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          empirical_cost_ratio(table, a, b, b, a);
    }
  }
  return report;
}

}  // namespace ccp
