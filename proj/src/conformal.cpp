#include "ccp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccp/errors.hpp"

namespace ccp {

ConformityScores conformity_scores(const ClassDistribution& dist) {
  RankedDistribution ranked = rank_distribution(dist);
  const int k = dist.num_classes();
  std::vector<double> s(static_cast<std::size_t>(k), 0.0);
  double tail = 0.0;
  for (int j = k - 1; j >= 1; --j) {
    tail += ranked.prob_at_rank(j);
    s[static_cast<std::size_t>(ranked.order[static_cast<std::size_t>(j)])] = tail;
  }
  s[static_cast<std::size_t>(ranked.order[0])] = 1.0;
  return ConformityScores{std::move(s), std::move(ranked.order)};
}

double score_labeled(const ClassDistribution& dist, int outcome) {
  if (outcome < 0 || outcome >= dist.num_classes()) {
    throw ValidationError("outcome label " + std::to_string(outcome) + " out of range [0, " +
                          std::to_string(dist.num_classes() - 1) + "]");
  }
  return conformity_scores(dist).score(outcome);
}

std::vector<double> labeled_scores(std::span<const LabeledDistribution> cases) {
  std::vector<double> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(score_labeled(c.dist, c.outcome));
  return out;
}

std::size_t order_statistic_index(std::size_t n, double alpha) {
  // Guard keeps products that are exact integers from ceiling up one slot
  // when floating error lands a hair above the integer.
  const double v = static_cast<double>(n + 1) * (1.0 - alpha);
  return static_cast<std::size_t>(std::ceil(v - 1e-9));
}

CalibrationModel calibrate(std::span<const double> scores, double alpha) {
  if (scores.empty()) throw ValidationError("calibrate: empty score sequence");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must be in (0, 1), got " + std::to_string(alpha));
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0 && scores[i] <= 1.0)) {
      throw ValidationError("conformity score at index " + std::to_string(i) +
                            " outside [0, 1]");
    }
  }

  const std::size_t n = scores.size();
  const std::size_t k = order_statistic_index(n, alpha);
  CalibrationModel cal;
  cal.alpha = alpha;
  cal.n_cal = n;
  cal.order_index = k;
  if (k > n) {
    cal.gamma_hat = 0.0;
    cal.degenerate = true;
    return cal;
  }

  // k-th smallest non-conformity 1 - s is the k-th largest score; taking the
  // score directly avoids a double 1-x round trip at the set boundary.
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  cal.gamma_hat = sorted[n - k];
  cal.degenerate = false;
  return cal;
}

std::string_view to_string(SetMethod method) {
  switch (method) {
    case SetMethod::nested: return "nested";
    case SetMethod::localized: return "localized";
    case SetMethod::oracle: return "oracle";
    case SetMethod::naive: return "naive";
  }
  return "unknown";
}

SetMethod set_method_from_string(std::string_view name) {
  if (name == "nested") return SetMethod::nested;
  if (name == "localized") return SetMethod::localized;
  if (name == "oracle") return SetMethod::oracle;
  if (name == "naive") return SetMethod::naive;
  throw ValidationError("unknown method '" + std::string(name) +
                        "' (expected nested|localized|oracle|naive)");
}

bool PredictionSet::contains(int y) const {
  return std::binary_search(members.begin(), members.end(), y);
}

PredictionSet set_at_threshold(const ConformityScores& scores, double gamma, double alpha,
                               SetMethod method) {
  PredictionSet set;
  set.alpha = alpha;
  set.method = method;
  set.threshold_used = gamma;
  for (int y = 0; y < scores.num_classes(); ++y) {
    if (scores.score(y) >= gamma) set.members.push_back(y);
  }
  return set;
}

PredictionSet predict_set(const ClassDistribution& dist, const CalibrationModel& cal) {
  return set_at_threshold(conformity_scores(dist), cal.gamma_hat, cal.alpha, SetMethod::nested);
}

PredictionSet naive_set(const ClassDistribution& dist, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ValidationError("naive set gamma must be in [0, 1], got " + std::to_string(gamma));
  }
  return set_at_threshold(conformity_scores(dist), gamma,
                          std::numeric_limits<double>::quiet_NaN(), SetMethod::naive);
}

OracleResult oracle_threshold(const ClassDistribution& dist, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must be in (0, 1), got " + std::to_string(alpha));
  }
  const RankedDistribution ranked = rank_distribution(dist);
  const int k = dist.num_classes();
  const double target = 1.0 - alpha;

  // Smallest descending-probability prefix reaching the target mass. If
  // rounding keeps even the full sum a hair under the target, the full set
  // stands in (its true mass is 1).
  double mass = 0.0;
  int prefix = 0;
  for (int j = 0; j < k; ++j) {
    mass += ranked.prob_at_rank(j);
    prefix = j + 1;
    if (mass >= target) break;
  }

  OracleResult out;
  out.threshold = ranked.prob_at_rank(prefix - 1);
  out.mass = mass;
  out.set.alpha = alpha;
  out.set.method = SetMethod::oracle;
  out.set.threshold_used = out.threshold;
  out.set.members.assign(ranked.order.begin(), ranked.order.begin() + prefix);
  std::sort(out.set.members.begin(), out.set.members.end());
  return out;
}

}  // namespace ccp
