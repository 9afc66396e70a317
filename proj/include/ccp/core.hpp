#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ccp {

// A stored distribution sums to 1 within this tolerance.
inline constexpr double kProbSumTol = 1e-9;
// Raw inputs deviating from 1 by at most this much are renormalized on
// construction; anything worse is rejected so grossly wrong upstream
// numbers do not pass silently.
inline constexpr double kProbRenormMax = 1e-6;

struct ClassLabel {
  int index = 0;
  std::string display_name;  // optional, e.g. "NoArrest"
};

// Optional display names for a K-class outcome space. Classes are addressed
// by index everywhere; names only affect report rendering.
class LabelSpace {
 public:
  explicit LabelSpace(int num_classes);
  LabelSpace(int num_classes, std::vector<std::string> names);

  int size() const { return num_classes_; }
  std::string name(int index) const;
  ClassLabel label(int index) const { return ClassLabel{index, name(index)}; }

 private:
  int num_classes_;
  std::vector<std::string> names_;
};

// Probability vector over K outcome classes for one case.
// Construction validates: size >= 2, every entry finite and in [0, 1], and
// the sum within kProbRenormMax of 1 (then renormalized exactly).
class ClassDistribution {
 public:
  static ClassDistribution from_probs(std::vector<double> probs);

  int num_classes() const { return static_cast<int>(probs_.size()); }
  double prob(int k) const { return probs_[static_cast<std::size_t>(k)]; }
  const std::vector<double>& probs() const { return probs_; }

 private:
  explicit ClassDistribution(std::vector<double> p) : probs_(std::move(p)) {}
  std::vector<double> probs_;
};

// Class indices sorted by descending probability. Exact ties break by
// ascending class index, giving a deterministic total order (equivalent to
// an infinitesimal, index-ordered jitter).
struct RankedDistribution {
  std::vector<int> order;  // order[j] = class index holding rank j
  ClassDistribution dist;

  double prob_at_rank(int j) const { return dist.prob(order[static_cast<std::size_t>(j)]); }
  int top_class() const { return order[0]; }
};

RankedDistribution rank_distribution(const ClassDistribution& dist);

// Forecast class: highest estimated probability under the shared tie rule.
int argmax_class(const ClassDistribution& dist);

struct LabeledCase {
  std::vector<double> features;
  int outcome = 0;
};

struct Dataset {
  int num_classes = 0;           // K
  std::size_t num_features = 0;  // d, constant across cases
  std::vector<std::int64_t> ids;
  std::vector<LabeledCase> cases;

  std::size_t size() const { return cases.size(); }
};

}  // namespace ccp
