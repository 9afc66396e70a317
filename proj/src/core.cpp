#include "ccp/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ccp/errors.hpp"

namespace ccp {

LabelSpace::LabelSpace(int num_classes) : num_classes_(num_classes) {
  if (num_classes < 2) {
    throw ValidationError("label space needs at least 2 classes, got " +
                          std::to_string(num_classes));
  }
}

LabelSpace::LabelSpace(int num_classes, std::vector<std::string> names)
    : LabelSpace(num_classes) {
  if (!names.empty() && static_cast<int>(names.size()) != num_classes) {
    throw ValidationError("label space has " + std::to_string(num_classes) +
                          " classes but " + std::to_string(names.size()) + " names");
  }
  names_ = std::move(names);
}

std::string LabelSpace::name(int index) const {
  if (index < 0 || index >= num_classes_) {
    throw ValidationError("class index " + std::to_string(index) + " out of range [0, " +
                          std::to_string(num_classes_ - 1) + "]");
  }
  if (static_cast<std::size_t>(index) < names_.size()) return names_[static_cast<std::size_t>(index)];
  return "class_" + std::to_string(index);
}

ClassDistribution ClassDistribution::from_probs(std::vector<double> probs) {
  if (probs.size() < 2) {
    throw ValidationError("distribution needs at least 2 classes, got " +
                          std::to_string(probs.size()));
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (!std::isfinite(p)) {
      throw ValidationError("probability at index " + std::to_string(i) + " is not finite");
    }
    if (p < 0.0) {
      throw ValidationError("probability at index " + std::to_string(i) + " is negative (" +
                            std::to_string(p) + ")");
    }
    if (p > 1.0 + kProbRenormMax) {
      throw ValidationError("probability at index " + std::to_string(i) + " is " +
                            std::to_string(p) + ", outside [0, 1]");
    }
  }
  const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
  if (std::abs(sum - 1.0) > kProbRenormMax) {
    throw ValidationError("probabilities sum to " + std::to_string(sum) +
                          ", outside renormalization tolerance " + std::to_string(kProbRenormMax));
  }
  if (sum != 1.0) {
    for (double& p : probs) p /= sum;
  }
  return ClassDistribution(std::move(probs));
}

RankedDistribution rank_distribution(const ClassDistribution& dist) {
  std::vector<int> order(static_cast<std::size_t>(dist.num_classes()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&dist](int a, int b) {
    const double pa = dist.prob(a);
    const double pb = dist.prob(b);
    if (pa != pb) return pa > pb;
    return a < b;
  });
  return RankedDistribution{std::move(order), dist};
}

int argmax_class(const ClassDistribution& dist) {
  int best = 0;
  for (int k = 1; k < dist.num_classes(); ++k) {
    if (dist.prob(k) > dist.prob(best)) best = k;
  }
  return best;
}

}  // namespace ccp
