#include "ccp/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ccp/errors.hpp"
#include "ccp/rng.hpp"

namespace ccp {

namespace {

// Tuned so the default simulation population has top-1 (Bayes) accuracy near
// 0.62 and a majority class share near 0.42: informative but far from
// saturating, with all three forecast partitions well populated.
const std::vector<std::vector<double>> kDefaultCoef34 = {
    {0.0, 0.0, 0.0, 0.0, 0.0},
    {0.25, 0.9, -0.6, 0.5, 0.1},
    {-0.20, -0.5, 0.8, 0.3, -0.9},
};

constexpr std::uint64_t kCanonicalCoefSeed = 0xC0EF5EEDULL;

void validate_spec(const GeneratorSpec& spec) {
  if (spec.num_classes < 2) {
    throw ValidationError("generator needs at least 2 classes, got " +
                          std::to_string(spec.num_classes));
  }
  if (spec.num_features < 1) {
    throw ValidationError("generator needs at least 1 feature, got " +
                          std::to_string(spec.num_features));
  }
  if (spec.coefficients.size() != static_cast<std::size_t>(spec.num_classes)) {
    throw ValidationError("coefficient matrix has " + std::to_string(spec.coefficients.size()) +
                          " rows, expected " + std::to_string(spec.num_classes));
  }
  for (const auto& row : spec.coefficients) {
    if (row.size() != static_cast<std::size_t>(spec.num_features + 1)) {
      throw ValidationError("coefficient rows must have " +
                            std::to_string(spec.num_features + 1) + " columns");
    }
    for (double c : row) {
      if (!std::isfinite(c)) throw ValidationError("coefficient matrix has a non-finite entry");
    }
  }
}

}  // namespace

GeneratorSpec GeneratorSpec::canonical(int num_classes, int num_features, std::uint64_t seed,
                                       std::size_t n) {
  GeneratorSpec spec;
  spec.num_classes = num_classes;
  spec.num_features = num_features;
  spec.seed = seed;
  spec.n = n;
  if (num_classes == 3 && num_features == 4) {
    spec.coefficients = kDefaultCoef34;
  } else {
    spec.coefficients.assign(static_cast<std::size_t>(num_classes),
                             std::vector<double>(static_cast<std::size_t>(num_features + 1), 0.0));
    for (int k = 1; k < num_classes; ++k) {
      for (int j = 0; j <= num_features; ++j) {
        const std::uint64_t ctr =
            static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(num_features + 1) +
            static_cast<std::uint64_t>(j);
        const double u = 2.0 * uniform01_at(kCanonicalCoefSeed, ctr) - 1.0;
        // Magnitude floor keeps every coordinate informative.
        spec.coefficients[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] =
            std::copysign(0.3 + 0.7 * std::abs(u), u);
      }
    }
  }
  validate_spec(spec);
  return spec;
}

SyntheticData generate(const GeneratorSpec& spec) {
  validate_spec(spec);
  const int k = spec.num_classes;
  const auto d = static_cast<std::size_t>(spec.num_features);
  const std::uint64_t stride = 2 * static_cast<std::uint64_t>(d) + 1;

  SyntheticData out;
  out.dataset.num_classes = k;
  out.dataset.num_features = d;
  out.dataset.ids.reserve(spec.n);
  out.dataset.cases.reserve(spec.n);
  out.true_probs.num_classes = k;
  out.true_probs.source = ProbSource::internal_model;
  out.true_probs.ids.reserve(spec.n);
  out.true_probs.rows.reserve(spec.n);

  std::vector<double> z(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::uint64_t base = static_cast<std::uint64_t>(i) * stride;
    LabeledCase c;
    c.features.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      const std::uint64_t ctr = base + 2 * static_cast<std::uint64_t>(j);
      if (spec.feature_dist == FeatureDist::standard_normal) {
        c.features[j] = normal_at(spec.seed, ctr);
      } else {
        c.features[j] = 2.0 * uniform01_at(spec.seed, ctr) - 1.0;
      }
    }

    for (int cls = 0; cls < k; ++cls) {
      const auto& row = spec.coefficients[static_cast<std::size_t>(cls)];
      double score = row[0];
      for (std::size_t j = 0; j < d; ++j) score += row[j + 1] * c.features[j];
      z[static_cast<std::size_t>(cls)] = score;
    }
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    std::vector<double> probs(static_cast<std::size_t>(k));
    for (int cls = 0; cls < k; ++cls) {
      probs[static_cast<std::size_t>(cls)] = std::exp(z[static_cast<std::size_t>(cls)] - zmax);
      sum += probs[static_cast<std::size_t>(cls)];
    }
    for (double& p : probs) p /= sum;

    // Inverse CDF on one uniform draw.
    const double u = uniform01_at(spec.seed, base + 2 * static_cast<std::uint64_t>(d));
    double cum = 0.0;
    int outcome = k - 1;
    for (int cls = 0; cls < k; ++cls) {
      cum += probs[static_cast<std::size_t>(cls)];
      if (u <= cum) {
        outcome = cls;
        break;
      }
    }
    c.outcome = outcome;

    out.dataset.ids.push_back(static_cast<std::int64_t>(i));
    out.dataset.cases.push_back(std::move(c));
    out.true_probs.ids.push_back(static_cast<std::int64_t>(i));
    out.true_probs.rows.push_back(ClassDistribution::from_probs(std::move(probs)));
  }
  return out;
}

std::vector<std::vector<std::size_t>> split_indices(std::size_t n,
                                                    std::span<const double> fractions,
                                                    std::uint64_t seed) {
  if (fractions.empty()) throw ValidationError("split needs at least one fraction");
  double sum = 0.0;
  for (double f : fractions) {
    if (!(f > 0.0)) throw ValidationError("split fractions must be positive");
    sum += f;
  }
  if (sum > 1.0 + 1e-12) {
    throw ValidationError("split fractions sum to " + std::to_string(sum) + ", more than 1");
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  // Fisher-Yates, one bounded draw per position from the back.
  std::uint64_t ctr = 0;
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded_at(seed, ctr++, i));
    std::swap(perm[i - 1], perm[j]);
  }

  std::vector<std::vector<std::size_t>> groups;
  groups.reserve(fractions.size());
  double cum = 0.0;
  std::size_t begin = 0;
  for (double f : fractions) {
    cum += f;
    auto boundary = static_cast<std::size_t>(std::floor(cum * static_cast<double>(n) + 0.5));
    boundary = std::min(boundary, n);
    std::vector<std::size_t> group(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                                   perm.begin() + static_cast<std::ptrdiff_t>(boundary));
    std::sort(group.begin(), group.end());
    groups.push_back(std::move(group));
    begin = boundary;
  }
  return groups;
}

std::vector<Dataset> split_dataset(const Dataset& data, std::span<const double> fractions,
                                   std::uint64_t seed) {
  const auto groups = split_indices(data.size(), fractions, seed);
  std::vector<Dataset> parts;
  parts.reserve(groups.size());
  for (const auto& group : groups) {
    Dataset part;
    part.num_classes = data.num_classes;
    part.num_features = data.num_features;
    part.ids.reserve(group.size());
    part.cases.reserve(group.size());
    for (std::size_t idx : group) {
      part.ids.push_back(data.ids[idx]);
      part.cases.push_back(data.cases[idx]);
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

}  // namespace ccp
