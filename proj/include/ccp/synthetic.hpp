#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ccp/core.hpp"
#include "ccp/model.hpp"

namespace ccp {

enum class FeatureDist { standard_normal, uniform_unit };  // uniform on [-1, 1]

// Fully specified synthetic population: features drawn i.i.d. per coordinate,
// outcomes drawn from softmax(coefficients * [1, x]) — so the true
// conditional distribution of every generated case is known exactly.
// I.i.d. sampling makes the cases exchangeable.
struct GeneratorSpec {
  int num_classes = 3;
  int num_features = 4;
  std::vector<std::vector<double>> coefficients;  // K x (d+1), column 0 = intercept
  FeatureDist feature_dist = FeatureDist::standard_normal;
  std::uint64_t seed = 0;
  std::size_t n = 0;

  // Deterministic reference coefficients: a fixed matrix for the (K=3, d=4)
  // shape used by the simulation defaults, a hash-derived pattern with
  // magnitudes in [0.3, 1] elsewhere.
  static GeneratorSpec canonical(int num_classes, int num_features, std::uint64_t seed,
                                 std::size_t n);
};

struct SyntheticData {
  Dataset dataset;
  ProbabilityTable true_probs;  // same ids and order as dataset
};

// Deterministic given spec.seed. Case i consumes the counter block
// [i*(2d+1), (i+1)*(2d+1)): feature j uses draws 2j and 2j+1 (a Box-Muller
// pair for normal coordinates, only the first draw for uniform ones) and the
// outcome inverse-CDF uses draw 2d.
SyntheticData generate(const GeneratorSpec& spec);

// Disjoint random index groups. Sizes follow cumulative-boundary rounding,
// floor(cum_fraction * n + 0.5), so a 0.5/0.5 split of an odd n gives the
// first part the extra case. Deterministic given the seed; indices within a
// group come back ascending.
std::vector<std::vector<std::size_t>> split_indices(std::size_t n,
                                                    std::span<const double> fractions,
                                                    std::uint64_t seed);

std::vector<Dataset> split_dataset(const Dataset& data, std::span<const double> fractions,
                                   std::uint64_t seed);

}  // namespace ccp
