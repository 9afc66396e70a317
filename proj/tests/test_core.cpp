#include "ccp/core.hpp"

#include <algorithm>
#include <vector>

#include "ccp/errors.hpp"
#include "ccp/rng.hpp"
#include "doctest.h"

using ccp::ClassDistribution;
using ccp::rank_distribution;
using ccp::ValidationError;

namespace {

ClassDistribution dist(std::vector<double> probs) {
  return ClassDistribution::from_probs(std::move(probs));
}

}  // namespace

TEST_CASE("ranking follows descending probability") {
  auto r = rank_distribution(dist({0.43, 0.35, 0.22}));
  CHECK(r.order == std::vector<int>{0, 1, 2});

  r = rank_distribution(dist({0.27, 0.54, 0.19}));
  CHECK(r.order == std::vector<int>{1, 0, 2});
  CHECK(r.top_class() == 1);
}

TEST_CASE("exact ties break by ascending class index") {
  const double third = 1.0 / 3.0;
  auto r = rank_distribution(dist({third, third, third}));
  CHECK(r.order == std::vector<int>{0, 1, 2});

  r = rank_distribution(dist({0.3, 0.4, 0.3}));
  CHECK(r.order == std::vector<int>{1, 0, 2});
}

TEST_CASE("argmax_class matches the ranking's top class") {
  CHECK(ccp::argmax_class(dist({0.34, 0.27, 0.38})) == 2);
  CHECK(ccp::argmax_class(dist({0.5, 0.5})) == 0);
}

TEST_CASE("malformed distributions are rejected with the offending index") {
  CHECK_THROWS_WITH_AS(dist({-0.1, 0.6, 0.5}), doctest::Contains("index 0"), ValidationError);
  CHECK_THROWS_WITH_AS(dist({0.4, 1.2, -0.6}), doctest::Contains("index 1"), ValidationError);
  CHECK_THROWS_WITH_AS(dist({0.4, 0.4}), doctest::Contains("sum"), ValidationError);
  CHECK_THROWS_AS(dist({1.0}), ValidationError);
}

TEST_CASE("small deviations renormalize, large ones do not") {
  auto d = dist({0.5, 0.5 + 5e-7});
  double sum = 0.0;
  for (double p : d.probs()) sum += p;
  CHECK(std::abs(sum - 1.0) <= ccp::kProbSumTol);

  CHECK_THROWS_AS(dist({0.5, 0.5 + 5e-6}), ValidationError);
}

TEST_CASE("ranking is deterministic and yields a non-increasing sequence") {
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(ccp::bounded_at(101, static_cast<std::uint64_t>(trial), 6));
    std::vector<double> raw(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      raw[static_cast<std::size_t>(j)] =
          ccp::uniform01_at(202, static_cast<std::uint64_t>(trial * 16 + j));
      sum += raw[static_cast<std::size_t>(j)];
    }
    for (double& p : raw) p /= sum;
    const auto d = dist(raw);

    const auto first = rank_distribution(d);
    const auto second = rank_distribution(d);
    CHECK(first.order == second.order);
    for (int j = 0; j + 1 < k; ++j) {
      CHECK(first.prob_at_rank(j) >= first.prob_at_rank(j + 1));
    }
    // Every class appears exactly once.
    std::vector<int> sorted = first.order;
    std::sort(sorted.begin(), sorted.end());
    for (int j = 0; j < k; ++j) CHECK(sorted[static_cast<std::size_t>(j)] == j);
  }
}

TEST_CASE("relabeling classes permutes the ranking when probabilities are distinct") {
  const std::vector<double> probs = {0.5, 0.3, 0.2};
  const std::vector<int> sigma = {2, 0, 1};  // new index of old class
  std::vector<double> renamed(3);
  for (int old = 0; old < 3; ++old) {
    renamed[static_cast<std::size_t>(sigma[static_cast<std::size_t>(old)])] =
        probs[static_cast<std::size_t>(old)];
  }
  const auto base = rank_distribution(dist(probs));
  const auto mapped = rank_distribution(dist(renamed));
  for (int j = 0; j < 3; ++j) {
    CHECK(mapped.order[static_cast<std::size_t>(j)] ==
          sigma[static_cast<std::size_t>(base.order[static_cast<std::size_t>(j)])]);
  }
}

TEST_CASE("label space renders fallback names") {
  ccp::LabelSpace plain(3);
  CHECK(plain.name(0) == "class_0");
  ccp::LabelSpace named(3, {"NoArrest", "NonViolent", "Violent"});
  CHECK(named.name(2) == "Violent");
  CHECK_THROWS_AS(named.name(3), ValidationError);
  CHECK_THROWS_AS(ccp::LabelSpace(1), ValidationError);
}
