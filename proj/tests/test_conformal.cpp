#include "ccp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ccp/errors.hpp"
#include "ccp/rng.hpp"
#include "doctest.h"

using ccp::calibrate;
using ccp::CalibrationModel;
using ccp::ClassDistribution;
using ccp::conformity_scores;
using ccp::naive_set;
using ccp::oracle_threshold;
using ccp::predict_set;
using ccp::PredictionSet;
using ccp::score_labeled;
using ccp::ValidationError;

namespace {

ClassDistribution dist(std::vector<double> probs) {
  return ClassDistribution::from_probs(std::move(probs));
}

bool near(double a, double b, double tol = 1e-12) { return std::abs(a - b) <= tol; }

std::vector<double> random_probs(std::uint64_t seed, std::uint64_t trial, int k) {
  std::vector<double> raw(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (int j = 0; j < k; ++j) {
    raw[static_cast<std::size_t>(j)] =
        ccp::uniform01_at(seed, trial * 16 + static_cast<std::uint64_t>(j));
    sum += raw[static_cast<std::size_t>(j)];
  }
  for (double& p : raw) p /= sum;
  return raw;
}

// Independent calibration + set oracle: every candidate threshold in
// {s_i} U {0, 1} is tested against the k-of-n covering rule and the largest
// feasible one wins; the set is read straight off the scores.
PredictionSet brute_force_set(const ClassDistribution& d, const std::vector<double>& cal_scores,
                              double alpha) {
  const std::size_t n = cal_scores.size();
  std::size_t k = n + 2;
  for (std::size_t kk = 1; kk <= n + 1; ++kk) {
    if (static_cast<double>(kk) >= static_cast<double>(n + 1) * (1.0 - alpha) - 1e-9) {
      k = kk;
      break;
    }
  }
  REQUIRE(k <= n + 1);

  std::vector<double> candidates = cal_scores;
  candidates.push_back(0.0);
  candidates.push_back(1.0);
  double best = 0.0;
  for (double gamma : candidates) {
    std::size_t covered = 0;
    for (double s : cal_scores) {
      if (s >= gamma) ++covered;
    }
    if (covered >= k && gamma > best) best = gamma;
  }
  // k > n leaves only gamma = 0 feasible, the full-set regime.
  if (k > n) best = 0.0;

  const auto scores = conformity_scores(d);
  PredictionSet set;
  set.threshold_used = best;
  set.alpha = alpha;
  for (int y = 0; y < scores.num_classes(); ++y) {
    if (scores.score(y) >= best) set.members.push_back(y);
  }
  return set;
}

}  // namespace

TEST_CASE("conformity scores reproduce the worked three-class examples") {
  // (0.43, 0.35, 0.22): top class scores 1, the others tail sums.
  auto s = conformity_scores(dist({0.43, 0.35, 0.22}));
  CHECK(s.score(0) == 1.0);
  CHECK(near(s.score(1), 0.57));
  CHECK(near(s.score(2), 0.22));

  // (0.27, 0.54, 0.19): class 1 ranks first, s(x,0) = 0.27 + 0.19.
  s = conformity_scores(dist({0.27, 0.54, 0.19}));
  CHECK(s.score(1) == 1.0);
  CHECK(near(s.score(0), 0.46));
  CHECK(near(s.score(2), 0.19));

  // (0.34, 0.27, 0.38): ranked 2, 0, 1.
  s = conformity_scores(dist({0.34, 0.27, 0.38}));
  CHECK(near(s.score(0), 0.61));
  CHECK(near(s.score(1), 0.27));
  CHECK(s.score(2) == 1.0);
  CHECK(s.order == std::vector<int>{2, 0, 1});
}

TEST_CASE("point mass distribution keeps zero tail sums") {
  const auto s = conformity_scores(dist({1.0, 0.0, 0.0}));
  CHECK(s.score(0) == 1.0);
  CHECK(s.score(1) == 0.0);
  CHECK(s.score(2) == 0.0);
}

TEST_CASE("score_labeled picks the observed outcome's score") {
  CHECK(score_labeled(dist({0.58, 0.25, 0.17}), 0) == 1.0);
  CHECK(near(score_labeled(dist({0.49, 0.32, 0.18}), 1), 0.50));
  CHECK(near(score_labeled(dist({0.27, 0.54, 0.19}), 0), 0.46));
  CHECK_THROWS_AS(score_labeled(dist({0.5, 0.5}), 2), ValidationError);
  CHECK_THROWS_AS(score_labeled(dist({0.5, 0.5}), -1), ValidationError);
}

TEST_CASE("calibrate matches hand-enumerated order statistics") {
  const std::vector<double> scores = {1.0, 1.0, 0.6, 0.5};
  const CalibrationModel cal = calibrate(scores, 0.3);
  CHECK(cal.order_index == 4);  // ceil(5 * 0.7)
  CHECK(cal.n_cal == 4);
  CHECK(cal.gamma_hat == 0.5);  // non-conformities (0, 0, 0.4, 0.5), 4th smallest
  CHECK_FALSE(cal.degenerate);

  // Independent check: brute-force threshold sweep over the same scores.
  const auto set = brute_force_set(dist({0.43, 0.35, 0.22}), scores, 0.3);
  CHECK(set.threshold_used == cal.gamma_hat);
}

TEST_CASE("calibrate single order statistic") {
  const std::vector<double> one = {0.7};
  const CalibrationModel cal = calibrate(one, 0.6);
  CHECK(cal.order_index == 1);  // ceil(2 * 0.4)
  CHECK(cal.gamma_hat == 0.7);
}

TEST_CASE("tiny calibration sets fall into the full-set regime") {
  const std::vector<double> scores = {0.9, 0.4};
  const CalibrationModel cal = calibrate(scores, 0.01);  // k = ceil(3 * 0.99) = 3 > 2
  CHECK(cal.degenerate);
  CHECK(cal.gamma_hat == 0.0);
  const auto set = predict_set(dist({0.2, 0.5, 0.3}), cal);
  CHECK(set.members == std::vector<int>{0, 1, 2});
}

TEST_CASE("calibrate rejects bad input") {
  CHECK_THROWS_AS(calibrate(std::vector<double>{}, 0.3), ValidationError);
  CHECK_THROWS_AS(calibrate(std::vector<double>{0.5}, 0.0), ValidationError);
  CHECK_THROWS_AS(calibrate(std::vector<double>{0.5}, 1.0), ValidationError);
  CHECK_THROWS_AS(calibrate(std::vector<double>{1.5}, 0.3), ValidationError);
  CHECK_THROWS_AS(calibrate(std::vector<double>{-0.1}, 0.3), ValidationError);
}

TEST_CASE("calibrate is invariant to score order") {
  std::vector<double> scores;
  for (int i = 0; i < 500; ++i) {
    scores.push_back(ccp::uniform01_at(7, static_cast<std::uint64_t>(i)));
  }
  const CalibrationModel base = calibrate(scores, 0.17);
  for (int shuffle = 0; shuffle < 20; ++shuffle) {
    std::vector<double> mixed = scores;
    for (std::size_t i = mixed.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          ccp::bounded_at(900 + static_cast<std::uint64_t>(shuffle),
                          static_cast<std::uint64_t>(i), i));
      std::swap(mixed[i - 1], mixed[j]);
    }
    const CalibrationModel again = calibrate(mixed, 0.17);
    CHECK(again.gamma_hat == base.gamma_hat);
    CHECK(again.order_index == base.order_index);
  }
}

TEST_CASE("prediction sets reproduce the calibrated three-class examples") {
  CalibrationModel cal;
  cal.alpha = 0.3;
  cal.gamma_hat = 0.6;
  cal.n_cal = 100;
  cal.order_index = 71;

  auto set = predict_set(dist({0.34, 0.27, 0.38}), cal);
  CHECK(set.members == std::vector<int>{0, 2});

  cal.gamma_hat = 0.26;
  cal.alpha = 0.05;
  set = predict_set(dist({0.34, 0.27, 0.38}), cal);
  CHECK(set.members == std::vector<int>{0, 1, 2});

  cal.gamma_hat = 0.0;
  set = predict_set(dist({0.9, 0.05, 0.05}), cal);
  CHECK(set.members == std::vector<int>{0, 1, 2});
}

TEST_CASE("oracle threshold reproduces the worked example") {
  const auto result = oracle_threshold(dist({0.43, 0.35, 0.22}), 0.30);
  CHECK(result.threshold == 0.35);
  CHECK(result.set.members == std::vector<int>{0, 1});
  CHECK(near(result.mass, 0.78));

  // 1 - alpha = 0.42 is reachable by the singleton prefix.
  const auto single = oracle_threshold(dist({0.43, 0.35, 0.22}), 0.58);
  CHECK(single.threshold == 0.43);
  CHECK(single.set.members == std::vector<int>{0});

  // alpha -> 0 needs the full set; the threshold is the smallest probability.
  const auto full = oracle_threshold(dist({0.43, 0.35, 0.22}), 1e-9);
  CHECK(full.threshold == 0.22);
  CHECK(full.set.members == std::vector<int>{0, 1, 2});
}

TEST_CASE("oracle threshold agrees with prefix-mass enumeration") {
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(ccp::bounded_at(55, static_cast<std::uint64_t>(trial), 5));
    const auto d = dist(random_probs(56, static_cast<std::uint64_t>(trial), k));
    const double alpha = 0.02 + 0.96 * ccp::uniform01_at(57, static_cast<std::uint64_t>(trial));
    const auto result = oracle_threshold(d, alpha);

    // Enumerate prefixes of the ranked classes directly.
    const auto ranked = ccp::rank_distribution(d);
    double mass = 0.0;
    std::vector<int> expect;
    for (int j = 0; j < k; ++j) {
      mass += ranked.prob_at_rank(j);
      expect.push_back(ranked.order[static_cast<std::size_t>(j)]);
      if (mass >= 1.0 - alpha) break;
    }
    std::sort(expect.begin(), expect.end());
    CHECK(result.set.members == expect);
    CHECK(result.threshold >= 0.0);
    CHECK(result.mass >= 1.0 - alpha - 1e-12);
  }
}

TEST_CASE("naive sets walk the nested family") {
  const auto d = dist({0.43, 0.35, 0.22});
  CHECK(naive_set(d, 0.30).members == std::vector<int>{0, 1});
  CHECK(naive_set(d, 0.7).members == std::vector<int>{0});
  CHECK(naive_set(d, 0.0).members == std::vector<int>{0, 1, 2});
  CHECK_THROWS_AS(naive_set(d, 1.5), ValidationError);
  CHECK_THROWS_AS(naive_set(d, -0.1), ValidationError);
}

TEST_CASE("naive sets are nested in gamma") {
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + static_cast<int>(ccp::bounded_at(60, static_cast<std::uint64_t>(trial), 5));
    const auto d = dist(random_probs(61, static_cast<std::uint64_t>(trial), k));
    double g1 = ccp::uniform01_at(62, static_cast<std::uint64_t>(trial) * 2);
    double g2 = ccp::uniform01_at(62, static_cast<std::uint64_t>(trial) * 2 + 1);
    if (g1 > g2) std::swap(g1, g2);
    const auto wide = naive_set(d, g1);
    const auto narrow = naive_set(d, g2);
    CHECK(std::includes(wide.members.begin(), wide.members.end(), narrow.members.begin(),
                        narrow.members.end()));
    CHECK_FALSE(narrow.members.empty());
  }
}

TEST_CASE("conformal sets always include the argmax class") {
  for (int trial = 0; trial < 500; ++trial) {
    const auto d = dist(random_probs(70, static_cast<std::uint64_t>(trial), 3));
    std::vector<double> scores;
    for (int i = 0; i < 19; ++i) {
      scores.push_back(ccp::uniform01_at(71, static_cast<std::uint64_t>(trial * 32 + i)));
    }
    const double alpha = 0.02 + 0.96 * ccp::uniform01_at(72, static_cast<std::uint64_t>(trial));
    const auto set = predict_set(d, calibrate(scores, alpha));
    CHECK(set.contains(ccp::argmax_class(d)));
  }
}

TEST_CASE("sets shrink as alpha grows on a fixed calibration") {
  std::vector<double> scores;
  for (int i = 0; i < 47; ++i) {
    scores.push_back(ccp::uniform01_at(80, static_cast<std::uint64_t>(i)));
  }
  for (int trial = 0; trial < 500; ++trial) {
    const auto d = dist(random_probs(81, static_cast<std::uint64_t>(trial), 4));
    double a1 = 0.02 + 0.96 * ccp::uniform01_at(82, static_cast<std::uint64_t>(trial) * 2);
    double a2 = 0.02 + 0.96 * ccp::uniform01_at(82, static_cast<std::uint64_t>(trial) * 2 + 1);
    if (a1 > a2) std::swap(a1, a2);
    const auto low = predict_set(d, calibrate(scores, a1));   // smaller alpha, wider set
    const auto high = predict_set(d, calibrate(scores, a2));
    CHECK(std::includes(low.members.begin(), low.members.end(), high.members.begin(),
                        high.members.end()));
  }
}

TEST_CASE("in-sample coverage clears the order-statistic floor") {
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n =
        1 + static_cast<std::size_t>(ccp::bounded_at(90, static_cast<std::uint64_t>(trial), 200));
    std::vector<double> scores;
    scores.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = ccp::uniform01_at(91, static_cast<std::uint64_t>(trial) * 4096 + i);
      if (ccp::bounded_at(92, static_cast<std::uint64_t>(trial) * 4096 + i, 4) == 0) s = 1.0;
      scores.push_back(s);
    }
    const double alpha = 0.02 + 0.96 * ccp::uniform01_at(93, static_cast<std::uint64_t>(trial));
    const CalibrationModel cal = calibrate(scores, alpha);
    std::size_t covered = 0;
    for (double s : scores) {
      if (s >= cal.gamma_hat) ++covered;
    }
    if (cal.degenerate) {
      CHECK(covered == n);
    } else {
      CHECK(static_cast<double>(covered) / static_cast<double>(n) >=
            static_cast<double>(cal.order_index) / static_cast<double>(n) - 1e-15);
    }
  }
}

TEST_CASE("predict_set equals the brute-force threshold enumeration") {
  for (int trial = 0; trial < 50; ++trial) {
    const int k_choices[] = {2, 3, 5};
    const int k = k_choices[ccp::bounded_at(95, static_cast<std::uint64_t>(trial), 3)];
    const std::size_t n =
        1 + static_cast<std::size_t>(ccp::bounded_at(96, static_cast<std::uint64_t>(trial), 50));
    std::vector<double> scores;
    for (std::size_t i = 0; i < n; ++i) {
      double s = ccp::uniform01_at(97, static_cast<std::uint64_t>(trial) * 64 + i);
      if (ccp::bounded_at(98, static_cast<std::uint64_t>(trial) * 64 + i, 3) == 0) s = 1.0;
      scores.push_back(s);
    }
    const auto d = dist(random_probs(99, static_cast<std::uint64_t>(trial), k));
    const double alpha = 0.02 + 0.96 * ccp::uniform01_at(100, static_cast<std::uint64_t>(trial));

    const auto fast = predict_set(d, calibrate(scores, alpha));
    const auto slow = brute_force_set(d, scores, alpha);
    CHECK(fast.members == slow.members);
  }
}
