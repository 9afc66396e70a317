#include "ccp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccp/errors.hpp"
#include "ccp/localized.hpp"
#include "ccp/rng.hpp"
#include "ccp/synthetic.hpp"

namespace ccp {

ReplicationScores run_replication(const SimulateOptions& opts, std::uint64_t rep_seed) {
  const std::size_t n_total = opts.n_train + opts.n_cal + opts.n_test;
  if (opts.n_train == 0 || opts.n_cal == 0 || opts.n_test == 0) {
    throw ValidationError("simulate needs positive n_train, n_cal and n_test");
  }

  const GeneratorSpec spec =
      GeneratorSpec::canonical(opts.num_classes, opts.num_features, rep_seed, n_total);
  const SyntheticData synth = generate(spec);

  const double n = static_cast<double>(n_total);
  const std::vector<double> fractions = {static_cast<double>(opts.n_train) / n,
                                         static_cast<double>(opts.n_cal) / n,
                                         static_cast<double>(opts.n_test) / n};
  const auto groups = split_indices(n_total, fractions, derive_seed(rep_seed, 1));
  if (groups[0].size() != opts.n_train || groups[1].size() != opts.n_cal ||
      groups[2].size() != opts.n_test) {
    throw NumericError("split sizes drifted from the requested simulate sizes");
  }

  const CostWeights weights =
      opts.weights.w.empty() ? CostWeights::ones(opts.num_classes) : opts.weights;

  SoftmaxModel model = SoftmaxModel::from_coefficients(std::vector<std::vector<double>>(
      static_cast<std::size_t>(opts.num_classes),
      std::vector<double>(static_cast<std::size_t>(opts.num_features) + 1, 0.0)));
  if (!opts.true_probs) {
    Dataset train;
    train.num_classes = opts.num_classes;
    train.num_features = static_cast<std::size_t>(opts.num_features);
    for (std::size_t idx : groups[0]) {
      train.ids.push_back(synth.dataset.ids[idx]);
      train.cases.push_back(synth.dataset.cases[idx]);
    }
    model = train_softmax(train, weights, opts.optimizer);
  }

  // Training-split majority class, the stand-in for forecasting from the
  // marginal outcome distribution.
  std::vector<std::size_t> train_counts(static_cast<std::size_t>(opts.num_classes), 0);
  for (std::size_t idx : groups[0]) {
    train_counts[static_cast<std::size_t>(synth.dataset.cases[idx].outcome)] += 1;
  }
  int majority = 0;
  for (int c = 1; c < opts.num_classes; ++c) {
    if (train_counts[static_cast<std::size_t>(c)] > train_counts[static_cast<std::size_t>(majority)]) {
      majority = c;
    }
  }

  auto dist_for = [&](std::size_t idx) -> ClassDistribution {
    if (opts.true_probs) return synth.true_probs.rows[idx];
    return model.predict_proba(synth.dataset.cases[idx].features);
  };

  ReplicationScores rep;
  rep.cal_scores.reserve(opts.n_cal);
  rep.cal_cases.reserve(opts.n_cal);
  for (std::size_t idx : groups[1]) {
    LabeledDistribution lc{dist_for(idx), synth.dataset.cases[idx].outcome};
    rep.cal_scores.push_back(score_labeled(lc.dist, lc.outcome));
    rep.cal_cases.push_back(std::move(lc));
  }

  rep.test_scores.reserve(opts.n_test);
  rep.test_dists.reserve(opts.n_test);
  rep.test_forecasts.reserve(opts.n_test);
  rep.test_outcomes.reserve(opts.n_test);
  std::size_t top1_wrong = 0;
  std::size_t baseline_wrong = 0;
  for (std::size_t idx : groups[2]) {
    ClassDistribution dist = dist_for(idx);
    ConformityScores scores = conformity_scores(dist);
    const int outcome = synth.dataset.cases[idx].outcome;
    const int forecast = scores.order[0];
    if (forecast != outcome) ++top1_wrong;
    if (majority != outcome) ++baseline_wrong;
    rep.test_forecasts.push_back(forecast);
    rep.test_outcomes.push_back(outcome);
    rep.test_scores.push_back(std::move(scores));
    rep.test_dists.push_back(std::move(dist));
  }
  rep.model_top1_error = static_cast<double>(top1_wrong) / static_cast<double>(opts.n_test);
  rep.baseline_error = static_cast<double>(baseline_wrong) / static_cast<double>(opts.n_test);
  return rep;
}

namespace {

MethodEval finish_eval(const ReplicationScores& rep, int num_classes,
                       const std::vector<double>& per_case_gamma, std::vector<double> gammas) {
  MethodEval eval;
  eval.gammas = std::move(gammas);
  eval.partition_coverage.assign(static_cast<std::size_t>(num_classes), 0.0);
  eval.partition_counts.assign(static_cast<std::size_t>(num_classes), 0);

  const std::size_t n = rep.test_scores.size();
  std::size_t covered_total = 0;
  std::size_t size_total = 0;
  std::vector<std::size_t> covered(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const ConformityScores& scores = rep.test_scores[i];
    const double gamma = per_case_gamma[i];
    const bool hit = scores.score(rep.test_outcomes[i]) >= gamma;
    std::size_t set_size = 0;
    for (int c = 0; c < num_classes; ++c) {
      if (scores.score(c) >= gamma) ++set_size;
    }
    const auto f = static_cast<std::size_t>(rep.test_forecasts[i]);
    eval.partition_counts[f] += 1;
    if (hit) {
      ++covered_total;
      covered[f] += 1;
    }
    size_total += set_size;
  }
  eval.coverage = static_cast<double>(covered_total) / static_cast<double>(n);
  eval.mean_set_size = static_cast<double>(size_total) / static_cast<double>(n);
  for (int c = 0; c < num_classes; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    eval.partition_coverage[idx] =
        eval.partition_counts[idx] == 0
            ? std::numeric_limits<double>::quiet_NaN()
            : static_cast<double>(covered[idx]) / static_cast<double>(eval.partition_counts[idx]);
  }
  return eval;
}

}  // namespace

MethodEval evaluate_nested(const ReplicationScores& rep, double alpha) {
  if (rep.test_scores.empty()) throw ValidationError("replication has no test cases");
  const int k = rep.test_scores.front().num_classes();
  const CalibrationModel cal = calibrate(rep.cal_scores, alpha);
  std::vector<double> per_case(rep.test_scores.size(), cal.gamma_hat);
  return finish_eval(rep, k, per_case, {cal.gamma_hat});
}

MethodEval evaluate_localized(const ReplicationScores& rep, double alpha) {
  if (rep.test_scores.empty()) throw ValidationError("replication has no test cases");
  const int k = rep.test_scores.front().num_classes();
  const LocalizedCalibration loc = localized_calibrate(rep.cal_cases, alpha);
  std::vector<double> per_case(rep.test_scores.size());
  std::vector<double> gammas;
  gammas.reserve(static_cast<std::size_t>(k));
  for (const auto& cal : loc.per_forecast) gammas.push_back(cal.gamma_hat);
  for (std::size_t i = 0; i < rep.test_scores.size(); ++i) {
    per_case[i] = gammas[static_cast<std::size_t>(rep.test_forecasts[i])];
  }
  return finish_eval(rep, k, per_case, std::move(gammas));
}

MethodEval evaluate_oracle(const ReplicationScores& rep, double alpha) {
  if (rep.test_dists.empty()) throw ValidationError("replication has no test cases");
  const int k = rep.test_dists.front().num_classes();
  MethodEval eval;
  eval.gammas = {};
  eval.partition_coverage.assign(static_cast<std::size_t>(k), 0.0);
  eval.partition_counts.assign(static_cast<std::size_t>(k), 0);

  const std::size_t n = rep.test_dists.size();
  std::size_t covered_total = 0;
  std::size_t size_total = 0;
  std::vector<std::size_t> covered(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const OracleResult oracle = oracle_threshold(rep.test_dists[i], alpha);
    const bool hit = oracle.set.contains(rep.test_outcomes[i]);
    const auto f = static_cast<std::size_t>(rep.test_forecasts[i]);
    eval.partition_counts[f] += 1;
    if (hit) {
      ++covered_total;
      covered[f] += 1;
    }
    size_total += oracle.set.size();
  }
  eval.coverage = static_cast<double>(covered_total) / static_cast<double>(n);
  eval.mean_set_size = static_cast<double>(size_total) / static_cast<double>(n);
  for (int c = 0; c < k; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    eval.partition_coverage[idx] =
        eval.partition_counts[idx] == 0
            ? std::numeric_limits<double>::quiet_NaN()
            : static_cast<double>(covered[idx]) / static_cast<double>(eval.partition_counts[idx]);
  }
  return eval;
}

}  // namespace ccp
