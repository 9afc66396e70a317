#include "ccp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>
#include <unordered_map>

#include "CLI11.hpp"
#include "ccp/errors.hpp"
#include "ccp/io.hpp"
#include "ccp/localized.hpp"
#include "ccp/metrics.hpp"
#include "ccp/rng.hpp"
#include "ccp/simulate.hpp"
#include "ccp/synthetic.hpp"

namespace ccp {

namespace {

std::string path_or_dash(const std::filesystem::path& p) {
  return p.empty() ? std::string("-") : p.string();
}

std::string weights_to_string(const std::vector<double>& w) {
  if (w.empty()) return "default";
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i > 0) out += ",";
    out += format_full(w[i]);
  }
  return out;
}

CostWeights weights_for(const RunConfig& config, int num_classes) {
  if (config.weights.empty()) return CostWeights::ones(num_classes);
  if (static_cast<int>(config.weights.size()) != num_classes) {
    throw ValidationError("weight vector has " + std::to_string(config.weights.size()) +
                          " entries, data has " + std::to_string(num_classes) + " classes");
  }
  return CostWeights{config.weights};
}

void require_input(const std::filesystem::path& path, const std::string& flag) {
  if (path.empty()) throw ValidationError("missing required input " + flag);
  if (!std::filesystem::exists(path)) {
    throw ValidationError(flag + " path does not exist: " + path.string());
  }
}

void require_out(const RunConfig& config) {
  if (config.out.empty()) throw ValidationError("missing required output directory --out");
  std::filesystem::create_directories(config.out);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must be in (0, 1), got " + format_full(alpha));
  }
}

// Probability table from --probs (external CSV) or --model + --data.
ProbabilityTable resolve_table(const RunConfig& config, const Dataset* dataset) {
  if (!config.probs.empty()) {
    require_input(config.probs, "--probs");
    return load_probability_table(config.probs, 0);
  }
  if (!config.model.empty()) {
    require_input(config.model, "--model");
    if (dataset == nullptr) {
      throw ValidationError("--model needs --data to supply the feature rows");
    }
    return predict_table(load_model(config.model), *dataset);
  }
  throw ValidationError("need either --probs or --model to obtain class probabilities");
}

}  // namespace

std::string RunConfig::echo() const {
  std::string out;
  out += "alpha=" + format_full(alpha);
  out += " method=" + method;
  out += " data=" + path_or_dash(data);
  out += " probs=" + path_or_dash(probs);
  out += " calibration=" + path_or_dash(calibration);
  out += " model=" + path_or_dash(model);
  out += " predictions=" + path_or_dash(predictions);
  out += " out=" + path_or_dash(this->out);
  out += " weights=" + weights_to_string(weights);
  out += " seed=" + std::to_string(seed);
  out += " replications=" + std::to_string(replications);
  out += " classes=" + std::to_string(sim_classes);
  out += " features=" + std::to_string(sim_features);
  out += " n_train=" + std::to_string(n_train);
  out += " n_cal=" + std::to_string(n_cal);
  out += " n_test=" + std::to_string(n_test);
  out += " true_probs=" + std::string(true_probs ? "1" : "0");
  out += " grad_tol=" + format_full(optimizer.grad_tol);
  out += " max_iterations=" + std::to_string(optimizer.max_iterations);
  return out;
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> weights;
  std::string cell;
  auto flush = [&]() {
    if (cell.empty()) throw ValidationError("weights list has an empty entry: '" + text + "'");
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || !std::isfinite(v)) {
      throw ValidationError("cannot parse weight '" + cell + "'");
    }
    weights.push_back(v);
    cell.clear();
  };
  for (char ch : text) {
    if (ch == ',') {
      flush();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cell.push_back(ch);
    }
  }
  flush();
  return weights;
}

void apply_config_file(RunConfig& config, const std::filesystem::path& file) {
  require_input(file, "--config");
  const std::string text = read_text_file(file);
  std::size_t line_no = 0;
  std::string line;
  auto handle = [&](const std::string& raw) {
    ++line_no;
    std::string stripped = raw;
    if (auto hash = stripped.find('#'); hash != std::string::npos) stripped.resize(hash);
    while (!stripped.empty() && (stripped.back() == ' ' || stripped.back() == '\t' ||
                                 stripped.back() == '\r')) {
      stripped.pop_back();
    }
    std::size_t begin = stripped.find_first_not_of(" \t");
    if (begin == std::string::npos) return;
    stripped = stripped.substr(begin);
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(file.string() + " line " + std::to_string(line_no) +
                            ": expected key=value");
    }
    std::string key = stripped.substr(0, eq);
    std::string value = stripped.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());

    const std::string where = file.string() + " line " + std::to_string(line_no);
    auto as_double = [&](const std::string& v) {
      char* end = nullptr;
      const double parsed = std::strtod(v.c_str(), &end);
      if (end != v.c_str() + v.size() || v.empty()) {
        throw ValidationError(where + ": cannot parse number '" + v + "'");
      }
      return parsed;
    };
    auto as_u64 = [&](const std::string& v) {
      return static_cast<std::uint64_t>(std::stoull(v));
    };

    if (key == "alpha") config.alpha = as_double(value);
    else if (key == "method") config.method = value;
    else if (key == "data") config.data = value;
    else if (key == "probs") config.probs = value;
    else if (key == "calibration") config.calibration = value;
    else if (key == "model") config.model = value;
    else if (key == "predictions") config.predictions = value;
    else if (key == "out") config.out = value;
    else if (key == "weights") config.weights = parse_weights(value);
    else if (key == "seed") config.seed = as_u64(value);
    else if (key == "replications") config.replications = static_cast<int>(as_u64(value));
    else if (key == "classes") config.sim_classes = static_cast<int>(as_u64(value));
    else if (key == "features") config.sim_features = static_cast<int>(as_u64(value));
    else if (key == "n_train") config.n_train = static_cast<std::size_t>(as_u64(value));
    else if (key == "n_cal") config.n_cal = static_cast<std::size_t>(as_u64(value));
    else if (key == "n_test") config.n_test = static_cast<std::size_t>(as_u64(value));
    else if (key == "true_probs") config.true_probs = value == "1" || value == "true";
    else if (key == "grad_tol") config.optimizer.grad_tol = as_double(value);
    else if (key == "max_iterations") config.optimizer.max_iterations = static_cast<int>(as_u64(value));
    else throw ValidationError(where + ": unknown key '" + key + "'");
  };
  std::string current;
  for (char ch : text) {
    if (ch == '\n') {
      handle(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) handle(current);
}

int cmd_train(const RunConfig& config) {
  require_input(config.data, "--data");
  require_out(config);
  const Dataset data = read_dataset_csv(config.data);
  const CostWeights weights = weights_for(config, data.num_classes);
  const SoftmaxModel model = train_softmax(data, weights, config.optimizer);
  save_model(config.out / "model.txt", model);

  // Held-in diagnostics: confusion table and empirical cost ratios.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(data.size());
  for (const LabeledCase& c : data.cases) {
    pairs.emplace_back(c.outcome, argmax_class(model.predict_proba(c.features)));
  }
  const ConfusionTable table = build_confusion(pairs, data.num_classes);
  const ErrorReport errors = make_error_report(table);
  const LabelSpace labels(data.num_classes);

  const TrainingInfo& info = model.info();
  std::string report = "ccp train report v1\n";
  report += "config: " + config.echo() + "\n";
  report += "training: iterations=" + std::to_string(info.iterations) +
            " converged=" + (info.converged ? std::string("1") : std::string("0")) +
            " initial_loss=" + format_full(info.initial_loss) +
            " final_loss=" + format_full(info.final_loss) +
            " final_grad_norm=" + format_full(info.final_grad_norm) + "\n";
  report += "model: K=" + std::to_string(model.num_classes()) +
            " d=" + std::to_string(model.num_features()) + " file=model.txt\n";
  report += "\nheld-in diagnostics\n";
  report += render_confusion_text(table, labels);
  report += render_error_report_text(errors, labels);
  write_text_file(config.out / "train_report.txt", report);
  return 0;
}

int cmd_calibrate(const RunConfig& config) {
  check_alpha(config.alpha);
  require_input(config.data, "--data");
  require_out(config);
  const Dataset data = read_dataset_csv(config.data);
  const ProbabilityTable table = resolve_table(config, &data);
  const std::vector<LabeledDistribution> cases = join_outcomes(table, data);

  const SetMethod method = set_method_from_string(config.method);
  if (method == SetMethod::nested) {
    const CalibrationModel cal = calibrate(labeled_scores(cases), config.alpha);
    save_calibration(config.out / "calibration.txt", cal, table.num_classes);
  } else if (method == SetMethod::localized) {
    const LocalizedCalibration loc = localized_calibrate(cases, config.alpha);
    save_calibration(config.out / "calibration.txt", loc);
  } else {
    throw ValidationError("calibrate supports method nested or localized, got '" +
                          config.method + "'");
  }
  return 0;
}

int cmd_predict(const RunConfig& config) {
  require_out(config);
  Dataset data;
  const Dataset* data_ptr = nullptr;
  if (!config.data.empty()) {
    require_input(config.data, "--data");
    data = read_dataset_csv(config.data);
    data_ptr = &data;
  }
  const ProbabilityTable table = resolve_table(config, data_ptr);

  const SetMethod flag_method = set_method_from_string(config.method);
  const bool per_case_threshold =
      flag_method == SetMethod::naive || flag_method == SetMethod::oracle;
  CalibrationFile cal_file;
  if (!per_case_threshold) {
    if (config.calibration.empty()) {
      throw ValidationError("predict needs --calibration for nested/localized sets");
    }
    require_input(config.calibration, "--calibration");
    cal_file = load_calibration(config.calibration);
    if (cal_file.num_classes != table.num_classes) {
      throw ValidationError("calibration file has K=" + std::to_string(cal_file.num_classes) +
                            " but probability rows have K=" +
                            std::to_string(table.num_classes));
    }
  } else {
    check_alpha(config.alpha);
  }

  std::vector<PredictionRow> rows;
  rows.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const ClassDistribution& dist = table.rows[i];
    const ConformityScores scores = conformity_scores(dist);
    const int forecast = scores.order[0];
    PredictionSet set;
    if (flag_method == SetMethod::naive) {
      set = set_at_threshold(scores, config.alpha, std::numeric_limits<double>::quiet_NaN(),
                             SetMethod::naive);
    } else if (flag_method == SetMethod::oracle) {
      set = oracle_threshold(dist, config.alpha).set;
    } else if (cal_file.method == SetMethod::nested) {
      set = set_at_threshold(scores, cal_file.nested.gamma_hat, cal_file.alpha,
                             SetMethod::nested);
    } else {
      const CalibrationModel& part =
          cal_file.localized.per_forecast[static_cast<std::size_t>(forecast)];
      set = set_at_threshold(scores, part.gamma_hat, cal_file.alpha, SetMethod::localized);
    }
    rows.push_back(PredictionRow{table.ids[i], forecast, set.members, set.threshold_used});
  }
  write_predictions_csv(config.out / "predictions.csv", rows);
  return 0;
}

int cmd_evaluate(const RunConfig& config) {
  require_input(config.predictions, "--predictions");
  require_input(config.data, "--data");
  require_out(config);
  const std::vector<PredictionRow> rows = read_predictions_csv(config.predictions);
  const Dataset data = read_dataset_csv(config.data);
  if (rows.size() != data.size()) {
    throw ValidationError("id mismatch: predictions have " + std::to_string(rows.size()) +
                          " rows, dataset has " + std::to_string(data.size()));
  }
  std::unordered_map<std::int64_t, int> outcome_by_id;
  outcome_by_id.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) outcome_by_id.emplace(data.ids[i], data.cases[i].outcome);

  int num_classes = data.num_classes;
  for (const auto& row : rows) {
    num_classes = std::max(num_classes, row.forecast + 1);
    for (int m : row.members) num_classes = std::max(num_classes, m + 1);
  }

  std::vector<std::pair<int, int>> pairs;
  std::vector<PredictionSet> sets;
  std::vector<int> actuals;
  std::vector<ForecastSetSize> sizes;
  pairs.reserve(rows.size());
  sets.reserve(rows.size());
  actuals.reserve(rows.size());
  sizes.reserve(rows.size());
  for (const auto& row : rows) {
    const auto it = outcome_by_id.find(row.id);
    if (it == outcome_by_id.end()) {
      throw ValidationError("id mismatch: id " + std::to_string(row.id) +
                            " present in predictions but not in dataset");
    }
    pairs.emplace_back(it->second, row.forecast);
    PredictionSet set;
    set.members = row.members;
    set.threshold_used = row.gamma_used;
    sets.push_back(std::move(set));
    actuals.push_back(it->second);
    sizes.push_back(ForecastSetSize{row.forecast, row.members.size()});
  }

  const ConfusionTable table = build_confusion(pairs, num_classes);
  const ErrorReport errors = make_error_report(table);
  const double coverage = empirical_coverage(sets, actuals);
  const SetSizeReport size_report = set_size_report(sizes, num_classes);
  const LabelSpace labels(num_classes);

  std::string report = "ccp evaluate report v1\n";
  report += "config: " + config.echo() + "\n";
  report += "cases: " + std::to_string(rows.size()) + "\n";
  report += "empirical_coverage: " + format_full(coverage) + "\n\n";
  report += render_confusion_text(table, labels);
  report += render_error_report_text(errors, labels);
  report += render_set_size_text(size_report, labels);
  write_text_file(config.out / "evaluate_report.txt", report);
  write_text_file(config.out / "confusion.csv", render_confusion_csv(table, labels));
  write_text_file(config.out / "errors.csv", render_error_report_csv(errors, labels));
  write_text_file(config.out / "set_sizes.csv", render_set_size_csv(size_report, labels));
  return 0;
}

namespace {

struct MethodAggregate {
  std::string name;
  std::vector<MethodEval> evals;
};

std::string render_method_summary(const MethodAggregate& agg, double alpha,
                                  std::size_t n_test, int num_classes,
                                  const LabelSpace& labels) {
  const auto reps = static_cast<double>(agg.evals.size());
  double cov_sum = 0.0;
  double cov_min = std::numeric_limits<double>::infinity();
  double size_sum = 0.0;
  for (const auto& eval : agg.evals) {
    cov_sum += eval.coverage;
    cov_min = std::min(cov_min, eval.coverage);
    size_sum += eval.mean_set_size;
  }
  const double mean_cov = cov_sum / reps;
  const double se_rep = std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n_test));
  const double se_mean = se_rep / std::sqrt(reps);

  std::string out = "method " + agg.name + ": mean_coverage=" + format_full(mean_cov) +
                    " min_coverage=" + format_full(cov_min) +
                    " mean_set_size=" + format_full(size_sum / reps) +
                    " se_per_rep=" + format_full(se_rep) + " se_mean=" + format_full(se_mean) +
                    "\n";
  for (int c = 0; c < num_classes; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    double part_sum = 0.0;
    double part_min = std::numeric_limits<double>::infinity();
    double n_sum = 0.0;
    std::size_t present = 0;
    for (const auto& eval : agg.evals) {
      if (std::isnan(eval.partition_coverage[idx])) continue;
      ++present;
      part_sum += eval.partition_coverage[idx];
      part_min = std::min(part_min, eval.partition_coverage[idx]);
      n_sum += static_cast<double>(eval.partition_counts[idx]);
    }
    out += "  partition " + labels.name(c) + ": ";
    if (present == 0) {
      out += "empty\n";
      continue;
    }
    out += "mean_coverage=" + format_full(part_sum / static_cast<double>(present)) +
           " min_coverage=" + format_full(part_min) +
           " mean_n=" + format_full(n_sum / static_cast<double>(present)) + "\n";
  }
  return out;
}

}  // namespace

int cmd_simulate(const RunConfig& config) {
  check_alpha(config.alpha);
  require_out(config);
  if (config.replications < 1) {
    throw ValidationError("replications must be >= 1, got " +
                          std::to_string(config.replications));
  }

  SimulateOptions opts;
  opts.num_classes = config.sim_classes;
  opts.num_features = config.sim_features;
  opts.n_train = config.n_train;
  opts.n_cal = config.n_cal;
  opts.n_test = config.n_test;
  opts.true_probs = config.true_probs;
  opts.optimizer = config.optimizer;
  if (!config.weights.empty()) opts.weights = weights_for(config, config.sim_classes);

  MethodAggregate nested{"nested", {}};
  MethodAggregate localized{"localized", {}};
  MethodAggregate oracle{"oracle", {}};
  double top1_sum = 0.0;
  double baseline_sum = 0.0;

  const int k = config.sim_classes;
  const LabelSpace labels(k);
  std::string csv = "rep,method,coverage,mean_set_size,gammas";
  for (int c = 0; c < k; ++c) {
    csv += ",coverage_" + labels.name(c) + ",n_" + labels.name(c);
  }
  csv += "\n";
  auto csv_row = [&](int rep, const std::string& name, const MethodEval& eval) {
    csv += std::to_string(rep) + "," + name + "," + format_full(eval.coverage) + "," +
           format_full(eval.mean_set_size) + ",";
    for (std::size_t i = 0; i < eval.gammas.size(); ++i) {
      if (i > 0) csv += ";";
      csv += format_full(eval.gammas[i]);
    }
    for (int c = 0; c < k; ++c) {
      const auto idx = static_cast<std::size_t>(c);
      csv += ",";
      csv += std::isnan(eval.partition_coverage[idx]) ? "na"
                                                      : format_full(eval.partition_coverage[idx]);
      csv += "," + std::to_string(eval.partition_counts[idx]);
    }
    csv += "\n";
  };

  for (int rep = 0; rep < config.replications; ++rep) {
    ReplicationScores scores;
    try {
      scores = run_replication(opts, derive_seed(config.seed, static_cast<std::uint64_t>(rep)));
    } catch (const ValidationError& e) {
      throw NumericError("replication " + std::to_string(rep) + " failed: " + e.what());
    }
    top1_sum += scores.model_top1_error;
    baseline_sum += scores.baseline_error;

    MethodEval n_eval = evaluate_nested(scores, config.alpha);
    MethodEval l_eval = evaluate_localized(scores, config.alpha);
    csv_row(rep, "nested", n_eval);
    csv_row(rep, "localized", l_eval);
    nested.evals.push_back(std::move(n_eval));
    localized.evals.push_back(std::move(l_eval));
    if (config.true_probs) {
      MethodEval o_eval = evaluate_oracle(scores, config.alpha);
      csv_row(rep, "oracle", o_eval);
      oracle.evals.push_back(std::move(o_eval));
    }
  }

  const auto reps = static_cast<double>(config.replications);
  std::string report = "ccp simulate report v1\n";
  report += "config: " + config.echo() + "\n";
  report += "rng: " + std::string(kRngAlgorithmId) + "\n";
  report += "replications: " + std::to_string(config.replications) + "\n";
  report += render_method_summary(nested, config.alpha, config.n_test, k, labels);
  report += render_method_summary(localized, config.alpha, config.n_test, k, labels);
  if (config.true_probs) {
    report += render_method_summary(oracle, config.alpha, config.n_test, k, labels);
  }
  report += "model: mean_top1_error=" + format_full(top1_sum / reps) +
            " baseline_majority_error=" + format_full(baseline_sum / reps) + "\n";
  write_text_file(config.out / "simulate_report.txt", report);
  write_text_file(config.out / "replications.csv", csv);
  return 0;
}

namespace {

void add_common_options(CLI::App* sub, RunConfig& config, std::string& weights_str,
                        std::string& config_path) {
  sub->add_option("--alpha", config.alpha,
                  "miscoverage level in (0,1); for --method naive this is the raw gamma");
  sub->add_option("--method", config.method, "nested|localized|naive|oracle");
  sub->add_option("--weights", weights_str, "per-class cost weights w0,w1,...");
  sub->add_option("--seed", config.seed, "master seed (64-bit)");
  sub->add_option("--data", config.data, "dataset CSV: id,y,x_1,...,x_d");
  sub->add_option("--probs", config.probs, "probability CSV: id,p_0,...,p_{K-1}");
  sub->add_option("--calibration", config.calibration, "calibration file from `calibrate`");
  sub->add_option("--model", config.model, "model file from `train`");
  sub->add_option("--predictions", config.predictions, "predictions CSV from `predict`");
  sub->add_option("--out", config.out, "output directory");
  sub->add_option("--replications", config.replications, "simulate replications");
  sub->add_option("--config", config_path,
                  "flat key=value config file; flags override file values");
  sub->add_option("--grad-tol", config.optimizer.grad_tol, "optimizer gradient tolerance");
  sub->add_option("--max-iterations", config.optimizer.max_iterations,
                  "optimizer iteration cap");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  RunConfig config;
  try {
    // Config file loads before flag parsing so that flags override it.
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) {
        apply_config_file(config, argv[i + 1]);
      } else if (arg.rfind("--config=", 0) == 0) {
        apply_config_file(config, arg.substr(9));
      }
    }

    CLI::App app{"calibrated prediction sets for multi-class classifiers"};
    app.require_subcommand(1);
    std::string weights_str;
    std::string config_path;

    CLI::App* train = app.add_subcommand("train", "fit the cost-weighted softmax model");
    CLI::App* calibrate_cmd =
        app.add_subcommand("calibrate", "fit nested or localized conformal thresholds");
    CLI::App* predict = app.add_subcommand("predict", "emit prediction sets per case");
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "confusion/coverage/set-size report for predictions");
    CLI::App* simulate =
        app.add_subcommand("simulate", "synthetic coverage study over replications");
    for (CLI::App* sub : {train, calibrate_cmd, predict, evaluate, simulate}) {
      add_common_options(sub, config, weights_str, config_path);
    }
    simulate->add_option("--classes", config.sim_classes, "synthetic class count K");
    simulate->add_option("--features", config.sim_features, "synthetic feature count d");
    simulate->add_option("--n-train", config.n_train, "training split size");
    simulate->add_option("--n-cal", config.n_cal, "calibration split size");
    simulate->add_option("--n-test", config.n_test, "test split size");
    simulate->add_flag("--true-probs", config.true_probs,
                       "feed the generator's true conditionals through instead of training");

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
    }
    if (!weights_str.empty()) config.weights = parse_weights(weights_str);

    if (train->parsed()) return cmd_train(config);
    if (calibrate_cmd->parsed()) return cmd_calibrate(config);
    if (predict->parsed()) return cmd_predict(config);
    if (evaluate->parsed()) return cmd_evaluate(config);
    if (simulate->parsed()) return cmd_simulate(config);
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace ccp
