#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ccp/core.hpp"
#include "ccp/localized.hpp"
#include "ccp/metrics.hpp"
#include "ccp/model.hpp"

namespace ccp {

// All artifacts are plain text, written in binary mode with fixed formatting
// so a rerun with the same config reproduces every file byte for byte.

// %.17g: shortest-ish form that round-trips a double exactly.
std::string format_full(double v);
std::string format_fixed(double v, int digits);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Dataset CSV: header id,y,x_1,...,x_d
Dataset read_dataset_csv(const std::filesystem::path& path);
void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);

// Probability CSV: header id,p_0,...,p_{K-1} (reader: load_probability_table)
void write_probability_csv(const std::filesystem::path& path, const ProbabilityTable& table);

// Model file: "ccp-model v1 K=<K> d=<d>" then one coefficient row per class.
void save_model(const std::filesystem::path& path, const SoftmaxModel& model);
SoftmaxModel load_model(const std::filesystem::path& path);

// Calibration file: versioned "key: value" lines; nested records n, k and
// gamma, localized records them per forecast partition.
struct CalibrationFile {
  SetMethod method = SetMethod::nested;
  double alpha = 0.0;
  int num_classes = 0;
  CalibrationModel nested;
  LocalizedCalibration localized;
};

void save_calibration(const std::filesystem::path& path, const CalibrationModel& cal,
                      int num_classes);
void save_calibration(const std::filesystem::path& path, const LocalizedCalibration& loc);
CalibrationFile load_calibration(const std::filesystem::path& path);

// Predictions CSV: id,forecast,set,set_size,gamma_used with `set` a
// semicolon-joined ascending label list, e.g. 0;2
struct PredictionRow {
  std::int64_t id = 0;
  int forecast = 0;
  std::vector<int> members;
  double gamma_used = 0.0;
};

void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const PredictionRow> rows);
std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path);

// Report renderings. Rates display rounded (2 digits in confusion tables,
// 3 in set-size proportions); stored values stay full precision.
std::string render_confusion_text(const ConfusionTable& table, const LabelSpace& labels);
std::string render_confusion_csv(const ConfusionTable& table, const LabelSpace& labels);
std::string render_error_report_text(const ErrorReport& report, const LabelSpace& labels);
std::string render_error_report_csv(const ErrorReport& report, const LabelSpace& labels);
std::string render_set_size_text(const SetSizeReport& report, const LabelSpace& labels);
std::string render_set_size_csv(const SetSizeReport& report, const LabelSpace& labels);

}  // namespace ccp
