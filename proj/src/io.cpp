#include "ccp/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "ccp/errors.hpp"

namespace ccp {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "na";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << content;
  if (!out) throw ValidationError("write failed for " + path.string());
}

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string current;
  for (char ch : text) {
    if (ch == '\n') {
      if (!current.empty() && current.back() == '\r') current.pop_back();
      lines.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) {
    if (current.back() == '\r') current.pop_back();
    lines.push_back(current);
  }
  return lines;
}

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> cells;
  std::string cell;
  for (char ch : line) {
    if (ch == sep) {
      cells.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  cells.push_back(cell);
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& cell, const std::string& where) {
  const std::string t = trim(cell);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || t.empty()) {
    throw ValidationError("cannot parse number '" + cell + "' in " + where);
  }
  return value;
}

std::int64_t parse_int(const std::string& cell, const std::string& where) {
  const std::string t = trim(cell);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ValidationError("cannot parse integer '" + cell + "' in " + where);
  }
  return value;
}

}  // namespace

Dataset read_dataset_csv(const std::filesystem::path& path) {
  const auto lines = split_lines(read_text_file(path));
  if (lines.empty()) throw ValidationError(path.string() + " is empty, expected a header row");
  const auto header = split_on(lines[0], ',');
  if (header.size() < 3 || trim(header[0]) != "id" || trim(header[1]) != "y") {
    throw ValidationError(path.string() +
                          ": header must be id,y,x_1,...,x_d (missing column 'id' or 'y')");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    const std::string expected = "x_" + std::to_string(j + 1);
    if (trim(header[j + 2]) != expected) {
      throw ValidationError(path.string() + ": header column " + std::to_string(j + 3) +
                            " is '" + header[j + 2] + "', expected '" + expected + "'");
    }
  }

  Dataset data;
  data.num_features = d;
  std::unordered_set<std::int64_t> seen;
  int max_class = -1;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;
    const std::string where = path.string() + " row " + std::to_string(row);
    const auto cells = split_on(lines[row], ',');
    if (cells.size() != header.size()) {
      throw ValidationError(where + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
    }
    const std::int64_t id = parse_int(cells[0], where);
    if (!seen.insert(id).second) {
      throw ValidationError(where + ": duplicate id " + std::to_string(id));
    }
    LabeledCase c;
    const std::int64_t y = parse_int(cells[1], where);
    if (y < 0) throw ValidationError(where + ": outcome must be a non-negative class index");
    c.outcome = static_cast<int>(y);
    max_class = std::max(max_class, c.outcome);
    c.features.reserve(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double x = parse_double(cells[j + 2], where);
      if (!std::isfinite(x)) throw ValidationError(where + ": feature x_" + std::to_string(j + 1) +
                                                   " is not finite");
      c.features.push_back(x);
    }
    data.ids.push_back(id);
    data.cases.push_back(std::move(c));
  }
  data.num_classes = std::max(max_class + 1, 2);
  return data;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::string out = "id,y";
  for (std::size_t j = 1; j <= data.num_features; ++j) out += ",x_" + std::to_string(j);
  out += "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += std::to_string(data.ids[i]);
    out += ",";
    out += std::to_string(data.cases[i].outcome);
    for (double x : data.cases[i].features) {
      out += ",";
      out += format_full(x);
    }
    out += "\n";
  }
  write_text_file(path, out);
}

ProbabilityTable load_probability_table(const std::filesystem::path& path, int num_classes) {
  const auto lines = split_lines(read_text_file(path));
  if (lines.empty()) throw ValidationError(path.string() + " is empty, expected a header row");
  const auto header = split_on(lines[0], ',');
  if (header.size() < 3 || trim(header[0]) != "id") {
    throw ValidationError(path.string() + ": header must be id,p_0,...,p_{K-1}");
  }
  const int k = static_cast<int>(header.size()) - 1;
  if (num_classes != 0 && num_classes != k) {
    throw ValidationError(path.string() + " has " + std::to_string(k) +
                          " probability columns, expected " + std::to_string(num_classes));
  }
  for (int j = 0; j < k; ++j) {
    const std::string expected = "p_" + std::to_string(j);
    if (trim(header[static_cast<std::size_t>(j) + 1]) != expected) {
      throw ValidationError(path.string() + ": header column " + std::to_string(j + 2) +
                            " is '" + header[static_cast<std::size_t>(j) + 1] + "', expected '" +
                            expected + "'");
    }
  }

  ProbabilityTable table;
  table.num_classes = k;
  table.source = ProbSource::external_file;
  std::unordered_set<std::int64_t> seen;
  for (std::size_t row = 1; row < lines.size(); ++row) {
    if (lines[row].empty()) continue;
    const std::string where = path.string() + " row " + std::to_string(row);
    const auto cells = split_on(lines[row], ',');
    if (cells.size() != header.size()) {
      throw ValidationError(where + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
    }
    const std::int64_t id = parse_int(cells[0], where);
    if (!seen.insert(id).second) {
      throw ValidationError(where + ": duplicate id " + std::to_string(id));
    }
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) {
      probs.push_back(parse_double(cells[static_cast<std::size_t>(j) + 1], where));
    }
    try {
      table.rows.push_back(ClassDistribution::from_probs(std::move(probs)));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    table.ids.push_back(id);
  }
  return table;
}

void write_probability_csv(const std::filesystem::path& path, const ProbabilityTable& table) {
  std::string out = "id";
  for (int j = 0; j < table.num_classes; ++j) out += ",p_" + std::to_string(j);
  out += "\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += std::to_string(table.ids[i]);
    for (double p : table.rows[i].probs()) {
      out += ",";
      out += format_full(p);
    }
    out += "\n";
  }
  write_text_file(path, out);
}

void save_model(const std::filesystem::path& path, const SoftmaxModel& model) {
  std::string out = "ccp-model v1 K=" + std::to_string(model.num_classes()) +
                    " d=" + std::to_string(model.num_features()) + "\n";
  for (const auto& row : model.coefficients()) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j > 0) out += " ";
      out += format_full(row[j]);
    }
    out += "\n";
  }
  write_text_file(path, out);
}

SoftmaxModel load_model(const std::filesystem::path& path) {
  const auto lines = split_lines(read_text_file(path));
  if (lines.empty()) throw ValidationError(path.string() + " is empty");
  std::istringstream header(lines[0]);
  std::string magic, version, kfield, dfield;
  header >> magic >> version >> kfield >> dfield;
  if (magic != "ccp-model" || version != "v1" || kfield.rfind("K=", 0) != 0 ||
      dfield.rfind("d=", 0) != 0) {
    throw ValidationError(path.string() + ": bad model header '" + lines[0] + "'");
  }
  const auto k = parse_int(kfield.substr(2), path.string() + " header");
  const auto d = parse_int(dfield.substr(2), path.string() + " header");
  if (k < 2 || d < 1) throw ValidationError(path.string() + ": bad model dimensions");
  if (lines.size() < static_cast<std::size_t>(k) + 1) {
    throw ValidationError(path.string() + ": expected " + std::to_string(k) +
                          " coefficient rows");
  }
  std::vector<std::vector<double>> coef;
  for (std::int64_t cls = 0; cls < k; ++cls) {
    const std::string& line = lines[static_cast<std::size_t>(cls) + 1];
    std::istringstream ss(line);
    std::vector<double> row;
    std::string tok;
    while (ss >> tok) row.push_back(parse_double(tok, path.string() + " coefficients"));
    if (row.size() != static_cast<std::size_t>(d) + 1) {
      throw ValidationError(path.string() + ": coefficient row " + std::to_string(cls) +
                            " has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(d + 1));
    }
    coef.push_back(std::move(row));
  }
  return SoftmaxModel::from_coefficients(std::move(coef));
}

namespace {

std::string calibration_model_lines(const std::string& prefix, const CalibrationModel& cal) {
  std::string out;
  out += prefix + "n: " + std::to_string(cal.n_cal) + "\n";
  out += prefix + "k: " + std::to_string(cal.order_index) + "\n";
  out += prefix + "gamma: " + format_full(cal.gamma_hat) + "\n";
  out += prefix + "degenerate: " + (cal.degenerate ? std::string("1") : std::string("0")) + "\n";
  return out;
}

}  // namespace

void save_calibration(const std::filesystem::path& path, const CalibrationModel& cal,
                      int num_classes) {
  std::string out = "format: ccp-calibration v1\n";
  out += "method: nested\n";
  out += "alpha: " + format_full(cal.alpha) + "\n";
  out += "classes: " + std::to_string(num_classes) + "\n";
  out += calibration_model_lines("", cal);
  write_text_file(path, out);
}

void save_calibration(const std::filesystem::path& path, const LocalizedCalibration& loc) {
  std::string out = "format: ccp-calibration v1\n";
  out += "method: localized\n";
  out += "alpha: " + format_full(loc.alpha) + "\n";
  out += "classes: " + std::to_string(loc.num_classes()) + "\n";
  for (int j = 0; j < loc.num_classes(); ++j) {
    const std::string prefix = "partition" + std::to_string(j) + ".";
    out += calibration_model_lines(prefix, loc.per_forecast[static_cast<std::size_t>(j)]);
    out += prefix + "empty: " +
           (loc.empty_partition[static_cast<std::size_t>(j)] ? std::string("1")
                                                             : std::string("0")) +
           "\n";
  }
  write_text_file(path, out);
}

CalibrationFile load_calibration(const std::filesystem::path& path) {
  const auto lines = split_lines(read_text_file(path));
  std::map<std::string, std::string> kv;
  for (const auto& line : lines) {
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw ValidationError(path.string() + ": bad line '" + line + "'");
    }
    kv[trim(line.substr(0, colon))] = trim(line.substr(colon + 1));
  }
  auto need = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(path.string() + ": missing key '" + key + "'");
    return it->second;
  };
  if (need("format") != "ccp-calibration v1") {
    throw ValidationError(path.string() + ": unsupported format '" + kv["format"] + "'");
  }

  CalibrationFile file;
  file.method = set_method_from_string(need("method"));
  file.alpha = parse_double(need("alpha"), path.string());
  file.num_classes = static_cast<int>(parse_int(need("classes"), path.string()));
  if (file.num_classes < 2) throw ValidationError(path.string() + ": bad class count");

  auto read_model = [&](const std::string& prefix) {
    CalibrationModel cal;
    cal.alpha = file.alpha;
    cal.n_cal = static_cast<std::size_t>(parse_int(need(prefix + "n"), path.string()));
    cal.order_index = static_cast<std::size_t>(parse_int(need(prefix + "k"), path.string()));
    cal.gamma_hat = parse_double(need(prefix + "gamma"), path.string());
    cal.degenerate = parse_int(need(prefix + "degenerate"), path.string()) != 0;
    return cal;
  };

  if (file.method == SetMethod::nested) {
    file.nested = read_model("");
  } else if (file.method == SetMethod::localized) {
    file.localized.alpha = file.alpha;
    for (int j = 0; j < file.num_classes; ++j) {
      const std::string prefix = "partition" + std::to_string(j) + ".";
      CalibrationModel cal = read_model(prefix);
      file.localized.per_forecast.push_back(cal);
      file.localized.partition_sizes.push_back(cal.n_cal);
      file.localized.empty_partition.push_back(parse_int(need(prefix + "empty"), path.string()) !=
                                               0);
    }
  } else {
    throw ValidationError(path.string() + ": calibration files hold nested or localized models");
  }
  return file;
}

void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const PredictionRow> rows) {
  std::string out = "id,forecast,set,set_size,gamma_used\n";
  for (const auto& row : rows) {
    out += std::to_string(row.id);
    out += ",";
    out += std::to_string(row.forecast);
    out += ",";
    for (std::size_t j = 0; j < row.members.size(); ++j) {
      if (j > 0) out += ";";
      out += std::to_string(row.members[j]);
    }
    out += ",";
    out += std::to_string(row.members.size());
    out += ",";
    out += format_full(row.gamma_used);
    out += "\n";
  }
  write_text_file(path, out);
}

std::vector<PredictionRow> read_predictions_csv(const std::filesystem::path& path) {
  const auto lines = split_lines(read_text_file(path));
  if (lines.empty()) throw ValidationError(path.string() + " is empty, expected a header row");
  if (trim(lines[0]) != "id,forecast,set,set_size,gamma_used") {
    throw ValidationError(path.string() + ": bad predictions header '" + lines[0] + "'");
  }
  std::vector<PredictionRow> rows;
  std::unordered_set<std::int64_t> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = path.string() + " row " + std::to_string(i);
    const auto cells = split_on(lines[i], ',');
    if (cells.size() != 5) {
      throw ValidationError(where + " has " + std::to_string(cells.size()) +
                            " cells, expected 5");
    }
    PredictionRow row;
    row.id = parse_int(cells[0], where);
    if (!seen.insert(row.id).second) {
      throw ValidationError(where + ": duplicate id " + std::to_string(row.id));
    }
    row.forecast = static_cast<int>(parse_int(cells[1], where));
    for (const auto& tok : split_on(cells[2], ';')) {
      row.members.push_back(static_cast<int>(parse_int(tok, where)));
    }
    if (!std::is_sorted(row.members.begin(), row.members.end())) {
      throw ValidationError(where + ": set members must be ascending");
    }
    const auto size = parse_int(cells[3], where);
    if (size != static_cast<std::int64_t>(row.members.size())) {
      throw ValidationError(where + ": set_size " + std::to_string(size) + " does not match " +
                            std::to_string(row.members.size()) + " members");
    }
    row.gamma_used = parse_double(cells[4], where);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string pad_left(const std::string& s, std::size_t width) {
  if (s.size() >= width) return s;
  return std::string(width - s.size(), ' ') + s;
}

std::string size_column_name(std::size_t size) {
  static const char* words[] = {"one", "two", "three", "four", "five"};
  if (size >= 1 && size <= 5) return words[size - 1];
  return "size" + std::to_string(size);
}

}  // namespace

std::string render_confusion_text(const ConfusionTable& table, const LabelSpace& labels) {
  const int k = table.num_classes();
  std::size_t width = 16;
  for (int c = 0; c < k; ++c) width = std::max(width, labels.name(c).size() + 2);

  std::string out = "confusion table (N=" + std::to_string(table.total()) + ")\n";
  out += pad_left("actual \\ pred", width);
  for (int p = 0; p < k; ++p) out += pad_left(labels.name(p), width);
  out += pad_left("class_error", width);
  out += "\n";
  for (int a = 0; a < k; ++a) {
    out += pad_left(labels.name(a), width);
    for (int p = 0; p < k; ++p) out += pad_left(std::to_string(table.count(a, p)), width);
    const std::int64_t row = table.row_total(a);
    const std::string err =
        row == 0 ? "na" : format_fixed(classification_error(table, a), 2);
    out += pad_left(err, width);
    out += "\n";
  }
  out += pad_left("forecast_error", width);
  for (int p = 0; p < k; ++p) {
    const std::int64_t col = table.col_total(p);
    out += pad_left(col == 0 ? "na" : format_fixed(forecasting_error(table, p), 2), width);
  }
  out += "\n";
  return out;
}

std::string render_confusion_csv(const ConfusionTable& table, const LabelSpace& labels) {
  const int k = table.num_classes();
  std::string out = "actual\\predicted";
  for (int p = 0; p < k; ++p) out += "," + labels.name(p);
  out += ",classification_error\n";
  for (int a = 0; a < k; ++a) {
    out += labels.name(a);
    for (int p = 0; p < k; ++p) out += "," + std::to_string(table.count(a, p));
    const std::int64_t row = table.row_total(a);
    out += "," + (row == 0 ? std::string("na") : format_full(classification_error(table, a)));
    out += "\n";
  }
  out += "forecasting_error";
  for (int p = 0; p < k; ++p) {
    const std::int64_t col = table.col_total(p);
    out += "," + (col == 0 ? std::string("na") : format_full(forecasting_error(table, p)));
  }
  out += ",\n";
  return out;
}

std::string render_error_report_text(const ErrorReport& report, const LabelSpace& labels) {
  const int k = static_cast<int>(report.classification_error.size());
  std::string out = "per-class error rates\n";
  for (int c = 0; c < k; ++c) {
    out += "  " + labels.name(c) + ": classification_error=" +
           format_fixed(report.classification_error[static_cast<std::size_t>(c)], 4) +
           " forecasting_error=" +
           format_fixed(report.forecasting_error[static_cast<std::size_t>(c)], 4) +
           " marginal_share=" +
           format_fixed(report.outcome_marginal[static_cast<std::size_t>(c)], 4) + "\n";
  }
  out += "empirical cost ratios count(actual=a,pred=b)/count(actual=b,pred=a)\n";
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      out += "  " + labels.name(a) + " as " + labels.name(b) + ": " +
             format_fixed(report.cost_ratio[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)],
                          2) +
             "\n";
    }
  }
  return out;
}

std::string render_error_report_csv(const ErrorReport& report, const LabelSpace& labels) {
  const int k = static_cast<int>(report.classification_error.size());
  std::string out = "class,classification_error,forecasting_error,marginal_share\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string("na") : format_full(v); };
  for (int c = 0; c < k; ++c) {
    out += labels.name(c) + "," + cell(report.classification_error[static_cast<std::size_t>(c)]) +
           "," + cell(report.forecasting_error[static_cast<std::size_t>(c)]) + "," +
           cell(report.outcome_marginal[static_cast<std::size_t>(c)]) + "\n";
  }
  out += "cost_ratio_actual,cost_ratio_predicted,ratio\n";
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      out += labels.name(a) + "," + labels.name(b) + "," +
             cell(report.cost_ratio[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) +
             "\n";
    }
  }
  return out;
}

std::string render_set_size_text(const SetSizeReport& report, const LabelSpace& labels) {
  const int k = report.num_classes();
  std::size_t width = 12;
  for (int c = 0; c < k; ++c) width = std::max(width, labels.name(c).size() + 2);
  std::string out = "prediction set sizes by forecast class\n";
  out += pad_left("forecast", width);
  for (int sz = 1; sz <= k; ++sz) out += pad_left(size_column_name(static_cast<std::size_t>(sz)), width);
  out += pad_left("n", width);
  out += "\n";
  for (int c = 0; c < k; ++c) {
    out += pad_left(labels.name(c), width);
    for (int sz = 0; sz < k; ++sz) {
      out += pad_left(
          format_fixed(report.proportions[static_cast<std::size_t>(c)][static_cast<std::size_t>(sz)], 3),
          width);
    }
    out += pad_left(std::to_string(report.group_counts[static_cast<std::size_t>(c)]), width);
    if (report.empty_group[static_cast<std::size_t>(c)]) out += "  (empty)";
    out += "\n";
  }
  return out;
}

std::string render_set_size_csv(const SetSizeReport& report, const LabelSpace& labels) {
  const int k = report.num_classes();
  std::string out = "forecast";
  for (int sz = 1; sz <= k; ++sz) out += ",size_" + std::to_string(sz);
  out += ",n,empty\n";
  for (int c = 0; c < k; ++c) {
    out += labels.name(c);
    for (int sz = 0; sz < k; ++sz) {
      out += "," + format_full(
                       report.proportions[static_cast<std::size_t>(c)][static_cast<std::size_t>(sz)]);
    }
    out += "," + std::to_string(report.group_counts[static_cast<std::size_t>(c)]);
    out += "," + std::string(report.empty_group[static_cast<std::size_t>(c)] ? "1" : "0");
    out += "\n";
  }
  return out;
}

}  // namespace ccp
