#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankmip/baselines.hpp"
#include "rankmip/dataset.hpp"

namespace rankmip {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    size_t start = cell.find_first_not_of(' ');
    out.push_back(start == std::string::npos ? "" : cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_cell(const std::string& cell, int row, const std::string& col) {
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v))
    throw ValidationError("non-numeric cell '" + cell + "' at data row " + std::to_string(row) +
                          ", column '" + col + "'");
  return v;
}

}  // namespace detail

// CSV with a header row and a column literally named `label` holding 0/1;
// all other columns are numeric features. Columns are mapped onto [-1,1]
// and the transform kept on the dataset.
inline Dataset load_csv(const std::string& path, std::vector<std::string>* warnings = nullptr) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw ValidationError(path + " is empty");
  auto header = detail::split_csv_line(line);
  int label_col = -1;
  std::vector<std::string> names;
  for (size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "label") label_col = static_cast<int>(j);
    else names.push_back(header[j]);
  }
  if (label_col < 0) throw ValidationError(path + " has no column named 'label'");
  if (names.empty()) throw ValidationError(path + " has no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  int row = 0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    ++row;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError(path + " row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                            " cells, expected " + std::to_string(header.size()));
    int name_idx = 0;
    for (size_t j = 0; j < cells.size(); ++j) {
      if (static_cast<int>(j) == label_col) {
        double v = detail::parse_cell(cells[j], row, "label");
        if (v != 0.0 && v != 1.0)
          throw ValidationError(path + " row " + std::to_string(row) + ": label value '" + cells[j] +
                                "' is not 0 or 1");
        labels.push_back(static_cast<int>(v));
      } else {
        values.push_back(detail::parse_cell(cells[j], row, names[name_idx++]));
      }
    }
  }
  if (row == 0) throw ValidationError(path + " has a header but no data rows");

  Matrix x(row, static_cast<int>(names.size()));
  x.data = std::move(values);
  Dataset raw(std::move(x), std::move(labels), names);
  if (warnings) {
    if (!raw.has_both_classes()) warnings->push_back(path + ": single-class dataset");
    auto dups = raw.duplicate_row_pairs();
    if (!dups.empty()) {
      std::string msg = path + ": duplicate feature rows:";
      for (auto& [a, b] : dups) msg += " (" + std::to_string(a) + "," + std::to_string(b) + ")";
      warnings->push_back(msg);
    }
  }
  return raw.scaled_to_unit();
}

// Writes raw (unscaled) feature values plus the label column.
inline void save_csv(const Dataset& data, const std::string& path) {
  Dataset raw = data.unscaled();
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open " + path + " for writing");
  for (int j = 0; j < raw.dim(); ++j) {
    f << (raw.feature_names.empty() ? "f" + std::to_string(j) : raw.feature_names[j]) << ",";
  }
  f << "label\n";
  char buf[64];
  for (int i = 0; i < raw.n(); ++i) {
    for (int j = 0; j < raw.dim(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", raw.features.at(i, j));
      f << buf << ",";
    }
    f << raw.labels[i] << "\n";
  }
}

// Scorer + scaling + provenance, as JSON.
struct ModelFile {
  LinearScorer scorer;
  double intercept = 0.0;
  std::optional<ColumnScaling> scaling;
  std::string method;
  double final_loss = 0.0;
  int iterations_used = 0;
  bool converged = false;
};

inline void save_model(const ModelFile& m, const std::string& path) {
  nlohmann::json j{{"weights", m.scorer.weights},
                   {"intercept", m.intercept},
                   {"method", m.method},
                   {"final_loss", m.final_loss},
                   {"iterations_used", m.iterations_used},
                   {"converged", m.converged}};
  if (m.scaling) j["scaling"] = {{"lo", m.scaling->lo}, {"hi", m.scaling->hi}};
  else j["scaling"] = nullptr;
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
}

inline ModelFile load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + " is not valid JSON: " + e.what());
  }
  ModelFile m;
  m.scorer = LinearScorer(j.at("weights").get<std::vector<double>>());
  m.intercept = j.value("intercept", 0.0);
  m.method = j.value("method", std::string());
  m.final_loss = j.value("final_loss", 0.0);
  m.iterations_used = j.value("iterations_used", 0);
  m.converged = j.value("converged", false);
  if (j.contains("scaling") && !j["scaling"].is_null()) {
    ColumnScaling sc;
    sc.lo = j["scaling"].at("lo").get<std::vector<double>>();
    sc.hi = j["scaling"].at("hi").get<std::vector<double>>();
    m.scaling = sc;
  }
  return m;
}

inline ModelFile model_file_from(const TrainedModel& t, BaseMethod method,
                                 const std::optional<ColumnScaling>& scaling) {
  ModelFile m;
  m.scorer = t.scorer;
  m.intercept = t.intercept;
  m.scaling = scaling;
  m.method = base_method_name(method);
  m.final_loss = t.final_loss;
  m.iterations_used = t.iterations_used;
  m.converged = t.converged;
  return m;
}

}  // namespace rankmip
