// Copyright (c) 2026 The Engage Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Renders a run directory into Markdown tables: data split, balanced
// variants, hyperparameter grids, holdout performance, strongly
// correlated pairs and the Shapley ranking.

#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "engage/csv.hpp"
#include "engage/error.hpp"
#include "engage/protocol.hpp"
#include "engage/text.hpp"
#include "json.hpp"

namespace engage {

namespace report_detail {

struct Table {
  csv::Row header;
  std::vector<csv::Row> rows;

  std::size_t col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    fail(ErrorCode::MalformedInput, "missing column '" + name + "'");
  }
};

inline Table load_csv(const std::filesystem::path& p) {
  auto rows = csv::parse(read_file(p));
  if (rows.empty()) fail(ErrorCode::MalformedInput, p.string() + " is empty");
  Table t;
  t.header = rows[0];
  t.rows.assign(rows.begin() + 1, rows.end());
  return t;
}

inline std::string markdown(const csv::Row& header, const std::vector<csv::Row>& rows) {
  auto line = [](const csv::Row& r) {
    std::string s = "|";
    for (const auto& c : r) s += " " + c + " |";
    return s + "\n";
  };
  std::string out = line(header) + "|";
  for (std::size_t i = 0; i < header.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

inline std::string fixed(double v, int digits) {
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", digits, v);
  return buf.data();
}

// Percent with one decimal, "mean±sd"; empty cells render as "n/a".
inline std::string pct(const std::string& mean, const std::string& sd) {
  const auto m = text::parse_double(mean);
  const auto s = text::parse_double(sd);
  if (!m) return "n/a";
  return fixed(*m * 100, 1) + "±" + fixed(s.value_or(0) * 100, 1);
}

inline std::string join(const nlohmann::json& arr) {
  std::string out;
  for (const auto& v : arr) {
    if (!out.empty()) out += ", ";
    out += v.is_string() ? v.get<std::string>() : v.dump();
  }
  return out;
}

inline std::string count(const nlohmann::json& c, const char* key) { return std::to_string(c.at(key).get<std::size_t>()); }

}  // namespace report_detail

inline std::string render_report(const std::filesystem::path& dir) {
  using namespace report_detail;
  const auto manifest = nlohmann::json::parse(read_file(dir / kManifestName));
  std::string out = "# Engagement classification report\n\n";
  out += "Seed " + std::to_string(manifest.at("seed").get<std::uint64_t>()) + ", engage " +
         manifest.at("version").get<std::string>() + ".\n\n";

  const auto& t1 = manifest.at("table1");
  out += "## Table I. Data split\n\n";
  std::vector<csv::Row> rows;
  for (const auto& [label, key] : std::vector<std::pair<std::string, std::string>>{
           {"Input", "input"}, {"Outlier removed", "outlier_removed"}, {"Holdout test set", "holdout"},
           {"Training set", "train"}}) {
    const auto& c = t1.at(key);
    rows.push_back({label, count(c, "HI"), count(c, "LO"), count(c, "total")});
  }
  out += markdown({"Stage", "HI", "LO", "Total"}, rows);
  const auto& miss = manifest.at("missing");
  out += "\nMissing feature values: " + count(miss, "missing_cells") + " of " + count(miss, "feature_cells") +
         " feature cells (" + count(miss, "total_cells") + " cells including id and label columns).\n\n";

  out += "## Table II. SMOTE-Tomek balanced datasets\n\n";
  rows.clear();
  for (const auto& v : manifest.at("table2")) {
    rows.push_back({v.at("name").get<std::string>(), count(v, "HI"), count(v, "LO"), count(v, "synthetic"),
                    v.at("tomek_applied").get<bool>() ? count(v, "tomek_removed") : "not applied"});
  }
  out += markdown({"Dataset", "HI", "LO", "Synthetic rows", "Tomek removals"}, rows);

  out += "\n## Table III. Hyperparameter grids\n\n";
  const auto& grid = manifest.at("config").at("evaluate").at("grid");
  rows.clear();
  for (const auto& [kind, params] : grid.items()) {
    for (const auto& [name, values] : params.items()) rows.push_back({kind, name, join(values)});
  }
  out += markdown({"Classifier", "Parameter", "Values"}, rows);

  out += "\n## Table IV. Holdout performance (mean±sd over fold models, %)\n\n";
  const auto eval = load_csv(dir / "eval_report.csv");
  rows.clear();
  for (const auto& r : eval.rows) {
    csv::Row row = {r[eval.col("dataset")], r[eval.col("per_class")],
                    std::string(display_name(parse_model_kind(r[eval.col("classifier")])))};
    for (const auto& m : metric_names()) row.push_back(pct(r[eval.col(m + "_mean")], r[eval.col(m + "_sd")]));
    row.push_back(r[eval.col("best_params")]);
    rows.push_back(row);
  }
  out += markdown({"Dataset", "Per class", "Classifier", "Accuracy", "Precision", "Recall", "F1", "AUC", "Modal parameters"},
                  rows);

  out += "\n## Table V. Strongly correlated feature pairs\n\n";
  const auto pairs = load_csv(dir / "pearson_strong_pairs.csv");
  rows.clear();
  for (const auto& r : pairs.rows) {
    rows.push_back({r[0], dimension_tag(r[0]), r[1], dimension_tag(r[1]), fixed(*text::parse_double(r[2]), 3)});
  }
  out += rows.empty() ? "No pair exceeds the threshold.\n" : markdown({"Feature", "Dimension", "Feature", "Dimension", "r"}, rows);

  out += "\n## Table VI. Shapley ranking (mean |value|, top 10)\n\n";
  const auto shap = load_csv(dir / "shap_report.csv");
  std::vector<std::string> kinds;
  std::map<std::string, std::vector<std::string>> by_kind;
  for (const auto& r : shap.rows) {
    const auto& k = r[shap.col("kind")];
    if (!by_kind.count(k)) kinds.push_back(k);
    auto& list = by_kind[k];
    if (list.size() < 10) {
      list.push_back(r[shap.col("feature_id")] + " (" + r[shap.col("dimension")] + ", " +
                     fixed(*text::parse_double(r[shap.col("mean_abs_shap")]), 4) + ")");
    }
  }
  csv::Row header = {"Rank"};
  for (const auto& k : kinds) header.emplace_back(display_name(parse_model_kind(k)));
  rows.clear();
  for (std::size_t i = 0; i < 10; ++i) {
    csv::Row row = {std::to_string(i + 1)};
    for (const auto& k : kinds) row.push_back(i < by_kind[k].size() ? by_kind[k][i] : "");
    rows.push_back(row);
  }
  out += markdown(header, rows);
  const auto& audit = manifest.at("leakage_audit");
  out += "\nLeakage audit: " + std::string(audit.at("passed").get<bool>() ? "passed" : "FAILED") + ".\n";
  return out;
}

}  // namespace engage
