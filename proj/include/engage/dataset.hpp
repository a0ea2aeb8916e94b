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

// Tabular dataset: row-major feature matrix, binary labels, row identities.
// Missing cells are NaN and exist only before imputation.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/error.hpp"

namespace engage {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<std::string> ids;
  std::vector<Label> labels;
  std::vector<double> values;
  // For synthetic rows: ids of the two originals the point interpolates.
  // Empty strings for original rows.
  std::vector<std::array<std::string, 2>> parents;

  std::size_t rows() const { return ids.size(); }
  std::size_t cols() const { return feature_names.size(); }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols(), cols()};
  }
  std::span<double> row(std::size_t i) { return {values.data() + i * cols(), cols()}; }

  double at(std::size_t i, std::size_t j) const { return values[i * cols() + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * cols() + j]; }

  bool is_synthetic(std::size_t i) const { return !parents[i][0].empty(); }

  void add_row(std::string id, Label label, std::span<const double> x,
               std::array<std::string, 2> origin = {}) {
    if (x.size() != cols()) fail(ErrorCode::DimensionMismatch, "row width differs from dataset width");
    ids.push_back(std::move(id));
    labels.push_back(label);
    values.insert(values.end(), x.begin(), x.end());
    parents.push_back(std::move(origin));
  }

  Dataset subset(std::span<const std::size_t> idx) const {
    Dataset out = empty_like();
    for (std::size_t i : idx) out.add_row(ids[i], labels[i], row(i), parents[i]);
    return out;
  }

  Dataset empty_like() const {
    Dataset out;
    out.feature_names = feature_names;
    return out;
  }

  std::size_t count(Label l) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
  }

  std::vector<std::size_t> indices_of(Label l) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (labels[i] == l) out.push_back(i);
    }
    return out;
  }

  std::size_t missing_cells() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), is_missing));
  }
};

inline Dataset make_dataset(std::size_t width) {
  Dataset d;
  for (std::size_t j = 0; j < width; ++j) d.feature_names.push_back("x" + std::to_string(j));
  return d;
}

inline Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.feature_names != b.feature_names) fail(ErrorCode::DimensionMismatch, "concat of different schemas");
  Dataset out = a;
  for (std::size_t i = 0; i < b.rows(); ++i) out.add_row(b.ids[i], b.labels[i], b.row(i), b.parents[i]);
  return out;
}

inline double label_value(Label l) { return l == Label::Hi ? 1.0 : 0.0; }

}  // namespace engage
