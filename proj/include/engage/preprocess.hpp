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

// Mean imputation, min-max scaling, isolation-forest outlier removal and the
// class-balanced holdout split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "engage/dataset.hpp"
#include "engage/error.hpp"
#include "engage/parallel.hpp"
#include "engage/random.hpp"
#include "json.hpp"

namespace engage {

// ---------------------------------------------------------------------------
// Imputation and scaling

inline std::vector<double> fit_means(const Dataset& stats_from) {
  std::vector<double> means(stats_from.cols(), 0.0);
  for (std::size_t j = 0; j < stats_from.cols(); ++j) {
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < stats_from.rows(); ++i) {
      const double v = stats_from.at(i, j);
      if (is_missing(v)) continue;
      sum += v;
      ++n;
    }
    if (n == 0) fail(ErrorCode::AllMissingFeature, "feature " + stats_from.feature_names[j] + " has no values");
    means[j] = sum / static_cast<double>(n);
  }
  return means;
}

inline Dataset impute(const Dataset& d, std::span<const double> means) {
  if (means.size() != d.cols()) fail(ErrorCode::DimensionMismatch, "mean vector width");
  Dataset out = d;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      if (is_missing(out.at(i, j))) out.at(i, j) = means[j];
    }
  }
  return out;
}

// Missing cells of `d` get the per-feature mean of `stats_from`.
inline Dataset impute_means(const Dataset& d, const Dataset& stats_from) {
  return impute(d, fit_means(stats_from));
}

struct MinMaxParams {
  std::vector<double> min;
  std::vector<double> max;
};

inline MinMaxParams minmax_fit(const Dataset& d) {
  if (d.rows() == 0) fail(ErrorCode::TooFewRows, "minmax_fit on an empty dataset");
  MinMaxParams p{std::vector<double>(d.cols(), INFINITY), std::vector<double>(d.cols(), -INFINITY)};
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < d.cols(); ++j) {
      p.min[j] = std::min(p.min[j], d.at(i, j));
      p.max[j] = std::max(p.max[j], d.at(i, j));
    }
  }
  return p;
}

// Constant features map to 0; values outside the fitted range are clamped.
inline Dataset minmax_apply(const Dataset& d, const MinMaxParams& p) {
  Dataset out = d;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) {
      const double range = p.max[j] - p.min[j];
      double& v = out.at(i, j);
      v = range > 0 ? std::clamp((v - p.min[j]) / range, 0.0, 1.0) : 0.0;
    }
  }
  return out;
}

// Persisted as {feature_id: {mean, min, max}} so inference reuses training
// statistics.
inline nlohmann::json preprocess_params_json(const std::vector<std::string>& names,
                                             std::span<const double> means, const MinMaxParams& mm) {
  nlohmann::ordered_json doc;
  for (std::size_t j = 0; j < names.size(); ++j) {
    doc[names[j]] = {{"mean", means[j]}, {"min", mm.min[j]}, {"max", mm.max[j]}};
  }
  return nlohmann::json::parse(doc.dump());
}

inline void preprocess_params_from_json(const nlohmann::json& doc, const std::vector<std::string>& names,
                                        std::vector<double>& means, MinMaxParams& mm) {
  means.assign(names.size(), 0);
  mm.min.assign(names.size(), 0);
  mm.max.assign(names.size(), 0);
  for (std::size_t j = 0; j < names.size(); ++j) {
    const auto& e = doc.at(names[j]);
    means[j] = e.at("mean").get<double>();
    mm.min[j] = e.at("min").get<double>();
    mm.max[j] = e.at("max").get<double>();
  }
}

// ---------------------------------------------------------------------------
// Isolation forest

inline constexpr double kEulerGamma = 0.5772156649;

// Average path length of an unsuccessful BST search over n points.
inline double average_path_length(double n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double harmonic = std::log(n - 1) + kEulerGamma;
  return 2.0 * harmonic - 2.0 * (n - 1) / n;
}

// s = 2^(-E[h]/c(n)).
inline double anomaly_score(double mean_path_length, double n) {
  return std::pow(2.0, -mean_path_length / average_path_length(n));
}

struct IsolationNode {
  // feature < 0 marks an external node holding `size` training points.
  int feature = -1;
  double split = 0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t size = 0;
};

struct IsolationTree {
  std::vector<IsolationNode> nodes;

  double path_length(std::span<const double> x) const {
    std::size_t at = 0;
    double depth = 0;
    while (nodes[at].feature >= 0) {
      at = x[static_cast<std::size_t>(nodes[at].feature)] < nodes[at].split ? nodes[at].left : nodes[at].right;
      depth += 1;
    }
    return depth + average_path_length(nodes[at].size);
  }
};

struct IsolationForestOptions {
  std::size_t trees = 100;
  std::size_t subsample = 256;
};

class IsolationForest {
 public:
  static IsolationForest fit(const Dataset& d, std::uint64_t seed, const IsolationForestOptions& opts = {}) {
    if (d.rows() < 2) fail(ErrorCode::TooFewRows, "isolation forest needs at least 2 rows");
    IsolationForest forest;
    forest.subsample_ = std::min(opts.subsample, d.rows());
    const auto height_limit =
        static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(forest.subsample_))));
    forest.trees_.resize(opts.trees);
    parallel_for(opts.trees, [&](std::size_t t) {
      Rng rng(derive_seed(seed, t));
      std::vector<std::size_t> all(d.rows());
      std::iota(all.begin(), all.end(), 0);
      // Partial Fisher-Yates: first `subsample_` entries are a sample without replacement.
      for (std::size_t i = 0; i < forest.subsample_; ++i) std::swap(all[i], all[i + rng.index(all.size() - i)]);
      all.resize(forest.subsample_);
      IsolationTree tree;
      grow(d, all, 0, height_limit, rng, tree);
      forest.trees_[t] = std::move(tree);
    });
    return forest;
  }

  double mean_path_length(std::span<const double> x) const {
    double sum = 0;
    for (const auto& t : trees_) sum += t.path_length(x);
    return sum / static_cast<double>(trees_.size());
  }

  double score(std::span<const double> x) const {
    return anomaly_score(mean_path_length(x), static_cast<double>(subsample_));
  }

  std::size_t subsample_size() const { return subsample_; }
  std::size_t tree_count() const { return trees_.size(); }

 private:
  static std::uint32_t grow(const Dataset& d, std::vector<std::size_t>& rows, std::size_t depth,
                            std::size_t limit, Rng& rng, IsolationTree& tree) {
    const auto id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.push_back(IsolationNode{-1, 0, 0, 0, static_cast<std::uint32_t>(rows.size())});
    if (depth >= limit || rows.size() <= 1) return id;
    // Features constant within the node cannot split it.
    std::vector<std::size_t> candidates;
    std::vector<std::pair<double, double>> ranges(d.cols());
    for (std::size_t j = 0; j < d.cols(); ++j) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t r : rows) {
        lo = std::min(lo, d.at(r, j));
        hi = std::max(hi, d.at(r, j));
      }
      ranges[j] = {lo, hi};
      if (hi > lo) candidates.push_back(j);
    }
    if (candidates.empty()) return id;
    const std::size_t feature = candidates[rng.index(candidates.size())];
    const auto [lo, hi] = ranges[feature];
    double split = rng.uniform(lo, hi);
    if (split <= lo) split = std::nextafter(lo, hi);
    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) (d.at(r, feature) < split ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[id].feature = static_cast<int>(feature);
    tree.nodes[id].split = split;
    const auto l = grow(d, left, depth + 1, limit, rng, tree);
    tree.nodes[id].left = l;
    const auto r = grow(d, right, depth + 1, limit, rng, tree);
    tree.nodes[id].right = r;
    return id;
  }

  std::vector<IsolationTree> trees_;
  std::size_t subsample_ = 0;
};

struct OutlierResult {
  Dataset kept;
  std::vector<std::string> removed_ids;
  std::vector<double> scores;  // per input row
};

inline std::size_t outlier_count(double contamination, std::size_t n) {
  // Guard against 13/253 * 253 landing a hair above 13.
  return static_cast<std::size_t>(std::ceil(contamination * static_cast<double>(n) - 1e-9));
}

// Drops the ceil(contamination * n) highest-scoring rows.
inline OutlierResult remove_outliers(const Dataset& d, double contamination, std::uint64_t seed,
                                     const IsolationForestOptions& opts = {}) {
  if (!(contamination > 0 && contamination < 0.5)) {
    fail(ErrorCode::InvalidArgument, "contamination must lie in (0, 0.5)");
  }
  const auto forest = IsolationForest::fit(d, seed, opts);
  OutlierResult res;
  res.scores.resize(d.rows());
  parallel_for(d.rows(), [&](std::size_t i) { res.scores[i] = forest.score(d.row(i)); });
  std::vector<std::size_t> order(d.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return res.scores[a] > res.scores[b]; });
  const std::size_t drop = std::min(outlier_count(contamination, d.rows()), d.rows());
  std::vector<bool> removed(d.rows(), false);
  for (std::size_t k = 0; k < drop; ++k) removed[order[k]] = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (removed[i]) {
      res.removed_ids.push_back(d.ids[i]);
    } else {
      keep.push_back(i);
    }
  }
  res.kept = d.subset(keep);
  return res;
}

// ---------------------------------------------------------------------------
// Holdout split

struct SplitSpec {
  std::size_t holdout_per_class = 9;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset test;
};

// Rows keep their input order within each side.
inline Split balanced_holdout_split(const Dataset& d, const SplitSpec& spec) {
  Rng rng(derive_seed(spec.seed, "holdout"));
  std::vector<bool> to_test(d.rows(), false);
  for (Label l : {Label::Hi, Label::Lo}) {
    auto idx = d.indices_of(l);
    if (idx.size() < spec.holdout_per_class) {
      fail(ErrorCode::ClassTooSmall, "class " + std::string(to_string(l)) + " has " +
                                         std::to_string(idx.size()) + " rows, holdout needs " +
                                         std::to_string(spec.holdout_per_class));
    }
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t k = 0; k < spec.holdout_per_class; ++k) to_test[idx[k]] = true;
  }
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < d.rows(); ++i) (to_test[i] ? test : train).push_back(i);
  return {d.subset(train), d.subset(test)};
}

// Holdout size used by default: 10% of the minority class.
inline std::size_t default_holdout_per_class(const Dataset& d) {
  return std::min(d.count(Label::Hi), d.count(Label::Lo)) / 10;
}

}  // namespace engage
