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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "engage/preprocess.hpp"
#include "engage/random.hpp"

namespace engage {
namespace {

Dataset column(std::initializer_list<double> xs) {
  Dataset d = make_dataset(1);
  for (double x : xs) d.add_row("r" + std::to_string(d.rows()), Label::Hi, std::vector<double>{x});
  return d;
}

Dataset gaussian_cloud(std::size_t n, std::uint64_t seed, std::size_t width = 2) {
  Dataset d = make_dataset(width);
  Rng rng(seed);
  std::vector<double> x(width);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.normal();
    d.add_row("g" + std::to_string(i), i % 2 ? Label::Hi : Label::Lo, x);
  }
  return d;
}

Dataset labelled(std::size_t hi, std::size_t lo, std::uint64_t seed) {
  Dataset d = make_dataset(3);
  Rng rng(seed);
  for (std::size_t i = 0; i < hi + lo; ++i) {
    d.add_row("s" + std::to_string(i), i < hi ? Label::Hi : Label::Lo,
              std::vector<double>{rng.uniform(), rng.uniform(), rng.uniform()});
  }
  return d;
}

TEST(Impute, FillsFromOwnMeans) {
  const auto d = column({1, kMissing, 3});
  const auto out = impute_means(d, d);
  EXPECT_EQ(out.values, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(out.missing_cells(), 0u);
}

TEST(Impute, IdentityWithoutMissing) {
  const auto d = column({4, 5, 9});
  EXPECT_EQ(impute_means(d, d).values, d.values);
}

TEST(Impute, TestRowsUseTrainingMeans) {
  const auto train = column({10, 20});
  const auto test = column({kMissing, 1000});
  const auto out = impute_means(test, train);
  EXPECT_DOUBLE_EQ(out.at(0, 0), 15);
  EXPECT_DOUBLE_EQ(out.at(1, 0), 1000);
}

TEST(Impute, AllMissingFeatureRejected) {
  const auto d = column({kMissing, kMissing});
  try {
    impute_means(d, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllMissingFeature);
  }
}

TEST(MinMax, Examples) {
  const auto d = column({2, 4, 6});
  const auto p = minmax_fit(d);
  EXPECT_EQ(minmax_apply(d, p).values, (std::vector<double>{0, 0.5, 1}));
  EXPECT_DOUBLE_EQ(minmax_apply(column({8, 0, 3}), p).at(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(minmax_apply(column({8, 0, 3}), p).at(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(minmax_apply(column({8, 0, 3}), p).at(2, 0), 0.25);
  const auto flat = column({7, 7, 7});
  EXPECT_EQ(minmax_apply(flat, minmax_fit(flat)).values, (std::vector<double>{0, 0, 0}));
}

TEST(MinMax, ImputeThenScaleStaysInUnitBox) {
  Rng rng(5);
  Dataset d = make_dataset(4);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> x(4);
    for (auto& v : x) v = rng.uniform() < 0.2 ? kMissing : rng.normal() * 50;
    d.add_row("r" + std::to_string(i), Label::Lo, x);
  }
  const auto out = minmax_apply(impute_means(d, d), minmax_fit(impute_means(d, d)));
  EXPECT_EQ(out.missing_cells(), 0u);
  for (double v : out.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(PreprocessParams, JsonRoundTrip) {
  const auto d = column({2, 4, 9});
  const auto means = fit_means(d);
  const auto mm = minmax_fit(d);
  const auto doc = preprocess_params_json(d.feature_names, means, mm);
  EXPECT_DOUBLE_EQ(doc["x0"]["mean"].get<double>(), 5);
  EXPECT_DOUBLE_EQ(doc["x0"]["min"].get<double>(), 2);
  EXPECT_DOUBLE_EQ(doc["x0"]["max"].get<double>(), 9);
  std::vector<double> means2;
  MinMaxParams mm2;
  preprocess_params_from_json(doc, d.feature_names, means2, mm2);
  EXPECT_EQ(means2, means);
  EXPECT_EQ(mm2.min, mm.min);
  EXPECT_EQ(mm2.max, mm.max);
}

TEST(IsolationScore, FixedPointAndLimits) {
  for (double n : {2.0, 10.0, 256.0}) {
    EXPECT_DOUBLE_EQ(anomaly_score(average_path_length(n), n), 0.5);
    EXPECT_GT(anomaly_score(1e-9, n), 0.999);
    EXPECT_LT(anomaly_score(100 * average_path_length(n), n), 1e-6);
  }
  EXPECT_DOUBLE_EQ(average_path_length(1), 0);
  EXPECT_DOUBLE_EQ(average_path_length(2), 1);
  EXPECT_NEAR(average_path_length(256), 2 * (std::log(255.0) + kEulerGamma) - 2 * 255.0 / 256, 1e-12);
}

TEST(IsolationForest, PlantedOutlierScoresHighest) {
  auto d = gaussian_cloud(200, 11);
  d.add_row("outlier", Label::Hi, std::vector<double>{10, 10});
  const auto forest = IsolationForest::fit(d, 42);
  EXPECT_EQ(forest.tree_count(), 100u);
  EXPECT_EQ(forest.subsample_size(), 201u);
  double best = -1;
  std::size_t arg = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double s = forest.score(d.row(i));
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
    if (s > best) {
      best = s;
      arg = i;
    }
  }
  EXPECT_EQ(d.ids[arg], "outlier");
  EXPECT_GT(best, 0.6);
}

TEST(IsolationForest, TooFewRows) {
  try {
    IsolationForest::fit(column({1}), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewRows);
  }
}

TEST(IsolationForest, Deterministic) {
  const auto d = gaussian_cloud(300, 3, 5);
  const auto a = IsolationForest::fit(d, 9);
  const auto b = IsolationForest::fit(d, 9);
  EXPECT_EQ(a.subsample_size(), 256u);
  for (std::size_t i = 0; i < d.rows(); i += 17) EXPECT_EQ(a.score(d.row(i)), b.score(d.row(i)));
}

TEST(IsolationForest, FeaturePermutationInvariantInExpectation) {
  auto d = gaussian_cloud(150, 21, 3);
  for (std::size_t i = 0; i < d.rows(); ++i) d.at(i, 2) *= 3;
  Dataset p = d.empty_like();
  for (std::size_t i = 0; i < d.rows(); ++i) {
    p.add_row(d.ids[i], d.labels[i], std::vector<double>{d.at(i, 2), d.at(i, 0), d.at(i, 1)});
  }
  const std::vector<double> probe = {2.5, -1.0, 4.0};
  const std::vector<double> probe_p = {4.0, 2.5, -1.0};
  double sa = 0, sb = 0;
  const int seeds = 30;
  for (int s = 0; s < seeds; ++s) {
    sa += IsolationForest::fit(d, s).score(probe);
    sb += IsolationForest::fit(p, 1000 + s).score(probe_p);
  }
  EXPECT_NEAR(sa / seeds, sb / seeds, 0.01);
}

TEST(RemoveOutliers, CountArithmetic) {
  EXPECT_EQ(outlier_count(13.0 / 253.0, 253), 13u);
  EXPECT_EQ(outlier_count(0.05, 20), 1u);
  const auto d = gaussian_cloud(253, 8);
  const auto r = remove_outliers(d, 13.0 / 253.0, 1);
  EXPECT_EQ(r.removed_ids.size(), 13u);
  EXPECT_EQ(r.kept.rows(), 240u);
  EXPECT_EQ(remove_outliers(gaussian_cloud(20, 2), 0.05, 1).kept.rows(), 19u);
}

TEST(RemoveOutliers, PlantedRowsGoFirst) {
  auto d = gaussian_cloud(200, 13);
  d.add_row("p1", Label::Hi, std::vector<double>{10, 10});
  d.add_row("p2", Label::Lo, std::vector<double>{-9, 11});
  d.add_row("p3", Label::Hi, std::vector<double>{12, -10});
  const auto r = remove_outliers(d, 3.0 / 203.0, 4);
  EXPECT_EQ(std::set<std::string>(r.removed_ids.begin(), r.removed_ids.end()),
            (std::set<std::string>{"p1", "p2", "p3"}));
}

TEST(RemoveOutliers, ContaminationRange) {
  const auto d = gaussian_cloud(20, 2);
  EXPECT_THROW(remove_outliers(d, 0.0, 1), Error);
  EXPECT_THROW(remove_outliers(d, 0.5, 1), Error);
}

TEST(Holdout, CohortCounts) {
  const auto d = labelled(145, 95, 1);
  EXPECT_EQ(default_holdout_per_class(d), 9u);
  const auto s = balanced_holdout_split(d, {9, 77});
  EXPECT_EQ(s.test.rows(), 18u);
  EXPECT_EQ(s.test.count(Label::Hi), 9u);
  EXPECT_EQ(s.train.count(Label::Hi), 136u);
  EXPECT_EQ(s.train.count(Label::Lo), 86u);
  EXPECT_EQ(s.train.rows(), 222u);
}

TEST(Holdout, PartitionAndSeeding) {
  const auto d = labelled(145, 95, 1);
  const auto a = balanced_holdout_split(d, {9, 1});
  const auto b = balanced_holdout_split(d, {9, 2});
  std::set<std::string> all(a.train.ids.begin(), a.train.ids.end());
  for (const auto& id : a.test.ids) EXPECT_TRUE(all.insert(id).second);
  EXPECT_EQ(all, std::set<std::string>(d.ids.begin(), d.ids.end()));
  EXPECT_EQ(b.test.rows(), a.test.rows());
  EXPECT_NE(a.test.ids, b.test.ids);
  EXPECT_EQ(balanced_holdout_split(d, {9, 1}).test.ids, a.test.ids);
}

TEST(Holdout, ClassTooSmall) {
  try {
    balanced_holdout_split(labelled(20, 5, 1), {9, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ClassTooSmall);
  }
}

}  // namespace
}  // namespace engage
