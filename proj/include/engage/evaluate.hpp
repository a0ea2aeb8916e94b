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

// Stratified cross-validation, per-fold grid search, holdout metrics, and
// Pearson correlation analysis.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "engage/csv.hpp"
#include "engage/dataset.hpp"
#include "engage/error.hpp"
#include "engage/models.hpp"
#include "engage/parallel.hpp"
#include "engage/random.hpp"
#include "engage/resample.hpp"
#include "engage/text.hpp"

namespace engage {

// ---------------------------------------------------------------------------
// Folds

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Rows of each class are shuffled, then dealt round-robin to the k folds,
// so per-class fold sizes differ by at most one.
inline std::vector<Fold> stratified_kfold(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "k-fold needs k >= 2");
  Rng rng(derive_seed(seed, "kfold"));
  std::vector<std::size_t> fold_of(labels.size());
  for (Label l : {Label::Hi, Label::Lo}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == l) idx.push_back(i);
    }
    if (idx.size() < k) {
      fail(ErrorCode::ClassSmallerThanK, "class " + std::string(to_string(l)) + " has " + std::to_string(idx.size()) +
                                             " rows, fewer than k = " + std::to_string(k));
    }
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t p = 0; p < idx.size(); ++p) fold_of[idx[p]] = p % k;
  }
  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t f = 0; f < k; ++f) (fold_of[i] == f ? folds[f].val : folds[f].train).push_back(i);
  }
  return folds;
}

inline std::vector<Fold> stratified_kfold(const Dataset& d, std::size_t k, std::uint64_t seed) {
  return stratified_kfold(std::span<const Label>(d.labels), k, seed);
}

// ---------------------------------------------------------------------------
// Metrics

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct Metrics {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::optional<double> auc;
  Confusion confusion;
  bool precision_undefined = false;
  bool recall_undefined = false;
};

// Mann-Whitney U / (n+ n-) with mid-ranks for ties. y: 1 = HI.
inline double auc_score(std::span<const int> y, std::span<const double> score) {
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  double pos = 0, rank_sum = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && score[order[j]] == score[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1 .. j
    for (std::size_t k = i; k < j; ++k) {
      if (y[order[k]] == 1) rank_sum += mid;
    }
    i = j;
  }
  for (int v : y) pos += v == 1;
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0 || neg == 0) fail(ErrorCode::SingleClassTruth, "AUC needs both classes in the truth");
  return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

inline Metrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred, std::span<const double> score) {
  if (y_true.empty() || y_true.size() != y_pred.size() || y_true.size() != score.size()) {
    fail(ErrorCode::InvalidArgument, "metrics need non-empty aligned inputs");
  }
  Metrics m;
  auto& c = m.confusion;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] == 1) (y_pred[i] == 1 ? c.tp : c.fn)++;
    else (y_pred[i] == 1 ? c.fp : c.tn)++;
  }
  const double tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  m.accuracy = (tp + tn) / (tp + tn + fp + fn);
  m.precision_undefined = c.tp + c.fp == 0;
  m.recall_undefined = c.tp + c.fn == 0;
  m.precision = m.precision_undefined ? 0 : tp / (tp + fp);
  m.recall = m.recall_undefined ? 0 : tp / (tp + fn);
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0;
  try {
    m.auc = auc_score(y_true, score);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingleClassTruth) throw;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Pearson correlation

inline std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n < 2 || b.size() != n) return std::nullopt;
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0 || sbb == 0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct CorrelatedPair {
  std::string a;
  std::string b;
  double r;
};

struct PearsonResult {
  std::vector<std::string> names;
  std::vector<std::optional<double>> r;  // names.size()^2, row-major
  std::vector<CorrelatedPair> strong;    // r > threshold, descending

  std::optional<double> at(std::size_t i, std::size_t j) const { return r[i * names.size() + j]; }
};

inline PearsonResult pearson_matrix(const Dataset& d, double threshold = 0.75) {
  PearsonResult res;
  res.names = d.feature_names;
  const std::size_t f = d.cols();
  std::vector<std::vector<double>> cols(f, std::vector<double>(d.rows()));
  for (std::size_t i = 0; i < d.rows(); ++i) {
    for (std::size_t j = 0; j < f; ++j) cols[j][i] = d.at(i, j);
  }
  res.r.assign(f * f, std::nullopt);
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = i; j < f; ++j) {
      auto v = pearson(cols[i], cols[j]);
      if (i == j && v) v = 1.0;
      res.r[i * f + j] = v;
      res.r[j * f + i] = v;
      if (i != j && v && *v > threshold) res.strong.push_back({d.feature_names[i], d.feature_names[j], *v});
    }
  }
  std::stable_sort(res.strong.begin(), res.strong.end(),
                   [](const CorrelatedPair& x, const CorrelatedPair& y) { return x.r > y.r; });
  return res;
}

inline std::string pearson_csv(const PearsonResult& p) {
  std::string out;
  std::vector<std::string> header = {"feature"};
  header.insert(header.end(), p.names.begin(), p.names.end());
  out += csv::format_row(header);
  for (std::size_t i = 0; i < p.names.size(); ++i) {
    std::vector<std::string> row = {p.names[i]};
    for (std::size_t j = 0; j < p.names.size(); ++j) {
      const auto v = p.at(i, j);
      row.push_back(v ? text::format_double(*v) : "");
    }
    out += csv::format_row(row);
  }
  return out;
}

inline std::string strong_pairs_csv(const PearsonResult& p) {
  std::string out = csv::format_row({"feature_a", "feature_b", "r"});
  for (const auto& s : p.strong) out += csv::format_row({s.a, s.b, text::format_double(s.r)});
  return out;
}

// ---------------------------------------------------------------------------
// Per-configuration validation probabilities

namespace detail {

inline std::vector<int> truth(const Dataset& d) {
  std::vector<int> y(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) y[i] = d.labels[i] == Label::Hi ? 1 : 0;
  return y;
}

// All RF configs sharing min_samples_leaf come from one forest grown with
// the loosest depth/split limits and the most trees.
inline void rf_group_predictions(const Dataset& train, const Dataset& val, std::span<const HyperParams> grid,
                                 std::span<const std::size_t> members, std::uint64_t seed,
                                 std::vector<std::optional<std::vector<double>>>& out) {
  RfParams loose = std::get<RfParams>(grid[members[0]]);
  for (auto m : members) {
    const auto& p = std::get<RfParams>(grid[m]);
    loose.n_estimators = std::max(loose.n_estimators, p.n_estimators);
    loose.max_depth = std::max(loose.max_depth, p.max_depth);
    loose.min_samples_split = std::min(loose.min_samples_split, p.min_samples_split);
  }
  const auto forest = fit_forest(train, static_cast<std::size_t>(loose.n_estimators),
                                 rf_cart_options(loose, train.cols()), seed);
  // Distinct (depth, split) reads and the tree counts at which to snapshot.
  std::vector<std::pair<int, int>> reads;
  std::vector<std::size_t> read_of(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto& p = std::get<RfParams>(grid[members[k]]);
    const std::pair<int, int> key{p.max_depth, p.min_samples_split};
    auto it = std::find(reads.begin(), reads.end(), key);
    read_of[k] = static_cast<std::size_t>(it - reads.begin());
    if (it == reads.end()) reads.push_back(key);
  }
  for (auto m : members) out[m] = std::vector<double>(val.rows());
  std::vector<double> acc(reads.size());
  std::vector<std::uint32_t> path;
  for (std::size_t i = 0; i < val.rows(); ++i) {
    const auto x = val.row(i);
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t t = 0; t < forest.trees.size(); ++t) {
      const auto& tree = forest.trees[t];
      tree.path(x, path);
      for (std::size_t r = 0; r < reads.size(); ++r) {
        const auto [depth, split] = reads[r];
        std::size_t stop = 0;
        for (; stop + 1 < path.size(); ++stop) {
          const auto& n = tree.nodes[path[stop]];
          if (n.depth >= depth || n.count < static_cast<std::uint32_t>(split)) break;
        }
        acc[r] += tree.nodes[path[stop]].value;
      }
      for (std::size_t k = 0; k < members.size(); ++k) {
        const auto& p = std::get<RfParams>(grid[members[k]]);
        if (static_cast<std::size_t>(p.n_estimators) == t + 1) {
          (*out[members[k]])[i] = acc[read_of[k]] / static_cast<double>(t + 1);
        }
      }
    }
  }
}

inline void gbt_group_predictions(const Dataset& train, const Dataset& val, std::span<const HyperParams> grid,
                                  std::span<const std::size_t> members,
                                  std::vector<std::optional<std::vector<double>>>& out) {
  const auto& first = std::get<GbtParams>(grid[members[0]]);
  int most = 0;
  for (auto m : members) most = std::max(most, std::get<GbtParams>(grid[m]).iterations);
  const auto model = fit_boosted(train, {static_cast<std::size_t>(most), first.depth, first.learning_rate});
  for (auto m : members) out[m] = std::vector<double>(val.rows());
  for (std::size_t i = 0; i < val.rows(); ++i) {
    const auto x = val.row(i);
    double f = model.init;
    for (std::size_t s = 0; s < model.stages.size(); ++s) {
      f += model.learning_rate * model.stages[s].predict(x);
      for (auto m : members) {
        if (static_cast<std::size_t>(std::get<GbtParams>(grid[m]).iterations) == s + 1) (*out[m])[i] = sigmoid(f);
      }
    }
  }
}

inline void svm_predictions(const Dataset& train, const Dataset& val, std::span<const HyperParams> grid,
                            std::span<const std::size_t> members, const SvmFitOptions& opts,
                            std::vector<std::optional<std::vector<double>>>& out) {
  const auto gram = Gram::of(train);
  std::vector<double> cross(val.rows() * train.rows()), vsq(val.rows());
  for (std::size_t i = 0; i < val.rows(); ++i) {
    vsq[i] = dot(val.row(i), val.row(i));
    for (std::size_t j = 0; j < train.rows(); ++j) cross[i * train.rows() + j] = dot(val.row(i), train.row(j));
  }
  for (auto m : members) {
    const auto& p = std::get<SvmParams>(grid[m]);
    try {
      const auto model = fit_svm_gram(train, gram, p.c, p.kernel, resolve_gamma(p.gamma, train), opts);
      std::vector<double> probs(val.rows());
      for (std::size_t i = 0; i < val.rows(); ++i) {
        double f = -model.rho;
        for (std::size_t k = 0; k < model.coef.size(); ++k) {
          const auto j = model.support_rows[k];
          f += model.coef[k] * kernel_from_dot(model.kernel, model.gamma, cross[i * train.rows() + j], gram.sq[j], vsq[i]);
        }
        probs[i] = std::clamp(platt_predict(model.platt, f), 0.0, 1.0);
      }
      out[m] = std::move(probs);
    } catch (const Error&) {
      out[m] = std::nullopt;
    }
  }
}

}  // namespace detail

// HI probabilities on `val` for every config in `grid`, identical to fitting
// each config with fit_model(train, hp, seed). A config whose fit fails
// yields nullopt.
inline std::vector<std::optional<std::vector<double>>> config_probabilities(const Dataset& train, const Dataset& val,
                                                                           std::span<const HyperParams> grid,
                                                                           std::uint64_t seed,
                                                                           const SvmFitOptions& svm_opts = {}) {
  std::vector<std::optional<std::vector<double>>> out(grid.size());
  // Group configs that can share one fit.
  std::map<std::pair<int, std::string>, std::vector<std::size_t>> groups;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto& hp = grid[g];
    std::string key;
    if (const auto* p = std::get_if<RfParams>(&hp)) key = std::to_string(p->min_samples_leaf);
    if (const auto* p = std::get_if<GbtParams>(&hp)) key = std::to_string(p->depth) + "/" + text::format_double(p->learning_rate);
    groups[{static_cast<int>(hp.index()), key}].push_back(g);
  }
  for (const auto& [key, members] : groups) {
    try {
      switch (static_cast<ModelKind>(key.first)) {
        case ModelKind::RandomForest: detail::rf_group_predictions(train, val, grid, members, seed, out); break;
        case ModelKind::Boosting: detail::gbt_group_predictions(train, val, grid, members, out); break;
        case ModelKind::Svm: detail::svm_predictions(train, val, grid, members, svm_opts, out); break;
      }
    } catch (const Error&) {
      for (auto m : members) out[m] = std::nullopt;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid search

struct ConfigScore {
  double f1 = 0;
  double auc = 0;
  std::size_t failures = 0;
};

struct GridSearchResult {
  std::size_t best = 0;
  HyperParams best_params;
  std::vector<ConfigScore> scores;
};

// Inner stratified CV on train_part; picks the highest mean F1, then the
// highest mean AUC, then the first config in grid order.
inline GridSearchResult grid_search_fold(const Dataset& train_part, std::span<const HyperParams> grid,
                                         std::uint64_t seed, std::size_t inner_folds = 3,
                                         const SvmFitOptions& svm_opts = {}) {
  if (grid.empty()) fail(ErrorCode::InvalidArgument, "empty hyperparameter grid");
  GridSearchResult res;
  res.scores.resize(grid.size());
  if (grid.size() > 1) {
    const auto folds = stratified_kfold(train_part, inner_folds, derive_seed(seed, "inner"));
    std::vector<std::vector<std::optional<std::vector<double>>>> probs(folds.size());
    parallel_for(folds.size(), [&](std::size_t f) {
      probs[f] = config_probabilities(train_part.subset(folds[f].train), train_part.subset(folds[f].val), grid,
                                      derive_seed(seed, f), svm_opts);
    });
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto y = detail::truth(train_part.subset(folds[f].val));
      for (std::size_t g = 0; g < grid.size(); ++g) {
        auto& sc = res.scores[g];
        if (!probs[f][g]) {
          ++sc.failures;
          continue;
        }
        const auto& p = *probs[f][g];
        std::vector<int> pred(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) pred[i] = p[i] >= 0.5 ? 1 : 0;
        const auto m = compute_metrics(y, pred, p);
        sc.f1 += m.f1;
        sc.auc += m.auc.value_or(0.0);
      }
    }
    for (auto& sc : res.scores) {
      sc.f1 /= static_cast<double>(folds.size());
      sc.auc /= static_cast<double>(folds.size());
    }
    for (std::size_t g = 1; g < grid.size(); ++g) {
      const auto& a = res.scores[g];
      const auto& b = res.scores[res.best];
      if (a.f1 > b.f1 || (a.f1 == b.f1 && a.auc > b.auc)) res.best = g;
    }
  }
  res.best_params = grid[res.best];
  return res;
}

// ---------------------------------------------------------------------------
// Holdout protocol

struct FoldResult {
  HyperParams best;
  Metrics holdout;
  std::vector<double> holdout_scores;
};

struct MetricSummary {
  double mean = 0;
  double sd = 0;
};

struct CellResult {
  ModelKind kind = ModelKind::RandomForest;
  std::string variant;
  std::size_t per_class = 0;
  std::vector<FoldResult> folds;
  std::vector<TrainedModel> models;
  std::map<std::string, MetricSummary> summary;  // accuracy, precision, recall, f1, auc
  HyperParams best_params;                       // most frequent fold choice
};

struct EvalReport {
  std::vector<CellResult> cells;
  std::map<std::string, std::vector<Fold>> folds;  // outer folds per variant

  const CellResult* find(ModelKind k, const std::string& variant) const {
    for (const auto& c : cells) {
      if (c.kind == k && c.variant == variant) return &c;
    }
    return nullptr;
  }
};

struct ProtocolOptions {
  std::size_t folds = 5;
  std::size_t inner_folds = 3;
  GridSpec grid;
  std::vector<ModelKind> kinds = {ModelKind::RandomForest, ModelKind::Boosting, ModelKind::Svm};
  SvmFitOptions svm;
};

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"accuracy", "precision", "recall", "f1", "auc"};
  return names;
}

inline MetricSummary summarize(std::span<const double> v) {
  MetricSummary s;
  if (v.empty()) return {kMissing, kMissing};
  // Identical entries summarize exactly, so 5 equal folds report sd 0.
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v[0]; })) return {v[0], 0.0};
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(s.sd / static_cast<double>(v.size()));
  return s;
}

// For each variant and kind: k outer folds on the variant; per fold, grid
// search then refit on the fold's training part; every fold model is
// scored on the untouched holdout.
inline EvalReport evaluate_protocol(const Dataset& holdout, const std::vector<Variant>& variants,
                                    const ProtocolOptions& opts, std::uint64_t seed) {
  struct Task {
    std::size_t cell;
    std::size_t fold;
  };
  EvalReport report;
  std::vector<std::vector<Fold>> folds_of(variants.size());
  std::vector<Task> tasks;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    folds_of[v] = stratified_kfold(variants[v].data, opts.folds, derive_seed(seed, variants[v].spec.name + ":folds"));
    for (ModelKind k : opts.kinds) {
      CellResult cell;
      cell.kind = k;
      cell.variant = variants[v].spec.name;
      cell.per_class = variants[v].data.count(Label::Hi);
      cell.folds.resize(opts.folds);
      cell.models.resize(opts.folds);
      for (std::size_t f = 0; f < opts.folds; ++f) tasks.push_back({report.cells.size(), f});
      report.cells.push_back(std::move(cell));
    }
  }
  for (std::size_t v = 0; v < variants.size(); ++v) report.folds[variants[v].spec.name] = folds_of[v];
  const auto y = detail::truth(holdout);
  const std::size_t per_variant = opts.kinds.size();
  parallel_for(tasks.size(), [&](std::size_t t) {
    auto& cell = report.cells[tasks[t].cell];
    const std::size_t v = tasks[t].cell / per_variant;
    const std::size_t f = tasks[t].fold;
    const auto& data = variants[v].data;
    const auto part = data.subset(folds_of[v][f].train);
    const std::uint64_t s = derive_seed(derive_seed(derive_seed(seed, cell.variant), std::string(to_string(cell.kind))), f);
    const auto grid = expand_grid(cell.kind, opts.grid);
    const auto gs = grid_search_fold(part, grid, s, opts.inner_folds, opts.svm);
    auto model = fit_model(part, gs.best_params, derive_seed(s, std::uint64_t{0}), opts.svm);
    FoldResult fr;
    fr.best = gs.best_params;
    fr.holdout_scores.resize(holdout.rows());
    std::vector<int> pred(holdout.rows());
    for (std::size_t i = 0; i < holdout.rows(); ++i) {
      fr.holdout_scores[i] = model.predict_proba(holdout.row(i));
      pred[i] = fr.holdout_scores[i] >= 0.5 ? 1 : 0;
    }
    fr.holdout = compute_metrics(y, pred, fr.holdout_scores);
    cell.folds[f] = std::move(fr);
    cell.models[f] = std::move(model);
  });
  for (auto& cell : report.cells) {
    std::map<std::string, std::vector<double>> vals;
    for (const auto& fr : cell.folds) {
      vals["accuracy"].push_back(fr.holdout.accuracy);
      vals["precision"].push_back(fr.holdout.precision);
      vals["recall"].push_back(fr.holdout.recall);
      vals["f1"].push_back(fr.holdout.f1);
      if (fr.holdout.auc) vals["auc"].push_back(*fr.holdout.auc);
    }
    for (const auto& name : metric_names()) cell.summary[name] = summarize(vals[name]);
    std::size_t best_count = 0;
    for (std::size_t f = 0; f < cell.folds.size(); ++f) {
      std::size_t c = 0;
      for (const auto& other : cell.folds) c += other.best == cell.folds[f].best;
      if (c > best_count) {
        best_count = c;
        cell.best_params = cell.folds[f].best;
      }
    }
  }
  return report;
}

inline std::string eval_report_csv(const EvalReport& r) {
  std::vector<std::string> header = {"dataset", "per_class", "classifier"};
  for (const auto& m : metric_names()) {
    header.push_back(m + "_mean");
    header.push_back(m + "_sd");
  }
  header.push_back("best_params");
  std::string out = csv::format_row(header);
  for (const auto& c : r.cells) {
    std::vector<std::string> row = {c.variant, std::to_string(c.per_class), std::string(to_string(c.kind))};
    for (const auto& m : metric_names()) {
      const auto& s = c.summary.at(m);
      row.push_back(is_missing(s.mean) ? "" : text::format_double(s.mean));
      row.push_back(is_missing(s.sd) ? "" : text::format_double(s.sd));
    }
    row.push_back(describe(c.best_params));
    out += csv::format_row(row);
  }
  return out;
}

inline nlohmann::ordered_json eval_report_json(const EvalReport& r) {
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    nlohmann::ordered_json cj;
    cj["dataset"] = c.variant;
    cj["per_class"] = c.per_class;
    cj["classifier"] = std::string(to_string(c.kind));
    nlohmann::ordered_json summary;
    for (const auto& m : metric_names()) {
      const auto& s = c.summary.at(m);
      summary[m] = {{"mean", is_missing(s.mean) ? nlohmann::ordered_json() : nlohmann::ordered_json(s.mean)},
                    {"sd", is_missing(s.sd) ? nlohmann::ordered_json() : nlohmann::ordered_json(s.sd)}};
    }
    cj["summary"] = summary;
    cj["best_params"] = to_json(c.best_params);
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (std::size_t f = 0; f < c.folds.size(); ++f) {
      const auto& fr = c.folds[f];
      const auto& m = fr.holdout;
      folds.push_back({{"fold", f},
                       {"best_params", to_json(fr.best)},
                       {"accuracy", m.accuracy},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"auc", m.auc ? nlohmann::ordered_json(*m.auc) : nlohmann::ordered_json()},
                       {"precision_undefined", m.precision_undefined},
                       {"recall_undefined", m.recall_undefined},
                       {"confusion", {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"fn", m.confusion.fn}, {"tn", m.confusion.tn}}},
                       {"holdout_scores", fr.holdout_scores}});
    }
    cj["folds"] = folds;
    cells.push_back(cj);
  }
  return {{"cells", cells}};
}

}  // namespace engage
