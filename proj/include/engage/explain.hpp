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

// Model-agnostic Shapley attribution by Monte Carlo permutation sampling,
// and the mean-|value| feature ranking.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "engage/csv.hpp"
#include "engage/dataset.hpp"
#include "engage/error.hpp"
#include "engage/models.hpp"
#include "engage/parallel.hpp"
#include "engage/pipeline.hpp"
#include "engage/random.hpp"
#include "engage/text.hpp"

namespace engage {

// A model evaluated on a point that changes one coordinate at a time.
class PointEvaluator {
 public:
  virtual ~PointEvaluator() = default;
  virtual void reset(std::span<const double> x) = 0;
  virtual void set(std::size_t j, double v) = 0;
  virtual double value() = 0;
};

// Re-evaluates the whole function after every change.
class FunctionEvaluator final : public PointEvaluator {
 public:
  explicit FunctionEvaluator(std::function<double(std::span<const double>)> f) : f_(std::move(f)) {}
  void reset(std::span<const double> x) override { x_.assign(x.begin(), x.end()); }
  void set(std::size_t j, double v) override { x_[j] = v; }
  double value() override { return f_(x_); }

 private:
  std::function<double(std::span<const double>)> f_;
  std::vector<double> x_;
};

// Tree ensembles: only trees whose current root-to-leaf path tests the
// changed feature are re-traversed. Leaf values are re-summed in the
// model's own order, so results equal full evaluation bit for bit.
class TreeEnsembleEvaluator final : public PointEvaluator {
 public:
  // Forest: mean of leaf values. Boosting: sigmoid(init + lr * sum).
  TreeEnsembleEvaluator(const std::vector<Tree>& trees, bool boosted, double init, double lr)
      : trees_(trees), boosted_(boosted), init_(init), lr_(lr), leaf_(trees.size()), mask_(trees.size()) {}

  void reset(std::span<const double> x) override {
    x_.assign(x.begin(), x.end());
    for (std::size_t t = 0; t < trees_.size(); ++t) descend(t);
  }

  void set(std::size_t j, double v) override {
    x_[j] = v;
    const std::uint64_t bit = std::uint64_t{1} << j;
    for (std::size_t t = 0; t < trees_.size(); ++t) {
      if (mask_[t] & bit) descend(t);
    }
  }

  double value() override {
    if (boosted_) {
      double f = init_;
      for (std::size_t t = 0; t < trees_.size(); ++t) f += lr_ * trees_[t].nodes[leaf_[t]].value;
      return sigmoid(f);
    }
    double s = 0;
    for (std::size_t t = 0; t < trees_.size(); ++t) s += trees_[t].nodes[leaf_[t]].value;
    return s / static_cast<double>(trees_.size());
  }

 private:
  void descend(std::size_t t) {
    const auto& nodes = trees_[t].nodes;
    std::uint64_t mask = 0;
    std::size_t i = 0;
    while (!nodes[i].leaf()) {
      const auto& n = nodes[i];
      mask |= std::uint64_t{1} << n.feature;
      i = static_cast<std::size_t>(x_[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    leaf_[t] = i;
    mask_[t] = mask;
  }

  const std::vector<Tree>& trees_;
  bool boosted_;
  double init_;
  double lr_;
  std::vector<double> x_;
  std::vector<std::size_t> leaf_;
  std::vector<std::uint64_t> mask_;
};

// SVM: dot products with each support vector are updated per coordinate.
class SvmEvaluator final : public PointEvaluator {
 public:
  explicit SvmEvaluator(const SvmModel& m) : m_(m), dots_(m.coef.size()), sv_sq_(m.coef.size()) {
    for (std::size_t k = 0; k < m.coef.size(); ++k) {
      const std::span<const double> sv(m.support.data() + k * m.dim, m.dim);
      sv_sq_[k] = dot(sv, sv);
    }
  }

  void reset(std::span<const double> x) override {
    x_.assign(x.begin(), x.end());
    sq_ = dot(x, x);
    for (std::size_t k = 0; k < dots_.size(); ++k) {
      dots_[k] = dot(std::span<const double>(m_.support.data() + k * m_.dim, m_.dim), x);
    }
  }

  void set(std::size_t j, double v) override {
    const double delta = v - x_[j];
    if (delta == 0) return;
    sq_ += v * v - x_[j] * x_[j];
    x_[j] = v;
    for (std::size_t k = 0; k < dots_.size(); ++k) dots_[k] += m_.support[k * m_.dim + j] * delta;
  }

  double value() override {
    double f = -m_.rho;
    for (std::size_t k = 0; k < dots_.size(); ++k) {
      f += m_.coef[k] * kernel_from_dot(m_.kernel, m_.gamma, dots_[k], sv_sq_[k], sq_);
    }
    return std::clamp(platt_predict(m_.platt, f), 0.0, 1.0);
  }

 private:
  const SvmModel& m_;
  std::vector<double> x_;
  std::vector<double> dots_;
  std::vector<double> sv_sq_;
  double sq_ = 0;
};

inline std::unique_ptr<PointEvaluator> make_evaluator(const TrainedModel& m) {
  if (m.feature_count <= 64) {
    if (const auto* f = std::get_if<Forest>(&m.impl)) {
      return std::make_unique<TreeEnsembleEvaluator>(f->trees, false, 0.0, 0.0);
    }
    if (const auto* b = std::get_if<Boosted>(&m.impl)) {
      return std::make_unique<TreeEnsembleEvaluator>(b->stages, true, b->init, b->learning_rate);
    }
  }
  if (const auto* s = std::get_if<SvmModel>(&m.impl)) return std::make_unique<SvmEvaluator>(*s);
  return std::make_unique<FunctionEvaluator>([&m](std::span<const double> x) { return m.predict_proba(x); });
}

struct ShapleyEstimate {
  std::vector<double> phi;
  double fx = 0;        // f(x)
  double sum_sd = 0;    // sd of the per-sample total f(x) - f(z)
  std::size_t samples = 0;
};

// m samples of (random permutation, random background row z). Walking the
// permutation moves the point from z to x one feature at a time; each
// feature is credited with the change it causes.
inline ShapleyEstimate shapley_sample(PointEvaluator& f, std::span<const double> x, const Dataset& background,
                                      std::size_t m, std::uint64_t seed) {
  if (background.rows() == 0) fail(ErrorCode::TooFewRows, "Shapley sampling needs a background");
  if (background.cols() != x.size()) fail(ErrorCode::DimensionMismatch, "background width differs from the row");
  if (m == 0) fail(ErrorCode::InvalidArgument, "Shapley sampling needs m >= 1");
  const std::size_t n = x.size();
  Rng rng(seed);
  ShapleyEstimate est;
  est.phi.assign(n, 0.0);
  est.samples = m;
  f.reset(x);
  est.fx = f.value();
  std::vector<std::size_t> perm(n);
  double s1 = 0, s2 = 0;
  for (std::size_t it = 0; it < m; ++it) {
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    const auto z = background.row(rng.index(background.rows()));
    f.reset(z);
    double prev = f.value();
    const double fz = prev;
    for (std::size_t j : perm) {
      f.set(j, x[j]);
      const double v = f.value();
      est.phi[j] += v - prev;
      prev = v;
    }
    const double total = est.fx - fz;
    s1 += total;
    s2 += total * total;
  }
  for (auto& p : est.phi) p /= static_cast<double>(m);
  const double mean = s1 / static_cast<double>(m);
  est.sum_sd = m > 1 ? std::sqrt(std::max(0.0, (s2 - m * mean * mean) / static_cast<double>(m - 1))) : 0.0;
  return est;
}

inline ShapleyEstimate shapley_sample(const TrainedModel& model, std::span<const double> x, const Dataset& background,
                                      std::size_t m, std::uint64_t seed) {
  auto f = make_evaluator(model);
  return shapley_sample(*f, x, background, m, seed);
}

// Exact interventional Shapley values by enumerating all 2^F coalitions;
// v(S) = mean over background rows z of f(x_S, z_rest). For small F only.
inline std::vector<double> exact_shapley(const std::function<double(std::span<const double>)>& f,
                                         std::span<const double> x, const Dataset& background) {
  const std::size_t n = x.size();
  if (n > 16) fail(ErrorCode::InvalidArgument, "exact Shapley limited to 16 features");
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<double> v(subsets, 0.0);
  std::vector<double> point(n);
  for (std::size_t s = 0; s < subsets; ++s) {
    for (std::size_t b = 0; b < background.rows(); ++b) {
      const auto z = background.row(b);
      for (std::size_t j = 0; j < n; ++j) point[j] = (s >> j) & 1 ? x[j] : z[j];
      v[s] += f(point);
    }
    v[s] /= static_cast<double>(background.rows());
  }
  std::vector<double> fact(n + 1, 1.0);
  for (std::size_t k = 1; k <= n; ++k) fact[k] = fact[k - 1] * static_cast<double>(k);
  std::vector<double> phi(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t s = 0; s < subsets; ++s) {
      if ((s >> j) & 1) continue;
      const auto size = static_cast<std::size_t>(std::popcount(s));
      const double w = fact[size] * fact[n - size - 1] / fact[n];
      phi[j] += w * (v[s | (std::size_t{1} << j)] - v[s]);
    }
  }
  return phi;
}

// ---------------------------------------------------------------------------
// Ranking

struct ShapEntry {
  std::string feature_id;
  std::string dimension;
  double mean_abs = 0;
  std::size_t rank = 0;
};

struct ShapKindReport {
  ModelKind kind = ModelKind::RandomForest;
  std::vector<ShapEntry> entries;  // in rank order
};

struct ShapReport {
  std::vector<ShapKindReport> kinds;
};

inline std::string dimension_tag(const std::string& feature_id) {
  for (const auto& f : kFeatureRegistry) {
    if (f.id == feature_id) return std::string(to_string(f.dimension));
  }
  return "";
}

// Mean |phi| per feature over every row and every model; descending rank,
// ties in feature order.
inline ShapKindReport shap_ranking(std::span<const TrainedModel> models, const Dataset& rows, const Dataset& background,
                                   std::size_t m, std::uint64_t seed) {
  if (models.empty()) fail(ErrorCode::InvalidArgument, "SHAP ranking needs at least one model");
  const std::size_t f = rows.cols();
  std::vector<std::vector<double>> per_row(rows.rows(), std::vector<double>(f, 0.0));
  parallel_for(rows.rows(), [&](std::size_t i) {
    const std::uint64_t row_seed = derive_seed(seed, rows.ids[i]);
    for (std::size_t k = 0; k < models.size(); ++k) {
      const auto est = shapley_sample(models[k], rows.row(i), background, m, derive_seed(row_seed, k));
      for (std::size_t j = 0; j < f; ++j) per_row[i][j] += std::abs(est.phi[j]);
    }
  });
  std::vector<double> mean(f, 0.0);
  for (const auto& r : per_row) {
    for (std::size_t j = 0; j < f; ++j) mean[j] += r[j];
  }
  for (auto& v : mean) v /= static_cast<double>(rows.rows() * models.size());
  std::vector<std::size_t> order(f);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mean[a] > mean[b]; });
  ShapKindReport rep;
  rep.kind = models[0].kind();
  for (std::size_t r = 0; r < f; ++r) {
    const auto j = order[r];
    rep.entries.push_back({rows.feature_names[j], dimension_tag(rows.feature_names[j]), mean[j], r + 1});
  }
  return rep;
}

// Background: up to `size` rows drawn without replacement, in input order.
inline Dataset sample_background(const Dataset& d, std::size_t size, std::uint64_t seed) {
  if (d.rows() <= size) return d;
  std::vector<std::size_t> idx(d.rows());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, "background"));
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(size);
  std::sort(idx.begin(), idx.end());
  return d.subset(idx);
}

inline std::string shap_report_csv(const ShapReport& r) {
  std::string out = csv::format_row({"kind", "feature_id", "dimension", "mean_abs_shap", "rank"});
  for (const auto& k : r.kinds) {
    for (const auto& e : k.entries) {
      out += csv::format_row({std::string(to_string(k.kind)), e.feature_id, e.dimension,
                              text::format_double(e.mean_abs), std::to_string(e.rank)});
    }
  }
  return out;
}

}  // namespace engage
