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

// CART classification trees, random forests, and logistic gradient boosting.
//
// Every tree node draws its feature subset from an RNG seeded by the tree
// seed and the node's path id. Because of this a tree grown with loose
// limits, then read with tighter depth/min-split limits, is identical to a
// tree grown with the tighter limits; grid search exploits that.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "engage/dataset.hpp"
#include "engage/error.hpp"
#include "engage/parallel.hpp"
#include "engage/random.hpp"

namespace engage {

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0;       // x[feature] <= threshold goes left; always a training value
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0;           // HI probability (CART) or leaf output (boosting)
  std::uint32_t count = 0;    // distinct training rows reaching the node
  std::uint16_t depth = 0;

  bool leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (!nodes[i].leaf()) {
      const auto& n = nodes[i];
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes[i].value;
  }

  // Prediction of the same tree grown with tighter depth/min-split limits.
  double predict_limited(std::span<const double> x, int max_depth, std::uint32_t min_split) const {
    std::size_t i = 0;
    for (;;) {
      const auto& n = nodes[i];
      if (n.leaf() || n.depth >= max_depth || n.count < min_split) return n.value;
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
  }

  // Node indices from root to leaf.
  void path(std::span<const double> x, std::vector<std::uint32_t>& out) const {
    out.clear();
    std::size_t i = 0;
    for (;;) {
      out.push_back(static_cast<std::uint32_t>(i));
      const auto& n = nodes[i];
      if (n.leaf()) return;
      i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
  }

  int depth() const {
    int d = 0;
    for (const auto& n : nodes) d = std::max<int>(d, n.depth);
    return d;
  }
};

// ---------------------------------------------------------------------------
// CART

struct CartOptions {
  int max_depth = 30;
  std::uint32_t min_samples_split = 2;
  std::uint32_t min_samples_leaf = 1;
  std::size_t max_features = 0;  // 0 = all features
};

inline std::size_t sqrt_features(std::size_t f) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(f))));
}

namespace detail {

class CartBuilder {
 public:
  CartBuilder(const Dataset& d, std::span<const double> weights, const CartOptions& opts, std::uint64_t seed)
      : d_(d), w_(weights), opts_(opts), seed_(seed) {
    const std::size_t f = d.cols();
    mtry_ = opts.max_features == 0 ? f : std::min(opts.max_features, f);
    y_.resize(d.rows());
    for (std::size_t i = 0; i < d.rows(); ++i) y_[i] = d.labels[i] == Label::Hi ? 1.0 : 0.0;
  }

  Tree build() {
    std::vector<std::uint32_t> rows;
    for (std::size_t i = 0; i < d_.rows(); ++i) {
      if (w_[i] > 0) rows.push_back(static_cast<std::uint32_t>(i));
    }
    if (rows.empty()) fail(ErrorCode::TooFewRows, "tree fit on an empty sample");
    Tree t;
    grow(rows, 0, 1, t);
    return t;
  }

 private:
  struct Item {
    double x;
    double w;
    double wy;
  };

  std::int32_t grow(std::vector<std::uint32_t>& rows, int depth, std::uint64_t path, Tree& t) {
    double wt = 0, wp = 0;
    for (auto r : rows) {
      wt += w_[r];
      wp += w_[r] * y_[r];
    }
    const auto id = static_cast<std::int32_t>(t.nodes.size());
    TreeNode node;
    node.value = wp / wt;
    node.count = static_cast<std::uint32_t>(rows.size());
    node.depth = static_cast<std::uint16_t>(depth);
    t.nodes.push_back(node);
    if (depth >= opts_.max_depth || rows.size() < opts_.min_samples_split || wp <= 0 || wp >= wt) return id;

    Rng rng(derive_seed(seed_, path));
    const std::size_t f = d_.cols();
    order_.resize(f);
    std::iota(order_.begin(), order_.end(), 0);
    std::size_t visited = 0;
    double best_score = -INFINITY;
    std::size_t best_feature = 0;
    double best_threshold = 0;
    const std::size_t m = rows.size();
    items_.resize(m);
    for (std::size_t k = 0; k < f && visited < mtry_; ++k) {
      std::swap(order_[k], order_[k + rng.index(f - k)]);
      const std::size_t feat = order_[k];
      for (std::size_t i = 0; i < m; ++i) {
        const auto r = rows[i];
        items_[i] = {d_.at(r, feat), w_[r], w_[r] * y_[r]};
      }
      std::sort(items_.begin(), items_.end(), [](const Item& a, const Item& b) { return a.x < b.x; });
      if (items_.front().x == items_.back().x) continue;
      ++visited;
      double lw = 0, lp = 0;
      for (std::size_t i = 0; i + 1 < m; ++i) {
        lw += items_[i].w;
        lp += items_[i].wy;
        if (items_[i].x == items_[i + 1].x) continue;
        if (i + 1 < opts_.min_samples_leaf || m - i - 1 < opts_.min_samples_leaf) continue;
        const double rw = wt - lw, rp = wp - lp;
        const double ln = lw - lp, rn = rw - rp;
        // Maximizing this minimizes the weighted Gini impurity of the children.
        const double score = (lp * lp + ln * ln) / lw + (rp * rp + rn * rn) / rw;
        if (score > best_score) {
          best_score = score;
          best_feature = feat;
          best_threshold = items_[i].x;
        }
      }
    }
    if (best_score == -INFINITY) return id;

    std::vector<std::uint32_t> left, right;
    for (auto r : rows) (d_.at(r, best_feature) <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    t.nodes[static_cast<std::size_t>(id)].feature = static_cast<std::int32_t>(best_feature);
    t.nodes[static_cast<std::size_t>(id)].threshold = best_threshold;
    const auto l = grow(left, depth + 1, path * 2, t);
    t.nodes[static_cast<std::size_t>(id)].left = l;
    const auto r = grow(right, depth + 1, path * 2 + 1, t);
    t.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const Dataset& d_;
  std::span<const double> w_;
  CartOptions opts_;
  std::uint64_t seed_;
  std::size_t mtry_ = 0;
  std::vector<double> y_;
  std::vector<std::size_t> order_;
  std::vector<Item> items_;
};

}  // namespace detail

// Gini CART over rows with positive weight. Leaves hold the weighted HI rate.
inline Tree fit_tree(const Dataset& d, std::span<const double> weights, const CartOptions& opts,
                     std::uint64_t seed) {
  if (weights.size() != d.rows()) fail(ErrorCode::DimensionMismatch, "one weight per row expected");
  return detail::CartBuilder(d, weights, opts, seed).build();
}

inline Tree fit_tree(const Dataset& d, const CartOptions& opts, std::uint64_t seed) {
  const std::vector<double> w(d.rows(), 1.0);
  return fit_tree(d, w, opts, seed);
}

// ---------------------------------------------------------------------------
// Random forest

inline std::uint64_t forest_tree_seed(std::uint64_t seed, std::size_t t) { return derive_seed(seed, t); }

// Bootstrap counts for tree t: n draws with replacement.
inline std::vector<double> bootstrap_weights(std::size_t n, std::uint64_t tree_seed) {
  Rng rng(derive_seed(tree_seed, std::uint64_t{0}));
  std::vector<double> w(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) w[rng.index(n)] += 1.0;
  return w;
}

struct Forest {
  std::vector<Tree> trees;

  double predict(std::span<const double> x) const {
    double s = 0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
  }
};

// Tree t depends only on (seed, t), so a forest of n trees is the prefix of
// any larger forest grown with the same seed and options.
inline Forest fit_forest(const Dataset& d, std::size_t n_trees, const CartOptions& opts, std::uint64_t seed) {
  if (d.rows() == 0) fail(ErrorCode::TooFewRows, "forest fit on an empty dataset");
  Forest f;
  f.trees.resize(n_trees);
  parallel_for(n_trees, [&](std::size_t t) {
    const auto ts = forest_tree_seed(seed, t);
    const auto w = bootstrap_weights(d.rows(), ts);
    f.trees[t] = fit_tree(d, w, opts, ts);
  });
  return f;
}

// ---------------------------------------------------------------------------
// Gradient boosting

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double log_loss(std::span<const double> y, std::span<const double> p) {
  constexpr double eps = 1e-15;
  double s = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double q = std::clamp(p[i], eps, 1 - eps);
    s -= y[i] * std::log(q) + (1 - y[i]) * std::log(1 - q);
  }
  return s / static_cast<double>(y.size());
}

inline constexpr std::size_t kMaxBins = 32;
inline constexpr double kLeafClamp = 4.0;

// Candidate split points per feature: every distinct training value but the
// largest, thinned to row quantiles when there are kMaxBins or more.
inline std::vector<std::vector<double>> quantile_borders(const Dataset& d, std::size_t max_bins = kMaxBins) {
  std::vector<std::vector<double>> borders(d.cols());
  std::vector<double> col(d.rows());
  for (std::size_t j = 0; j < d.cols(); ++j) {
    for (std::size_t i = 0; i < d.rows(); ++i) col[i] = d.at(i, j);
    std::sort(col.begin(), col.end());
    std::vector<double> cuts;
    for (std::size_t i = 1; i < col.size(); ++i) {
      if (col[i] != col[i - 1]) cuts.push_back(col[i - 1]);
    }
    if (cuts.size() < max_bins) {
      borders[j] = std::move(cuts);
      continue;
    }
    // Borders at evenly spaced row quantiles, deduplicated.
    auto& b = borders[j];
    for (std::size_t q = 1; q < max_bins; ++q) {
      const std::size_t k = q * col.size() / max_bins;
      const double lo = col[k - 1];
      if (lo == col[k]) continue;
      if (b.empty() || lo > b.back()) b.push_back(lo);
    }
  }
  return borders;
}

struct Boosted {
  double init = 0;
  double learning_rate = 0.1;
  std::vector<Tree> stages;

  double margin(std::span<const double> x, std::size_t n_stages) const {
    double f = init;
    const std::size_t k = std::min(n_stages, stages.size());
    for (std::size_t s = 0; s < k; ++s) f += learning_rate * stages[s].predict(x);
    return f;
  }
  double predict(std::span<const double> x) const { return sigmoid(margin(x, stages.size())); }
  double predict(std::span<const double> x, std::size_t n_stages) const { return sigmoid(margin(x, n_stages)); }
};

namespace detail {

class RegressionTreeBuilder {
 public:
  RegressionTreeBuilder(const std::vector<std::vector<double>>& borders, const std::vector<std::uint8_t>& codes,
                        std::size_t n, int max_depth)
      : borders_(borders), codes_(codes), n_(n), max_depth_(max_depth) {
    hist_sum_.resize(kMaxBins);
    hist_cnt_.resize(kMaxBins);
  }

  // Fits residuals r, writes Newton leaf values from p, and records each
  // row's leaf output in `out`.
  Tree build(std::span<const double> r, std::span<const double> p, std::span<double> out) {
    rows_.resize(n_);
    std::iota(rows_.begin(), rows_.end(), 0u);
    Tree t;
    grow(0, n_, 0, r, p, out, t);
    return t;
  }

 private:
  std::int32_t grow(std::size_t begin, std::size_t end, int depth, std::span<const double> r,
                    std::span<const double> p, std::span<double> out, Tree& t) {
    const std::size_t m = end - begin;
    double g = 0, h = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const auto i = rows_[k];
      g += r[i];
      h += p[i] * (1 - p[i]);
    }
    const auto id = static_cast<std::int32_t>(t.nodes.size());
    TreeNode node;
    node.count = static_cast<std::uint32_t>(m);
    node.depth = static_cast<std::uint16_t>(depth);
    double v;
    if (h > 1e-300) {
      v = std::clamp(g / h, -kLeafClamp, kLeafClamp);
    } else {
      v = g > 0 ? kLeafClamp : (g < 0 ? -kLeafClamp : 0.0);
    }
    node.value = v;
    t.nodes.push_back(node);

    std::size_t best_f = 0, best_bin = 0;
    double best = -INFINITY;
    if (depth < max_depth_ && m >= 2) {
      const double base = g * g / static_cast<double>(m);
      for (std::size_t f = 0; f < borders_.size(); ++f) {
        const std::size_t nb = borders_[f].size() + 1;
        if (nb < 2) continue;
        std::fill_n(hist_sum_.begin(), nb, 0.0);
        std::fill_n(hist_cnt_.begin(), nb, 0u);
        const std::uint8_t* c = codes_.data() + f * n_;
        for (std::size_t k = begin; k < end; ++k) {
          const auto i = rows_[k];
          hist_sum_[c[i]] += r[i];
          ++hist_cnt_[c[i]];
        }
        double ls = 0;
        std::uint32_t lc = 0;
        for (std::size_t b = 0; b + 1 < nb; ++b) {
          if (hist_cnt_[b] == 0) continue;
          ls += hist_sum_[b];
          lc += hist_cnt_[b];
          if (lc == m) break;
          const double rs = g - ls;
          const double gain = ls * ls / lc + rs * rs / static_cast<double>(m - lc) - base;
          if (gain > best) {
            best = gain;
            best_f = f;
            best_bin = b;
          }
        }
      }
    }
    if (!(best > 1e-12 * (1 + std::abs(g)))) {
      for (std::size_t k = begin; k < end; ++k) out[rows_[k]] = v;
      return id;
    }
    const std::uint8_t* c = codes_.data() + best_f * n_;
    const auto mid_it = std::stable_partition(rows_.begin() + static_cast<std::ptrdiff_t>(begin),
                                              rows_.begin() + static_cast<std::ptrdiff_t>(end),
                                              [&](std::uint32_t i) { return c[i] <= best_bin; });
    const std::size_t mid = static_cast<std::size_t>(mid_it - rows_.begin());
    auto& n = t.nodes[static_cast<std::size_t>(id)];
    n.feature = static_cast<std::int32_t>(best_f);
    n.threshold = borders_[best_f][best_bin];
    n.value = 0;
    const auto l = grow(begin, mid, depth + 1, r, p, out, t);
    t.nodes[static_cast<std::size_t>(id)].left = l;
    const auto rr = grow(mid, end, depth + 1, r, p, out, t);
    t.nodes[static_cast<std::size_t>(id)].right = rr;
    return id;
  }

  const std::vector<std::vector<double>>& borders_;
  const std::vector<std::uint8_t>& codes_;
  std::size_t n_;
  int max_depth_;
  std::vector<std::uint32_t> rows_;
  std::vector<double> hist_sum_;
  std::vector<std::uint32_t> hist_cnt_;
};

}  // namespace detail

struct BoostOptions {
  std::size_t iterations = 200;
  int depth = 6;
  double learning_rate = 0.1;
};

// Logistic-loss boosting: F0 = log-odds of the HI rate, each stage a
// squared-error regression tree on y - p with Newton leaf values.
// `train_loss`, when given, receives the training log-loss after each stage.
inline Boosted fit_boosted(const Dataset& d, const BoostOptions& opts, std::vector<double>* train_loss = nullptr) {
  const std::size_t n = d.rows();
  const std::size_t pos = d.count(Label::Hi);
  if (pos == 0 || pos == n) fail(ErrorCode::DegenerateLabels, "boosting needs both classes");
  const auto borders = quantile_borders(d);
  std::vector<std::uint8_t> codes(d.cols() * n);
  for (std::size_t f = 0; f < d.cols(); ++f) {
    const auto& b = borders[f];
    for (std::size_t i = 0; i < n; ++i) {
      codes[f * n + i] =
          static_cast<std::uint8_t>(std::lower_bound(b.begin(), b.end(), d.at(i, f)) - b.begin());
    }
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = label_value(d.labels[i]);
  const double pbar = static_cast<double>(pos) / static_cast<double>(n);
  Boosted model;
  model.init = std::log(pbar / (1 - pbar));
  model.learning_rate = opts.learning_rate;
  model.stages.reserve(opts.iterations);
  std::vector<double> f(n, model.init), p(n), r(n), leaf(n);
  detail::RegressionTreeBuilder builder(borders, codes, n, opts.depth);
  if (train_loss) train_loss->clear();
  for (std::size_t s = 0; s < opts.iterations; ++s) {
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = sigmoid(f[i]);
      r[i] = y[i] - p[i];
    }
    model.stages.push_back(builder.build(r, p, leaf));
    for (std::size_t i = 0; i < n; ++i) f[i] += opts.learning_rate * leaf[i];
    if (train_loss) {
      for (std::size_t i = 0; i < n; ++i) p[i] = sigmoid(f[i]);
      train_loss->push_back(log_loss(y, p));
    }
  }
  return model;
}

}  // namespace engage
