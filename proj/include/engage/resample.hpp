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

// SMOTE oversampling, Tomek-link cleaning, the balanced training variants,
// and Gaussian kernel density curves for comparing feature distributions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "engage/dataset.hpp"
#include "engage/error.hpp"
#include "engage/parallel.hpp"
#include "engage/random.hpp"

namespace engage {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// The k nearest rows of `pool` to pool[q] (excluding q), ties by position.
inline std::vector<std::size_t> nearest_in_pool(const Dataset& d, std::span<const std::size_t> pool,
                                                std::size_t q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p) {
    if (p == q) continue;
    dist.emplace_back(squared_distance(d.row(pool[q]), d.row(pool[p])), p);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

// x + u (y - x)
inline std::vector<double> interpolate(std::span<const double> x, std::span<const double> y, double u) {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = x[j] + u * (y[j] - x[j]);
  return out;
}

struct SmoteOptions {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::string id_prefix = "syn";
};

// Grows each class to its target size. Synthetic points interpolate between
// an original (non-synthetic) member and one of its k nearest original
// same-class neighbours; existing rows are retained unchanged.
inline Dataset smote(const Dataset& d, const std::map<Label, std::size_t>& target_per_class,
                     const SmoteOptions& opts = {}) {
  Dataset out = d;
  Rng rng(derive_seed(opts.seed, "smote"));
  std::size_t counter = 0;
  for (Label l : {Label::Hi, Label::Lo}) {
    auto it = target_per_class.find(l);
    if (it == target_per_class.end()) continue;
    const std::size_t have = d.count(l);
    if (it->second <= have) continue;
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      if (d.labels[i] == l && !d.is_synthetic(i)) pool.push_back(i);
    }
    if (pool.size() < 2) {
      fail(ErrorCode::ClassOfSizeOne, "class " + std::string(to_string(l)) + " has fewer than 2 original rows");
    }
    const std::size_t k = std::max<std::size_t>(1, std::min(opts.k, pool.size() - 1));
    std::vector<std::vector<std::size_t>> neighbours(pool.size());
    parallel_for(pool.size(), [&](std::size_t q) { neighbours[q] = nearest_in_pool(d, pool, q, k); });
    for (std::size_t n = have; n < it->second; ++n) {
      const std::size_t q = rng.index(pool.size());
      const std::size_t nn = neighbours[q][rng.index(neighbours[q].size())];
      double u = rng.uniform();
      while (u == 0.0) u = rng.uniform();
      const auto point = interpolate(d.row(pool[q]), d.row(pool[nn]), u);
      out.add_row(opts.id_prefix + "-" + std::to_string(counter++), l, point,
                  {d.ids[pool[q]], d.ids[pool[nn]]});
    }
  }
  return out;
}

struct TomekLink {
  std::size_t a;
  std::size_t b;
};

// Mutual 1-NN pairs of opposite classes (Euclidean; ties to the lower index).
inline std::vector<TomekLink> tomek_links(const Dataset& d) {
  const std::size_t n = d.rows();
  std::vector<std::size_t> nn(n, SIZE_MAX);
  parallel_for(n, [&](std::size_t i) {
    double best = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dist = squared_distance(d.row(i), d.row(j));
      if (dist < best) {
        best = dist;
        nn[i] = j;
      }
    }
  });
  std::vector<TomekLink> links;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = nn[i];
    if (j != SIZE_MAX && i < j && nn[j] == i && d.labels[i] != d.labels[j]) links.push_back({i, j});
  }
  return links;
}

inline Label majority_label(const Dataset& d) {
  return d.count(Label::Hi) >= d.count(Label::Lo) ? Label::Hi : Label::Lo;
}

// Removes the majority member of every Tomek link. `majority` defaults to
// the larger class (HI on ties).
inline Dataset tomek_remove_majority(const Dataset& d, std::optional<Label> majority = std::nullopt,
                                     std::size_t* removed = nullptr) {
  const Label maj = majority.value_or(majority_label(d));
  std::vector<bool> drop(d.rows(), false);
  for (const auto& link : tomek_links(d)) {
    drop[d.labels[link.a] == maj ? link.a : link.b] = true;
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (!drop[i]) keep.push_back(i);
  }
  if (removed) *removed = d.rows() - keep.size();
  return d.subset(keep);
}

inline Dataset downsample_class(const Dataset& d, Label l, std::size_t target, Rng& rng) {
  auto idx = d.indices_of(l);
  if (idx.size() <= target) return d;
  rng.shuffle(std::span<std::size_t>(idx));
  std::vector<bool> drop(d.rows(), false);
  for (std::size_t k = target; k < idx.size(); ++k) drop[idx[k]] = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (!drop[i]) keep.push_back(i);
  }
  return d.subset(keep);
}

enum class VariantKind { DownsampleMajority, MatchMajority, FixedSize };

struct VariantSpec {
  std::string name;
  VariantKind kind = VariantKind::FixedSize;
  std::size_t per_class = 0;  // FixedSize only
};

inline std::vector<VariantSpec> default_variants() {
  return {{"dataset0", VariantKind::DownsampleMajority, 0},
          {"dataset1", VariantKind::MatchMajority, 0},
          {"dataset2", VariantKind::FixedSize, 200},
          {"dataset3", VariantKind::FixedSize, 300}};
}

struct Variant {
  VariantSpec spec;
  Dataset data;
  std::size_t tomek_removed = 0;
};

// SMOTE both classes up to `per_class`, drop Tomek-link majority members,
// then SMOTE again to restore exact balance.
inline Dataset smote_tomek_balanced(const Dataset& train, std::size_t per_class, std::uint64_t seed,
                                    const std::string& prefix, std::size_t k = 5,
                                    std::size_t* tomek_removed = nullptr) {
  Rng rng(derive_seed(seed, prefix + ":down"));
  const Label maj = majority_label(train);
  Dataset d = train;
  for (Label l : {Label::Hi, Label::Lo}) d = downsample_class(d, l, per_class, rng);
  const std::map<Label, std::size_t> target = {{Label::Hi, per_class}, {Label::Lo, per_class}};
  d = smote(d, target, {k, derive_seed(seed, prefix + ":smote"), prefix});
  d = tomek_remove_majority(d, maj, tomek_removed);
  return smote(d, target, {k, derive_seed(seed, prefix + ":topup"), prefix + "t"});
}

inline Variant make_variant(const Dataset& train, const VariantSpec& spec, std::uint64_t seed,
                            std::size_t k = 5) {
  const std::size_t hi = train.count(Label::Hi);
  const std::size_t lo = train.count(Label::Lo);
  if (hi == 0 || lo == 0) fail(ErrorCode::DegenerateLabels, "variants need both classes");
  Variant v{spec, {}, 0};
  const std::uint64_t s = derive_seed(seed, spec.name);
  switch (spec.kind) {
    case VariantKind::DownsampleMajority: {
      Rng rng(s);
      v.data = downsample_class(train, majority_label(train), std::min(hi, lo), rng);
      break;
    }
    case VariantKind::MatchMajority:
      v.data = smote_tomek_balanced(train, std::max(hi, lo), s, spec.name, k, &v.tomek_removed);
      break;
    case VariantKind::FixedSize:
      v.data = smote_tomek_balanced(train, spec.per_class, s, spec.name, k, &v.tomek_removed);
      break;
  }
  return v;
}

inline std::vector<Variant> make_variants(const Dataset& train, std::uint64_t seed,
                                          const std::vector<VariantSpec>& specs = default_variants(),
                                          std::size_t k = 5) {
  std::vector<Variant> out;
  for (const auto& spec : specs) out.push_back(make_variant(train, spec, seed, k));
  return out;
}

// ---------------------------------------------------------------------------
// Kernel density estimation

struct KdePoint {
  double x;
  double density;
};

// Silverman's rule with the sample standard deviation.
inline double silverman_bandwidth(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  double mean = 0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1));
  return 1.06 * sd * std::pow(n, -0.2);
}

inline double kde_density(std::span<const double> values, double h, double x) {
  double s = 0;
  for (double v : values) {
    const double z = (x - v) / h;
    s += std::exp(-0.5 * z * z);
  }
  return s / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
}

inline std::vector<KdePoint> kde_curve(std::span<const double> values, std::size_t grid = 200) {
  if (values.size() < 2) fail(ErrorCode::DegenerateSample, "KDE needs at least 2 values");
  const double h = silverman_bandwidth(values);
  if (!(h > 0)) fail(ErrorCode::DegenerateSample, "KDE of a constant sample");
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  const double lo = *mn - 3 * h;
  const double hi = *mx + 3 * h;
  std::vector<KdePoint> out(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid - 1);
    out[g] = {x, kde_density(values, h, x)};
  }
  return out;
}

inline double trapezoid(std::span<const KdePoint> curve) {
  double s = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    s += 0.5 * (curve[i].density + curve[i - 1].density) * (curve[i].x - curve[i - 1].x);
  }
  return s;
}

// Overlap coefficient of two KDEs, integral of min(f, g), on a shared grid.
inline double kde_overlap(std::span<const double> a, std::span<const double> b, std::size_t grid = 400) {
  if (a.size() < 2 || b.size() < 2) fail(ErrorCode::DegenerateSample, "KDE overlap needs 2+ values each");
  const double ha = silverman_bandwidth(a);
  const double hb = silverman_bandwidth(b);
  if (!(ha > 0) || !(hb > 0)) fail(ErrorCode::DegenerateSample, "KDE of a constant sample");
  const double lo = std::min(*std::min_element(a.begin(), a.end()) - 4 * ha,
                             *std::min_element(b.begin(), b.end()) - 4 * hb);
  const double hi = std::max(*std::max_element(a.begin(), a.end()) + 4 * ha,
                             *std::max_element(b.begin(), b.end()) + 4 * hb);
  double s = 0;
  double prev = 0;
  for (std::size_t g = 0; g < grid; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid - 1);
    const double m = std::min(kde_density(a, ha, x), kde_density(b, hb, x));
    if (g) s += 0.5 * (m + prev) * (hi - lo) / static_cast<double>(grid - 1);
    prev = m;
  }
  return s;
}

}  // namespace engage
