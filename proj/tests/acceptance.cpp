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


// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status
// is non-zero when any gated criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "engage/cli.hpp"
#include "engage/evaluate.hpp"
#include "engage/explain.hpp"
#include "engage/features_conv.hpp"
#include "engage/features_semantic.hpp"
#include "engage/models.hpp"
#include "engage/preprocess.hpp"
#include "engage/protocol.hpp"
#include "engage/resample.hpp"
#include "engage/synth.hpp"
#include "engage/trees.hpp"

namespace {

using namespace engage;
namespace fs = std::filesystem;

// Collects the first few failed expectations of one criterion.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (messages_.size() < 5) messages_.push_back(what);
  }

  bool passed() const { return failures_ == 0; }
  std::size_t checks() const { return checks_; }

  std::string summary() const {
    std::string s = std::to_string(failures_) + " of " + std::to_string(checks_) + " checks failed";
    for (const auto& m : messages_) s += "; " + m;
    return s;
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::vector<std::string> messages_;
};

struct Outcome {
  enum class Status { Pass, Fail, Info, Skip } status = Status::Pass;
  std::string detail;
};

Outcome from(const Checker& c, const std::string& detail) {
  if (!c.passed()) return {Outcome::Status::Fail, c.summary()};
  return {Outcome::Status::Pass, detail + " (" + std::to_string(c.checks()) + " checks)"};
}

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

// ---------------------------------------------------------------------------
// Independent references

struct RefMoments {
  long double mean, sd, skew, kurt;
};

RefMoments ref_moments(const std::vector<double>& xs) {
  const long double n = static_cast<long double>(xs.size());
  long double s1 = 0;
  for (double x : xs) s1 += x;
  const long double mean = s1 / n;
  long double c2 = 0, c3 = 0, c4 = 0;
  for (double x : xs) {
    const long double d = x - mean;
    c2 += std::pow(d, 2);
    c3 += std::pow(d, 3);
    c4 += std::pow(d, 4);
  }
  c2 /= n;
  c3 /= n;
  c4 /= n;
  return {mean, std::sqrt(c2), c3 / std::pow(c2, 1.5L), c4 / (c2 * c2) - 3};
}

std::optional<long double> ref_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const long double n = static_cast<long double>(x.size());
  long double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const long double mx = sx / n, my = sy / n;
  long double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

double pair_count_auc(const std::vector<int>& y, const std::vector<double>& s) {
  double num = 0;
  double pos = 0, neg = 0;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg) += 1;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j]) continue;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return num / (pos * neg);
}

Outcome statistics_oracle() {
  Checker c;
  Rng rng(20240601);
  for (int inst = 0; inst < 1000; ++inst) {
    // Moments.
    std::vector<double> xs(4 + rng.index(60));
    for (auto& x : xs) x = rng.uniform(-10, 10);
    const auto m = moment_stats(xs);
    const auto r = ref_moments(xs);
    c.expect(close(m.mean, static_cast<double>(r.mean), 1e-9) && close(m.sd, static_cast<double>(r.sd), 1e-9) &&
                 m.skew && close(*m.skew, static_cast<double>(r.skew), 1e-9) && m.kurt &&
                 close(*m.kurt, static_cast<double>(r.kurt), 1e-9),
             "moment_stats instance " + std::to_string(inst));

    // Pearson matrix, occasionally with a constant column.
    const std::size_t n = 5 + rng.index(30), f = 2 + rng.index(5);
    Dataset d = make_dataset(f);
    const bool constant = rng.uniform() < 0.1;
    std::vector<double> row(f);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < f; ++j) row[j] = (constant && j == 0) ? 3.0 : rng.normal() + (j ? 0.5 * row[0] : 0);
      d.add_row("r" + std::to_string(i), Label::Hi, row);
    }
    const auto p = pearson_matrix(d);
    for (std::size_t a = 0; a < f; ++a) {
      for (std::size_t b = 0; b < f; ++b) {
        std::vector<double> xa(n), xb(n);
        for (std::size_t i = 0; i < n; ++i) {
          xa[i] = d.at(i, a);
          xb[i] = d.at(i, b);
        }
        const auto ref = ref_pearson(xa, xb);
        const auto got = p.at(a, b);
        c.expect(ref.has_value() == got.has_value() && (!ref || std::abs(*got - static_cast<double>(*ref)) <= 1e-9),
                 "pearson instance " + std::to_string(inst));
      }
    }

    // Metrics and AUC, with ties in the scores.
    const std::size_t k = 4 + rng.index(80);
    std::vector<int> y(k), pred(k);
    std::vector<double> s(k);
    for (std::size_t i = 0; i < k; ++i) {
      y[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.index(2));
      pred[i] = static_cast<int>(rng.index(2));
      s[i] = std::round(rng.uniform() * 10) / 10;
    }
    const auto mt = compute_metrics(y, pred, s);
    double tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (y[i] && pred[i]) ++tp;
      if (!y[i] && pred[i]) ++fp;
      if (y[i] && !pred[i]) ++fn;
      if (!y[i] && !pred[i]) ++tn;
    }
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0;
    const double rec = tp + fn > 0 ? tp / (tp + fn) : 0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0;
    c.expect(close(mt.accuracy, (tp + tn) / static_cast<double>(k), 1e-9) && close(mt.precision, prec, 1e-9) &&
                 close(mt.recall, rec, 1e-9) && close(mt.f1, f1, 1e-9),
             "metrics instance " + std::to_string(inst));
    c.expect(mt.auc && *mt.auc == pair_count_auc(y, s), "AUC instance " + std::to_string(inst));
  }
  return from(c, "1000 instances each of moments, Pearson, metrics, AUC");
}

// Upper-triangle and off-diagonal reads of a full similarity matrix.
Outcome semantic_oracle() {
  Checker c;
  Rng rng(77);
  for (int list = 0; list < 50; ++list) {
    const std::size_t n = 2 + rng.index(40), dim = 8 + rng.index(57);
    std::vector<Embedding> es(n);
    for (auto& e : es) {
      e.model = EmbeddingModel::Sbert;
      e.values.resize(dim);
      for (auto& v : e.values) v = rng.normal();
    }
    std::vector<std::vector<double>> full(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double dot = 0, nx = 0, ny = 0;
        for (std::size_t k = 0; k < dim; ++k) {
          dot += es[i].values[k] * es[j].values[k];
          nx += es[i].values[k] * es[i].values[k];
          ny += es[j].values[k] * es[j].values[k];
        }
        full[i][j] = std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
      }
    }
    const auto all = all_pairs_similarities(es);
    const auto adj = adjacent_similarities(es);
    c.expect(all.values.size() == n * (n - 1) / 2, "all-pairs size for N=" + std::to_string(n));
    c.expect(adj.values.size() == n - 1, "adjacent size for N=" + std::to_string(n));
    std::size_t idx = 0;
    bool exact = true;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) exact = exact && idx < all.values.size() && all.values[idx++] == full[i][j];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) exact = exact && adj.values[i] == full[i][i + 1];
    c.expect(exact, "elementwise mismatch in list " + std::to_string(list));
  }
  return from(c, "50 embedding lists");
}

// ---------------------------------------------------------------------------
// Pipeline counts and resampling

struct CohortPipeline {
  Dataset raw, kept, train, holdout;
  std::vector<Variant> variants;
};

CohortPipeline cohort_pipeline(std::uint64_t seed) {
  CohortPipeline p;
  MissingSummary missing;
  p.raw = build_dataset(cohort_vectors(seed), &missing);
  const auto full = impute_means(p.raw, p.raw);
  p.kept = remove_outliers(full, 13.0 / 253.0, derive_seed(seed, "outliers")).kept;
  const auto split = balanced_holdout_split(p.kept, {default_holdout_per_class(p.kept), derive_seed(seed, "split")});
  const auto means = fit_means(split.train);
  const auto mm = minmax_fit(split.train);
  p.train = minmax_apply(impute(split.train, means), mm);
  p.holdout = minmax_apply(impute(split.test, means), mm);
  p.variants = make_variants(p.train, derive_seed(seed, "variants"));
  return p;
}

Outcome pipeline_counts(const CohortPipeline& p, double seconds) {
  Checker c;
  c.expect(p.raw.rows() == 253 && p.raw.count(Label::Hi) == 150 && p.raw.count(Label::Lo) == 103, "input 150/103");
  c.expect(p.kept.rows() == 240 && p.kept.count(Label::Hi) == 145 && p.kept.count(Label::Lo) == 95,
           "post-outlier 145/95 = 240, got " + std::to_string(p.kept.rows()));
  c.expect(p.holdout.rows() == 18 && p.holdout.count(Label::Hi) == 9, "holdout 9+9");
  c.expect(p.train.rows() == 222 && p.train.count(Label::Hi) == 136 && p.train.count(Label::Lo) == 86, "train 136/86");
  const std::size_t expect[] = {86, 136, 200, 300};
  for (std::size_t v = 0; v < 4 && v < p.variants.size(); ++v) {
    c.expect(p.variants[v].data.count(Label::Hi) == expect[v] && p.variants[v].data.count(Label::Lo) == expect[v],
             p.variants[v].spec.name + " size");
  }
  c.expect(seconds < 60, "runtime under 1 min");
  return from(c, "253 -> 240 -> 18 + 222; variants 86/136/200/300 per class");
}

Outcome resampling_properties(const CohortPipeline& p) {
  Checker c;
  std::map<std::string, std::size_t> train_index;
  for (std::size_t i = 0; i < p.train.rows(); ++i) train_index[p.train.ids[i]] = i;
  std::size_t synthetic = 0;
  for (const auto& v : p.variants) {
    c.expect(v.data.count(Label::Hi) == v.data.count(Label::Lo), v.spec.name + " balanced");
    for (std::size_t i = 0; i < v.data.rows(); ++i) {
      if (!v.data.is_synthetic(i)) {
        c.expect(train_index.count(v.data.ids[i]) > 0, "original row comes from the training split");
        continue;
      }
      ++synthetic;
      const auto& par = v.data.parents[i];
      if (!train_index.count(par[0]) || !train_index.count(par[1])) {
        c.expect(false, "parents of " + v.data.ids[i] + " are training originals");
        continue;
      }
      const auto a = p.train.row(train_index[par[0]]);
      const auto b = p.train.row(train_index[par[1]]);
      c.expect(p.train.labels[train_index[par[0]]] == v.data.labels[i] &&
                   p.train.labels[train_index[par[1]]] == v.data.labels[i],
               "same-class parents");
      // x = a + u (b - a): recover u by projection, then bound the residual.
      double num = 0, den = 0;
      const auto x = v.data.row(i);
      for (std::size_t j = 0; j < x.size(); ++j) {
        num += (x[j] - a[j]) * (b[j] - a[j]);
        den += (b[j] - a[j]) * (b[j] - a[j]);
      }
      const double u = den > 0 ? num / den : 0;
      double resid = 0;
      for (std::size_t j = 0; j < x.size(); ++j) resid = std::max(resid, std::abs(a[j] + u * (b[j] - a[j]) - x[j]));
      c.expect(resid <= 1e-9 && u >= -1e-9 && u <= 1 + 1e-9, "convex combination for " + v.data.ids[i]);
    }
  }
  c.expect(synthetic > 0, "SMOTE points were produced");

  // Tomek on overlapping classes against a brute-force mutual-1NN search.
  std::size_t links_total = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    MissingSummary ms;
    const auto raw = build_dataset(synth_feature_vectors(120, 60, seed, 0.0, 0.3), &ms);
    const auto d = minmax_apply(raw, minmax_fit(raw));
    const Label maj = majority_label(d);
    auto nn = [&](std::size_t i) {
      std::size_t best = i == 0 ? 1 : 0;
      for (std::size_t j = 0; j < d.rows(); ++j) {
        if (j != i && squared_distance(d.row(i), d.row(j)) < squared_distance(d.row(i), d.row(best))) best = j;
      }
      return best;
    };
    std::set<std::string> expected;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const auto j = nn(i);
      if (d.labels[i] != d.labels[j] && nn(j) == i) expected.insert(d.labels[i] == maj ? d.ids[i] : d.ids[j]);
    }
    std::size_t removed = 0;
    const auto out = tomek_remove_majority(d, maj, &removed);
    std::set<std::string> kept(out.ids.begin(), out.ids.end()), actual;
    for (const auto& id : d.ids) {
      if (!kept.count(id)) actual.insert(id);
    }
    for (const auto& id : actual) {
      const auto i = static_cast<std::size_t>(std::find(d.ids.begin(), d.ids.end(), id) - d.ids.begin());
      c.expect(d.labels[i] == maj, "Tomek removed a minority row");
    }
    c.expect(actual == expected && removed == expected.size(), "Tomek removals equal verified links");
    links_total += expected.size();
  }
  c.expect(links_total > 0, "overlapping fixtures contain Tomek links");
  return from(c, std::to_string(synthetic) + " SMOTE points, " + std::to_string(links_total) + " Tomek removals verified");
}

// ---------------------------------------------------------------------------
// Models and Shapley

Dataset xor4() {
  Dataset d = make_dataset(2);
  d.add_row("a", Label::Lo, std::vector<double>{0, 0});
  d.add_row("b", Label::Hi, std::vector<double>{0, 1});
  d.add_row("c", Label::Hi, std::vector<double>{1, 0});
  d.add_row("d", Label::Lo, std::vector<double>{1, 1});
  return d;
}

Dataset xor_noise(std::size_t n, std::size_t noise, std::uint64_t seed) {
  Dataset d = make_dataset(2 + noise);
  Rng rng(seed);
  std::vector<double> x(2 + noise);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform();
    d.add_row("r" + std::to_string(i), (x[0] > 0.5) != (x[1] > 0.5) ? Label::Hi : Label::Lo, x);
  }
  return d;
}

Dataset separable(std::size_t n, std::uint64_t seed) {
  Dataset d = make_dataset(2);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const bool hi = i % 2 == 0;
    d.add_row("s" + std::to_string(i), hi ? Label::Hi : Label::Lo,
              std::vector<double>{hi ? 1 + rng.uniform() : -1 - rng.uniform(), rng.uniform(-1, 1)});
  }
  return d;
}

double accuracy(const TrainedModel& m, const Dataset& d) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) ok += m.predict(d.row(i)) == (d.labels[i] == Label::Hi ? 1 : 0);
  return static_cast<double>(ok) / static_cast<double>(d.rows());
}

Outcome model_sanity() {
  Checker c;
  const auto sep = separable(60, 1);
  const auto lin = fit_model(sep, SvmParams{100, Kernel::Linear, {}}, 1);
  c.expect(accuracy(lin, sep) == 1.0, "linear SVM train accuracy 100%");
  const double resid = std::get<SvmModel>(lin.impl).residual;
  c.expect(resid <= 1e-3, "KKT residual " + text::format_double(resid));

  const auto x4 = xor4();
  c.expect(accuracy(fit_model(x4, SvmParams{100, Kernel::Rbf, {GammaKind::Value, 1}}, 1), x4) == 1.0, "rbf SVM on XOR");
  CartOptions depth2;
  depth2.max_depth = 2;
  const auto tree = fit_tree(x4, depth2, 1);
  bool tree_ok = true;
  for (std::size_t i = 0; i < 4; ++i) tree_ok = tree_ok && (tree.predict(x4.row(i)) >= 0.5) == (x4.labels[i] == Label::Hi);
  c.expect(tree_ok, "depth-2 tree on XOR");

  std::vector<double> losses;
  const auto noisy = xor_noise(150, 5, 6);
  for (double lr : {0.01, 0.05, 0.1}) {
    fit_boosted(noisy, {750, 8, lr}, &losses);
    bool mono = true;
    for (std::size_t s = 1; s < losses.size(); ++s) mono = mono && losses[s] <= losses[s - 1] + 1e-12;
    c.expect(mono, "GBT log-loss non-increasing at learning rate " + text::format_double(lr));
  }
  const auto xn = xor_noise(200, 3, 2024);
  const double acc = accuracy(fit_model(xn, RfParams{500, 30, 2, 1}, 7), xn);
  c.expect(acc >= 0.95, "RF XOR-plus-noise accuracy " + text::format_double(acc));
  return from(c, "SVM residual " + text::format_double(resid) + ", RF accuracy " + text::format_double(acc));
}

Dataset uniform_rows(std::size_t n, std::size_t width, std::uint64_t seed) {
  Dataset d = make_dataset(width);
  Rng rng(seed);
  std::vector<double> x(width);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = rng.uniform();
    d.add_row("u" + std::to_string(i), x[0] + x[1] > 1 ? Label::Hi : Label::Lo, x);
  }
  return d;
}

double tiny_tree(std::span<const double> x) {
  if (x[0] > 0.5) return x[1] > 0.5 ? 0.9 : 0.4;
  return x[2] > 0.5 ? 0.7 : 0.1;
}

Outcome shapley_properties() {
  Checker c;
  {
    FunctionEvaluator f([](std::span<const double> x) { return 0.3 * x[0] + 0.5 * x[1] * x[1]; });
    const auto bg = uniform_rows(100, 3, 1);
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto est = shapley_sample(f, bg.row(s), bg, 2000, s);
      c.expect(std::abs(est.phi[2]) < 0.02, "null player");
    }
  }
  {
    FunctionEvaluator f([](std::span<const double> x) { return 1.0 / (1.0 + std::exp(-6.0 * (x[0] + x[1] - 1.0))); });
    // Symmetry needs a background that is exchangeable in the two features.
    const auto half = uniform_rows(100, 2, 2);
    Dataset bg = make_dataset(2);
    for (std::size_t i = 0; i < half.rows(); ++i) {
      const auto r = half.row(i);
      bg.add_row(half.ids[i], half.labels[i], std::vector<double>{r[0], r[1]});
      bg.add_row(half.ids[i] + "s", half.labels[i], std::vector<double>{r[1], r[0]});
    }
    for (std::uint64_t s = 0; s < 5; ++s) {
      const std::vector<double> x = {0.55 + 0.08 * static_cast<double>(s), 0.55 + 0.08 * static_cast<double>(s)};
      const auto est = shapley_sample(f, x, bg, 2000, 10 + s);
      c.expect(std::abs(est.phi[0] - est.phi[1]) < 0.05, "symmetry");
    }
  }
  {
    Dataset bg = make_dataset(3);
    Rng rng(3);
    for (int i = 0; i < 40; ++i) {
      bg.add_row(std::to_string(i), Label::Hi,
                 std::vector<double>{double(rng.uniform() < 0.5), double(rng.uniform() < 0.5), double(rng.uniform() < 0.5)});
    }
    for (int code = 0; code < 8; ++code) {
      const std::vector<double> x = {double(code & 1), double((code >> 1) & 1), double((code >> 2) & 1)};
      const auto exact = exact_shapley(tiny_tree, x, bg);
      FunctionEvaluator f(tiny_tree);
      const auto est = shapley_sample(f, x, bg, 5000, 100 + code);
      for (std::size_t j = 0; j < 3; ++j) c.expect(std::abs(est.phi[j] - exact[j]) <= 0.02, "exact enumeration match");
    }
  }
  {
    const auto train = uniform_rows(120, 5, 8);
    const auto bg = sample_background(train, 100, 1);
    const HyperParams hps[] = {RfParams{50, 10, 2, 1}, GbtParams{200, 4, 0.1}, SvmParams{1, Kernel::Rbf, {}}};
    for (const auto& hp : hps) {
      const auto model = fit_model(train, hp, 3);
      double mean = 0;
      for (std::size_t i = 0; i < bg.rows(); ++i) mean += model.predict_proba(bg.row(i));
      mean /= static_cast<double>(bg.rows());
      for (std::size_t r = 0; r < 20; ++r) {
        const std::size_t m = 500;
        const auto est = shapley_sample(model, train.row(r), bg, m, derive_seed(9, r));
        double sum = 0;
        for (double p : est.phi) sum += p;
        c.expect(std::abs(sum - (est.fx - mean)) <= 3 * est.sum_sd / std::sqrt(double(m)) + 1e-12,
                 "efficiency for " + describe(hp));
      }
    }
  }
  return from(c, "null player, symmetry, exact enumeration, efficiency");
}

// ---------------------------------------------------------------------------
// End-to-end desk run and leakage audit

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_file(e.path());
  return out;
}

struct EndToEnd {
  Outcome outcome;
  std::optional<RunResult> result;
};

EndToEnd end_to_end(const fs::path& work) {
  Checker c;
  EndToEnd e2e;
  std::ostringstream log;
  fs::remove_all(work);
  CommonArgs args;
  args.seed = 42;
  args.backend = "offline";
  c.expect(cmd_synth(75, 75, work / "corpus", args, log) == 0, "synth");
  c.expect(cmd_extract(work / "corpus", work / "features.csv", args, log) == 0, "extract");
  const auto rows = read_feature_csv(read_file(work / "features.csv"));
  std::size_t hi = 0;
  for (const auto& r : rows) hi += r.label == Label::Hi;
  c.expect(rows.size() == 150 && hi == 75, "150 rows, 75 per class");

  double slowest = 0;
  for (const char* name : {"run_a", "run_b"}) {
    const auto t0 = std::chrono::steady_clock::now();
    if (std::string(name) == "run_a") {
      c.expect(cmd_run(work / "features.csv", work / name, args, log) == 0, "run via the command");
    } else {
      const auto config = load_config(args);
      e2e.result = run_features_file(work / "features.csv", config);
      write_run_outputs(*e2e.result, work / name, {{"features.csv", read_file(work / "features.csv")}});
    }
    c.expect(cmd_report(work / name, {}, log) == 0, "report");
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  c.expect(slowest < 600, "each run under 10 min");
  const auto a = dir_contents(work / "run_a");
  const auto b = dir_contents(work / "run_b");
  c.expect(a == b && a.size() >= 14, "reruns byte-identical (" + std::to_string(a.size()) + " files)");

  const auto eval = csv::parse(a.count("eval_report.csv") ? a.at("eval_report.csv") : "");
  double min_auc = 1;
  std::size_t rf_cells = 0;
  for (std::size_t r = 1; r < eval.size(); ++r) {
    if (eval[r][2] != "rf") continue;
    ++rf_cells;
    min_auc = std::min(min_auc, text::parse_double(eval[r][11]).value_or(0));
  }
  c.expect(rf_cells == 4 && min_auc >= 0.9, "RF holdout AUC >= 0.9 in every variant, min " + text::format_double(min_auc));

  const auto md = a.count("report.md") ? a.at("report.md") : "";
  const auto table4 = md.find("## Table IV."), table6 = md.find("## Table VI.");
  c.expect(table4 != std::string::npos && table6 != std::string::npos, "Table IV and VI sections");
  for (const char* k : {"Random Forest", "Gradient Boosting", "SVM"}) {
    std::size_t rows_in_iv = 0;
    for (std::size_t pos = md.find(std::string("| ") + k + " |", table4); pos != std::string::npos && pos < table6;
         pos = md.find(std::string("| ") + k + " |", pos + 1)) {
      ++rows_in_iv;
    }
    c.expect(rows_in_iv == 4, std::string("Table IV rows for ") + k);
  }
  c.expect(md.find("| 10 | F", table6) != std::string::npos, "Table VI has 10 ranks");
  std::string detail = "RF min holdout AUC " + text::format_double(min_auc) + ", slowest run " +
                       std::to_string(static_cast<int>(slowest)) + " s";
  if (e2e.result) {
    for (const auto& k : e2e.result->shap.kinds) {
      if (k.kind != ModelKind::RandomForest) continue;
      for (const auto& en : k.entries) {
        if (en.feature_id == "F16") detail += ", RF rank of F16: " + std::to_string(en.rank);
      }
    }
  }
  e2e.outcome = from(c, detail);
  return e2e;
}

Outcome leakage(const std::optional<RunResult>& r) {
  Checker c;
  if (!r) return {Outcome::Status::Fail, "end-to-end run did not complete"};
  c.expect(r->audit.passed(), "audit of the end-to-end run passed");
  for (const auto& ch : r->audit.checks) c.expect(ch.examined > 0, "check " + ch.name + " examined identities");
  // The audit must also catch a leak in each fitting step.
  const std::string h = r->lineage.holdout.at(0);
  auto leaks = [&](const std::function<void(Lineage&)>& inject, const std::string& name) {
    Lineage l = r->lineage;
    inject(l);
    c.expect(!leakage_audit(l).passed(), "injected leak into " + name + " detected");
  };
  leaks([&](Lineage& l) { l.normalization_fit.push_back(h); }, "normalization fit");
  leaks([&](Lineage& l) { l.shap_background.push_back(h); }, "SHAP background");
  leaks([&](Lineage& l) {
    auto& v = l.variants.back();
    for (std::size_t i = 0; i < v.ids.size(); ++i) {
      if (!v.parents[i][0].empty()) {
        v.parents[i][1] = h;
        break;
      }
    }
  }, "SMOTE neighborhood");
  leaks([&](Lineage& l) {
    auto& v = l.variants.front();
    v.ids.push_back(h);
    v.parents.push_back({});
    v.folds.front().train.push_back(v.ids.size() - 1);
  }, "fold");
  std::size_t examined = 0;
  for (const auto& ch : r->audit.checks) examined += ch.examined;
  return from(c, std::to_string(examined) + " lineage identities traced");
}

Outcome real_data() {
  const char* path = std::getenv("ENGAGE_REAL_FEATURES");
  if (!path || !*path) return {Outcome::Status::Skip, "set ENGAGE_REAL_FEATURES to a real-corpus feature CSV"};
  const auto r = run_features_file(path, RunConfig{});
  const auto* cell = r.eval.find(ModelKind::RandomForest, "dataset3");
  if (!cell) return {Outcome::Status::Info, "no dataset3 cell"};
  const double acc = cell->summary.at("accuracy").mean;
  return {Outcome::Status::Info, "RF mean holdout accuracy on dataset3 " + text::format_double(acc) +
                                     " (target 0.65, reference 0.889); deviation from reference " + text::format_double(acc - 0.889)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](const std::string& name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {Outcome::Status::Fail, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Outcome::Status::Pass   ? "PASS"
                      : o.status == Outcome::Status::Fail ? "FAIL"
                      : o.status == Outcome::Status::Info ? "INFO"
                                                          : "SKIP";
    failed += o.status == Outcome::Status::Fail;
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.1f", s);
    std::cout << tag << " " << name << " [" << secs << " s]: " << o.detail << std::endl;
    return s;
  };

  report("statistics_oracle", [] {
    const auto t0 = std::chrono::steady_clock::now();
    auto o = statistics_oracle();
    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= 30) {
      o = {Outcome::Status::Fail, "runtime over 30 s"};
    }
    return o;
  });
  report("semantic_oracle", semantic_oracle);
  std::optional<CohortPipeline> cohort;
  double cohort_seconds = 0;
  report("pipeline_counts", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    cohort = cohort_pipeline(2024);
    cohort_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return pipeline_counts(*cohort, cohort_seconds);
  });
  report("resampling_properties", [&] {
    if (!cohort) return Outcome{Outcome::Status::Fail, "pipeline did not complete"};
    const auto t0 = std::chrono::steady_clock::now();
    auto o = resampling_properties(*cohort);
    if (cohort_seconds + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= 60) {
      o = {Outcome::Status::Fail, "runtime over 1 min"};
    }
    return o;
  });
  report("model_sanity", [] {
    const auto t0 = std::chrono::steady_clock::now();
    auto o = model_sanity();
    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= 120) {
      o = {Outcome::Status::Fail, "runtime over 2 min"};
    }
    return o;
  });
  report("shapley_properties", [] {
    const auto t0 = std::chrono::steady_clock::now();
    auto o = shapley_properties();
    if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= 180) {
      o = {Outcome::Status::Fail, "runtime over 3 min"};
    }
    return o;
  });
  const auto work = fs::temp_directory_path() / "engage_acceptance";
  EndToEnd e2e;
  report("end_to_end_desk_run", [&] {
    e2e = end_to_end(work);
    return e2e.outcome;
  });
  report("leakage_audit", [&] { return leakage(e2e.result); });
  report("real_corpus_informational", real_data);
  fs::remove_all(work);
  return failed == 0 ? 0 : 1;
}
