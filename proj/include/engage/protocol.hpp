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

// Run orchestration: configuration, the staged protocol from a raw feature
// table to reports, lineage tracking with a leakage audit, and output
// emission with a hashed manifest.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "engage/csv.hpp"
#include "engage/dataset.hpp"
#include "engage/error.hpp"
#include "engage/evaluate.hpp"
#include "engage/explain.hpp"
#include "engage/models.hpp"
#include "engage/nlp_backends.hpp"
#include "engage/pipeline.hpp"
#include "engage/preprocess.hpp"
#include "engage/random.hpp"
#include "engage/resample.hpp"
#include "engage/text.hpp"
#include "json.hpp"

namespace engage {

#ifdef ENGAGE_VERSION
inline constexpr const char* kVersion = ENGAGE_VERSION;
#else
inline constexpr const char* kVersion = "dev";
#endif

// ---------------------------------------------------------------------------
// Configuration

enum class BackendKind { Offline, Service };

struct BackendConfig {
  BackendKind kind = BackendKind::Offline;
  std::string url = "http://127.0.0.1:8080";
  bool offline_fallback = false;
  std::ptrdiff_t max_in_flight = 4;
  std::string cache;  // empty: beside the corpus
};

struct RunConfig {
  std::uint64_t seed = 42;
  BackendConfig backend;
  double contamination = 13.0 / 253.0;
  std::optional<std::size_t> holdout_per_class;  // default: 10% of the minority class
  IsolationForestOptions isolation;
  std::size_t smote_k = 5;
  std::vector<VariantSpec> variants = default_variants();
  ProtocolOptions protocol;
  std::size_t shap_samples = 100;
  std::size_t shap_background = 100;
  std::string shap_variant = "dataset0";
  std::size_t kde_grid = 200;
  double correlation_threshold = 0.75;
};

inline std::string_view to_string(VariantKind k) {
  switch (k) {
    case VariantKind::DownsampleMajority: return "downsample_majority";
    case VariantKind::MatchMajority: return "match_majority";
    case VariantKind::FixedSize: return "fixed";
  }
  return "?";
}

inline VariantKind parse_variant_kind(std::string_view s) {
  if (s == "downsample_majority") return VariantKind::DownsampleMajority;
  if (s == "match_majority") return VariantKind::MatchMajority;
  if (s == "fixed") return VariantKind::FixedSize;
  fail(ErrorCode::InvalidArgument, "unknown variant kind '" + std::string(s) + "'");
}

namespace detail {

using ojson = nlohmann::ordered_json;

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<std::string_view> known,
                           const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::InvalidArgument, where + " must be an object");
  for (const auto& [k, _] : obj.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) {
      fail(ErrorCode::InvalidArgument, "unknown config key '" + where + "." + k + "'");
    }
  }
}

template <typename T>
void read_key(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

inline ojson gamma_json(const Gamma& g) {
  return g.kind == GammaKind::Value ? ojson(g.value) : ojson(gamma_to_string(g));
}

inline Gamma gamma_from_json(const nlohmann::json& j) {
  return j.is_string() ? parse_gamma(j.get<std::string>()) : Gamma{GammaKind::Value, j.get<double>()};
}

}  // namespace detail

inline nlohmann::ordered_json run_config_to_json(const RunConfig& c) {
  using detail::ojson;
  ojson j;
  j["seed"] = c.seed;
  j["backend"] = {{"kind", c.backend.kind == BackendKind::Offline ? "offline" : "service"},
                  {"url", c.backend.url},
                  {"offline_fallback", c.backend.offline_fallback},
                  {"max_in_flight", c.backend.max_in_flight},
                  {"cache", c.backend.cache}};
  j["preprocess"] = {{"contamination", c.contamination},
                     {"holdout_per_class", c.holdout_per_class ? ojson(*c.holdout_per_class) : ojson()},
                     {"isolation_trees", c.isolation.trees},
                     {"isolation_subsample", c.isolation.subsample}};
  ojson variants = ojson::array();
  for (const auto& v : c.variants) {
    ojson e = {{"name", v.name}, {"kind", std::string(to_string(v.kind))}};
    if (v.kind == VariantKind::FixedSize) e["per_class"] = v.per_class;
    variants.push_back(e);
  }
  j["resample"] = {{"k", c.smote_k}, {"variants", variants}};
  const auto& g = c.protocol.grid;
  ojson kernels = ojson::array(), gammas = ojson::array(), kinds = ojson::array();
  for (auto k : g.svm.kernel) kernels.push_back(std::string(to_string(k)));
  for (const auto& gm : g.svm.gamma) gammas.push_back(detail::gamma_json(gm));
  for (auto k : c.protocol.kinds) kinds.push_back(std::string(to_string(k)));
  j["evaluate"] = {
      {"folds", c.protocol.folds},
      {"inner_folds", c.protocol.inner_folds},
      {"kinds", kinds},
      {"grid",
       {{"rf",
         {{"n_estimators", g.rf.n_estimators},
          {"max_depth", g.rf.max_depth},
          {"min_samples_split", g.rf.min_samples_split},
          {"min_samples_leaf", g.rf.min_samples_leaf}}},
        {"gbt", {{"iterations", g.gbt.iterations}, {"depth", g.gbt.depth}, {"learning_rate", g.gbt.learning_rate}}},
        {"svm", {{"c", g.svm.c}, {"kernel", kernels}, {"gamma", gammas}}}}}};
  j["explain"] = {{"samples", c.shap_samples}, {"background", c.shap_background}, {"variant", c.shap_variant}};
  j["kde"] = {{"grid", c.kde_grid}};
  j["correlation"] = {{"threshold", c.correlation_threshold}};
  return j;
}

inline void validate(const RunConfig& c) {
  auto bad = [](const std::string& m) { fail(ErrorCode::InvalidArgument, "config: " + m); };
  if (!(c.contamination > 0 && c.contamination < 0.5)) bad("contamination must lie in (0, 0.5)");
  if (c.holdout_per_class && *c.holdout_per_class == 0) bad("holdout_per_class must be positive");
  if (c.isolation.trees == 0 || c.isolation.subsample < 2) bad("isolation forest needs trees and subsample >= 2");
  if (c.smote_k == 0) bad("SMOTE k must be positive");
  if (c.variants.empty()) bad("at least one variant is required");
  std::set<std::string> names;
  for (const auto& v : c.variants) {
    if (v.name.empty() || !names.insert(v.name).second) bad("variant names must be unique and non-empty");
    if (v.kind == VariantKind::FixedSize && v.per_class < 2) bad("fixed variant '" + v.name + "' needs per_class >= 2");
  }
  if (c.protocol.folds < 2 || c.protocol.inner_folds < 2) bad("fold counts must be at least 2");
  if (c.protocol.kinds.empty()) bad("at least one classifier kind is required");
  for (auto k : c.protocol.kinds) {
    if (expand_grid(k, c.protocol.grid).empty()) bad("empty grid for " + std::string(to_string(k)));
  }
  if (c.shap_samples < 100) bad("explain.samples must be at least 100");
  if (c.shap_background < 10) bad("explain.background must be at least 10");
  if (!names.count(c.shap_variant)) bad("explain.variant '" + c.shap_variant + "' is not a configured variant");
  if (c.kde_grid < 2) bad("kde.grid must be at least 2");
  if (c.backend.max_in_flight < 1) bad("backend.max_in_flight must be positive");
}

// Keys absent from the document keep their defaults; unknown keys are errors.
inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  try {
    detail::reject_unknown(j, {"seed", "backend", "preprocess", "resample", "evaluate", "explain", "kde", "correlation"},
                           "config");
    detail::read_key(j, "seed", c.seed);
    if (j.contains("backend")) {
      const auto& b = j.at("backend");
      detail::reject_unknown(b, {"kind", "url", "offline_fallback", "max_in_flight", "cache"}, "backend");
      if (b.contains("kind")) {
        const auto k = b.at("kind").get<std::string>();
        if (k != "offline" && k != "service") fail(ErrorCode::InvalidArgument, "backend.kind must be offline or service");
        c.backend.kind = k == "offline" ? BackendKind::Offline : BackendKind::Service;
      }
      detail::read_key(b, "url", c.backend.url);
      detail::read_key(b, "offline_fallback", c.backend.offline_fallback);
      detail::read_key(b, "max_in_flight", c.backend.max_in_flight);
      detail::read_key(b, "cache", c.backend.cache);
    }
    if (j.contains("preprocess")) {
      const auto& p = j.at("preprocess");
      detail::reject_unknown(p, {"contamination", "holdout_per_class", "isolation_trees", "isolation_subsample"},
                             "preprocess");
      detail::read_key(p, "contamination", c.contamination);
      if (p.contains("holdout_per_class") && !p.at("holdout_per_class").is_null()) {
        c.holdout_per_class = p.at("holdout_per_class").get<std::size_t>();
      }
      detail::read_key(p, "isolation_trees", c.isolation.trees);
      detail::read_key(p, "isolation_subsample", c.isolation.subsample);
    }
    if (j.contains("resample")) {
      const auto& r = j.at("resample");
      detail::reject_unknown(r, {"k", "variants"}, "resample");
      detail::read_key(r, "k", c.smote_k);
      if (r.contains("variants")) {
        c.variants.clear();
        for (const auto& v : r.at("variants")) {
          detail::reject_unknown(v, {"name", "kind", "per_class"}, "resample.variants[]");
          VariantSpec s;
          s.name = v.at("name").get<std::string>();
          s.kind = parse_variant_kind(v.at("kind").get<std::string>());
          detail::read_key(v, "per_class", s.per_class);
          c.variants.push_back(s);
        }
      }
    }
    if (j.contains("evaluate")) {
      const auto& e = j.at("evaluate");
      detail::reject_unknown(e, {"folds", "inner_folds", "kinds", "grid"}, "evaluate");
      detail::read_key(e, "folds", c.protocol.folds);
      detail::read_key(e, "inner_folds", c.protocol.inner_folds);
      if (e.contains("kinds")) {
        c.protocol.kinds.clear();
        for (const auto& k : e.at("kinds")) c.protocol.kinds.push_back(parse_model_kind(k.get<std::string>()));
      }
      if (e.contains("grid")) {
        const auto& g = e.at("grid");
        detail::reject_unknown(g, {"rf", "gbt", "svm"}, "evaluate.grid");
        auto& grid = c.protocol.grid;
        if (g.contains("rf")) {
          const auto& rf = g.at("rf");
          detail::reject_unknown(rf, {"n_estimators", "max_depth", "min_samples_split", "min_samples_leaf"},
                                 "evaluate.grid.rf");
          detail::read_key(rf, "n_estimators", grid.rf.n_estimators);
          detail::read_key(rf, "max_depth", grid.rf.max_depth);
          detail::read_key(rf, "min_samples_split", grid.rf.min_samples_split);
          detail::read_key(rf, "min_samples_leaf", grid.rf.min_samples_leaf);
        }
        if (g.contains("gbt")) {
          const auto& gb = g.at("gbt");
          detail::reject_unknown(gb, {"iterations", "depth", "learning_rate"}, "evaluate.grid.gbt");
          detail::read_key(gb, "iterations", grid.gbt.iterations);
          detail::read_key(gb, "depth", grid.gbt.depth);
          detail::read_key(gb, "learning_rate", grid.gbt.learning_rate);
        }
        if (g.contains("svm")) {
          const auto& s = g.at("svm");
          detail::reject_unknown(s, {"c", "kernel", "gamma"}, "evaluate.grid.svm");
          detail::read_key(s, "c", grid.svm.c);
          if (s.contains("kernel")) {
            grid.svm.kernel.clear();
            for (const auto& k : s.at("kernel")) grid.svm.kernel.push_back(parse_kernel(k.get<std::string>()));
          }
          if (s.contains("gamma")) {
            grid.svm.gamma.clear();
            for (const auto& gm : s.at("gamma")) grid.svm.gamma.push_back(detail::gamma_from_json(gm));
          }
        }
      }
    }
    if (j.contains("explain")) {
      const auto& e = j.at("explain");
      detail::reject_unknown(e, {"samples", "background", "variant"}, "explain");
      detail::read_key(e, "samples", c.shap_samples);
      detail::read_key(e, "background", c.shap_background);
      detail::read_key(e, "variant", c.shap_variant);
    }
    if (j.contains("kde")) {
      detail::reject_unknown(j.at("kde"), {"grid"}, "kde");
      detail::read_key(j.at("kde"), "grid", c.kde_grid);
    }
    if (j.contains("correlation")) {
      detail::reject_unknown(j.at("correlation"), {"threshold"}, "correlation");
      detail::read_key(j.at("correlation"), "threshold", c.correlation_threshold);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// Lineage and leakage audit

struct VariantLineage {
  std::string name;
  std::vector<std::string> ids;
  std::vector<std::array<std::string, 2>> parents;
  std::vector<Fold> folds;
};

// Row identities consumed by every fitting step of a run.
struct Lineage {
  std::vector<std::string> holdout;
  std::vector<std::string> train;
  std::vector<std::string> imputation_fit;
  std::vector<std::string> normalization_fit;
  std::vector<VariantLineage> variants;
  std::vector<std::string> shap_background;
  std::vector<std::string> shap_rows;
};

struct AuditCheck {
  std::string name;
  std::size_t examined = 0;
  std::vector<std::string> violations;

  bool passed() const { return violations.empty(); }
};

struct AuditResult {
  std::vector<AuditCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed(); });
  }
};

// Every identity reaching a fit must trace back to a training original and
// never to a holdout row.
inline AuditResult leakage_audit(const Lineage& l) {
  const std::set<std::string> holdout(l.holdout.begin(), l.holdout.end());
  const std::set<std::string> train(l.train.begin(), l.train.end());
  AuditResult res;
  auto check_ids = [&](const std::string& name, const std::vector<std::string>& ids) {
    AuditCheck c{name, 0, {}};
    for (const auto& id : ids) {
      ++c.examined;
      if (holdout.count(id)) c.violations.push_back(id + " is a holdout row");
    }
    res.checks.push_back(std::move(c));
  };
  auto trace = [&](AuditCheck& c, const std::string& id, const std::string& where) {
    ++c.examined;
    if (holdout.count(id)) {
      c.violations.push_back(where + ": " + id + " is a holdout row");
    } else if (!train.count(id)) {
      c.violations.push_back(where + ": " + id + " is not a training row");
    }
  };
  auto sources = [](const VariantLineage& v, std::size_t i) {
    const auto& p = v.parents[i];
    return p[0].empty() ? std::vector<std::string>{v.ids[i]} : std::vector<std::string>{p[0], p[1]};
  };

  check_ids("split", l.train);
  check_ids("imputation_fit", l.imputation_fit);
  check_ids("normalization_fit", l.normalization_fit);

  AuditCheck rows{"variant_rows", 0, {}};
  AuditCheck smote{"smote_neighborhoods", 0, {}};
  AuditCheck folds{"folds", 0, {}};
  for (const auto& v : l.variants) {
    for (std::size_t i = 0; i < v.ids.size(); ++i) {
      if (v.parents[i][0].empty()) {
        trace(rows, v.ids[i], v.name);
      } else {
        for (const auto& p : v.parents[i]) trace(smote, p, v.name + "/" + v.ids[i]);
      }
    }
    for (std::size_t f = 0; f < v.folds.size(); ++f) {
      const std::string where = v.name + " fold " + std::to_string(f);
      for (const auto* part : {&v.folds[f].train, &v.folds[f].val}) {
        for (std::size_t i : *part) {
          if (i >= v.ids.size()) {
            folds.violations.push_back(where + ": row index out of range");
            continue;
          }
          for (const auto& id : sources(v, i)) trace(folds, id, where);
        }
      }
    }
  }
  res.checks.push_back(std::move(rows));
  res.checks.push_back(std::move(smote));
  res.checks.push_back(std::move(folds));
  check_ids("shap_background", l.shap_background);
  check_ids("shap_rows", l.shap_rows);
  return res;
}

inline nlohmann::ordered_json audit_json(const AuditResult& a) {
  nlohmann::ordered_json j;
  j["passed"] = a.passed();
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : a.checks) {
    checks.push_back({{"check", c.name}, {"examined", c.examined}, {"violations", c.violations}});
  }
  j["checks"] = checks;
  return j;
}

// ---------------------------------------------------------------------------
// Protocol run

struct ClassCounts {
  std::size_t hi = 0;
  std::size_t lo = 0;

  std::size_t total() const { return hi + lo; }
};

inline ClassCounts class_counts(const Dataset& d) { return {d.count(Label::Hi), d.count(Label::Lo)}; }

struct KdeSeries {
  std::string source;  // "train" or a variant name
  std::string feature_id;
  std::vector<KdePoint> curve;
};

struct KdeOverlap {
  std::string variant;
  std::string feature_id;
  double overlap = 0;
};

struct RunResult {
  RunConfig config;
  MissingSummary missing;
  ClassCounts input, post_outlier, holdout_counts, train_counts;
  std::vector<std::string> outlier_ids;
  std::vector<double> outlier_scores;  // aligned with the input rows
  Dataset raw;                         // input, missing cells intact
  std::size_t holdout_per_class = 0;
  std::vector<double> means;
  MinMaxParams minmax;
  Dataset train;    // imputed with training means, normalized
  Dataset holdout;  // same transform as train
  std::vector<Variant> variants;
  EvalReport eval;
  ShapReport shap;
  Dataset shap_background;
  PearsonResult pearson;
  std::vector<KdeSeries> kde;
  std::vector<KdeOverlap> kde_overlap;
  std::vector<std::string> kde_skipped;
  Lineage lineage;
  AuditResult audit;
};

namespace detail {

inline std::string strip_code(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

// Runs one stage; any failure is rethrown tagged with the stage name.
template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("stage '") + name + "' failed: " + strip_code(e));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("stage '") + name + "' failed: " + e.what());
  }
}

inline std::vector<double> column(const Dataset& d, std::size_t j) {
  std::vector<double> v(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) v[i] = d.at(i, j);
  return v;
}

}  // namespace detail

// impute -> outliers -> split -> normalize -> variants -> evaluate -> explain,
// plus correlation and density summaries. Outlier scoring sees the full
// table imputed with its own means; the rows kept are then re-imputed from
// their raw values with training means only.
inline RunResult run_protocol(const Dataset& raw, const MissingSummary& missing, const RunConfig& config) {
  validate(config);
  RunResult r;
  r.config = config;
  r.missing = missing;
  r.raw = raw;
  const std::uint64_t seed = config.seed;

  const Dataset full = detail::stage("impute", [&] {
    if (raw.rows() == 0) fail(ErrorCode::TooFewRows, "feature table is empty");
    r.input = class_counts(raw);
    return impute_means(raw, raw);
  });

  const auto outliers = detail::stage("outliers", [&] {
    return remove_outliers(full, config.contamination, derive_seed(seed, "outliers"), config.isolation);
  });
  r.outlier_ids = outliers.removed_ids;
  r.outlier_scores = outliers.scores;
  r.post_outlier = class_counts(outliers.kept);

  const Split split = detail::stage("split", [&] {
    const std::set<std::string> removed(outliers.removed_ids.begin(), outliers.removed_ids.end());
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      if (!removed.count(raw.ids[i])) keep.push_back(i);
    }
    const Dataset kept_raw = raw.subset(keep);
    r.holdout_per_class = config.holdout_per_class.value_or(default_holdout_per_class(kept_raw));
    if (r.holdout_per_class == 0) fail(ErrorCode::ClassTooSmall, "minority class too small for a holdout");
    return balanced_holdout_split(kept_raw, {r.holdout_per_class, derive_seed(seed, "split")});
  });
  r.holdout_counts = class_counts(split.test);
  r.train_counts = class_counts(split.train);

  detail::stage("normalize", [&] {
    r.means = fit_means(split.train);
    const Dataset train_imp = impute(split.train, r.means);
    r.minmax = minmax_fit(train_imp);
    r.train = minmax_apply(train_imp, r.minmax);
    r.holdout = minmax_apply(impute(split.test, r.means), r.minmax);
  });

  r.variants = detail::stage("variants", [&] {
    return make_variants(r.train, derive_seed(seed, "variants"), config.variants, config.smote_k);
  });

  r.eval = detail::stage("evaluate", [&] {
    return evaluate_protocol(r.holdout, r.variants, config.protocol, derive_seed(seed, "evaluate"));
  });

  const Variant* shap_variant = nullptr;
  detail::stage("explain", [&] {
    for (const auto& v : r.variants) {
      if (v.spec.name == config.shap_variant) shap_variant = &v;
    }
    if (!shap_variant) fail(ErrorCode::InvalidArgument, "unknown SHAP variant '" + config.shap_variant + "'");
    const auto& rows = shap_variant->data;
    r.shap_background = sample_background(rows, config.shap_background, derive_seed(seed, "shap"));
    for (ModelKind k : config.protocol.kinds) {
      const auto* cell = r.eval.find(k, config.shap_variant);
      r.shap.kinds.push_back(shap_ranking(cell->models, rows, r.shap_background, config.shap_samples,
                                          derive_seed(derive_seed(seed, "shap"), std::string(to_string(k)))));
    }
  });

  r.pearson = detail::stage("correlation", [&] {
    Dataset imputed = impute(split.train, r.means);
    return pearson_matrix(imputed, config.correlation_threshold);
  });

  detail::stage("kde", [&] {
    std::vector<std::pair<std::string, const Dataset*>> sources = {{"train", &r.train}};
    for (const auto& v : r.variants) sources.emplace_back(v.spec.name, &v.data);
    for (const auto& [name, d] : sources) {
      for (std::size_t j = 0; j < d->cols(); ++j) {
        const auto values = detail::column(*d, j);
        try {
          r.kde.push_back({name, d->feature_names[j], kde_curve(values, config.kde_grid)});
        } catch (const Error& e) {
          if (e.code() != ErrorCode::DegenerateSample) throw;
          r.kde_skipped.push_back(name + ":" + d->feature_names[j]);
          continue;
        }
        if (name == "train") continue;
        const auto base = detail::column(r.train, j);
        r.kde_overlap.push_back({name, d->feature_names[j], kde_overlap(base, values)});
      }
    }
  });

  detail::stage("audit", [&] {
    auto& l = r.lineage;
    l.holdout = split.test.ids;
    l.train = split.train.ids;
    l.imputation_fit = split.train.ids;
    l.normalization_fit = split.train.ids;
    for (const auto& v : r.variants) l.variants.push_back({v.spec.name, v.data.ids, v.data.parents, r.eval.folds.at(v.spec.name)});
    l.shap_background = r.shap_background.ids;
    l.shap_rows = shap_variant->data.ids;
    r.audit = leakage_audit(l);
    if (!r.audit.passed()) fail(ErrorCode::InvalidArgument, "leakage audit found holdout rows in a fitting step");
  });
  return r;
}

// ---------------------------------------------------------------------------
// Outputs

inline std::string dataset_csv(const Dataset& d, const std::string& group_column = "",
                               const std::string& group = "") {
  csv::Row header;
  if (!group_column.empty()) header.push_back(group_column);
  for (const char* h : {"session_id", "label", "parent_a", "parent_b"}) header.emplace_back(h);
  header.insert(header.end(), d.feature_names.begin(), d.feature_names.end());
  std::string out = csv::format_row(header);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    csv::Row row;
    if (!group_column.empty()) row.push_back(group);
    row.push_back(d.ids[i]);
    row.emplace_back(to_string(d.labels[i]));
    row.push_back(d.parents[i][0]);
    row.push_back(d.parents[i][1]);
    for (double v : d.row(i)) row.push_back(is_missing(v) ? "" : text::format_double(v));
    out += csv::format_row(row);
  }
  return out;
}

inline std::string variants_csv(const std::vector<Variant>& variants) {
  std::string out;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    std::string part = dataset_csv(variants[v].data, "variant", variants[v].spec.name);
    out += v == 0 ? part : part.substr(part.find("\r\n") + 2);
  }
  return out;
}

inline std::string kde_curves_csv(const std::vector<KdeSeries>& series) {
  std::string out = csv::format_row({"source", "feature_id", "x", "density"});
  for (const auto& s : series) {
    for (const auto& p : s.curve) {
      out += csv::format_row({s.source, s.feature_id, text::format_double(p.x), text::format_double(p.density)});
    }
  }
  return out;
}

inline std::string kde_overlap_csv(const std::vector<KdeOverlap>& rows) {
  std::string out = csv::format_row({"variant", "feature_id", "overlap_with_train"});
  for (const auto& o : rows) out += csv::format_row({o.variant, o.feature_id, text::format_double(o.overlap)});
  return out;
}

inline std::string outliers_csv(const Dataset& raw, std::span<const double> scores,
                                const std::vector<std::string>& removed) {
  const std::set<std::string> gone(removed.begin(), removed.end());
  std::string out = csv::format_row({"session_id", "label", "anomaly_score", "removed"});
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    out += csv::format_row({raw.ids[i], std::string(to_string(raw.labels[i])), text::format_double(scores[i]),
                            gone.count(raw.ids[i]) ? "1" : "0"});
  }
  return out;
}

inline nlohmann::ordered_json counts_json(const ClassCounts& c) {
  return {{"HI", c.hi}, {"LO", c.lo}, {"total", c.total()}};
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + p.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + p.string());
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct NamedInput {
  std::string name;
  std::string content;
};

inline const char* kManifestName = "manifest.json";

// Writes every report into `out` and a manifest carrying seeds, versions,
// counts and the SHA-256 of every input and output. No timestamps, so a
// rerun with identical inputs is byte-identical.
inline void write_run_outputs(const RunResult& r, const std::filesystem::path& out,
                              const std::vector<NamedInput>& inputs) {
  std::filesystem::create_directories(out);
  std::vector<std::pair<std::string, std::string>> files = {
      {"eval_report.csv", eval_report_csv(r.eval)},
      {"eval_report.json", eval_report_json(r.eval).dump(2) + "\n"},
      {"shap_report.csv", shap_report_csv(r.shap)},
      {"pearson_matrix.csv", pearson_csv(r.pearson)},
      {"pearson_strong_pairs.csv", strong_pairs_csv(r.pearson)},
      {"kde_curves.csv", kde_curves_csv(r.kde)},
      {"kde_overlap.csv", kde_overlap_csv(r.kde_overlap)},
      {"preprocess_params.json", preprocess_params_json(r.train.feature_names, r.means, r.minmax).dump(2) + "\n"},
      {"outliers.csv", outliers_csv(r.raw, r.outlier_scores, r.outlier_ids)},
      {"train.csv", dataset_csv(r.train)},
      {"holdout.csv", dataset_csv(r.holdout)},
      {"variants.csv", variants_csv(r.variants)},
  };
  nlohmann::ordered_json m;
  m["tool"] = "engage";
  m["version"] = kVersion;
  m["model_artifact_version"] = kModelArtifactVersion;
  m["seed"] = r.config.seed;
  m["config"] = run_config_to_json(r.config);
  nlohmann::ordered_json in = nlohmann::ordered_json::object();
  for (const auto& i : inputs) in[i.name] = sha256_hex(i.content);
  m["inputs"] = in;
  m["missing"] = {{"rows", r.missing.rows},
                  {"feature_cells", r.missing.feature_cells},
                  {"total_cells", r.missing.total_cells},
                  {"missing_cells", r.missing.missing_cells},
                  {"missing_rate", r.missing.missing_rate()}};
  nlohmann::ordered_json per_feature = nlohmann::ordered_json::object();
  for (std::size_t j = 0; j < kFeatureCount; ++j) per_feature[std::string(kFeatureRegistry[j].id)] = r.missing.missing_per_feature[j];
  m["missing"]["per_feature"] = per_feature;
  m["table1"] = {{"input", counts_json(r.input)},
                 {"outlier_removed", counts_json(r.post_outlier)},
                 {"holdout", counts_json(r.holdout_counts)},
                 {"train", counts_json(r.train_counts)},
                 {"outliers_removed", r.outlier_ids.size()},
                 {"holdout_per_class", r.holdout_per_class}};
  m["outlier_ids"] = r.outlier_ids;
  m["holdout_ids"] = r.holdout.ids;
  nlohmann::ordered_json t2 = nlohmann::ordered_json::array();
  for (const auto& v : r.variants) {
    std::size_t synthetic = 0;
    for (std::size_t i = 0; i < v.data.rows(); ++i) synthetic += v.data.is_synthetic(i);
    t2.push_back({{"name", v.spec.name},
                  {"kind", std::string(to_string(v.spec.kind))},
                  {"HI", v.data.count(Label::Hi)},
                  {"LO", v.data.count(Label::Lo)},
                  {"synthetic", synthetic},
                  {"tomek_removed", v.tomek_removed},
                  {"tomek_applied", v.spec.kind != VariantKind::DownsampleMajority}});
  }
  m["table2"] = t2;
  m["shap"] = {{"variant", r.config.shap_variant},
               {"rows", r.lineage.shap_rows.size()},
               {"background", r.shap_background.rows()},
               {"samples", r.config.shap_samples},
               {"reduction", "mean absolute Shapley value over rows and fold models"}};
  m["kde_skipped"] = r.kde_skipped;
  m["leakage_audit"] = audit_json(r.audit);
  nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
  for (const auto& [name, content] : files) {
    write_file(out / name, content);
    outputs[name] = sha256_hex(content);
  }
  m["outputs"] = outputs;
  write_file(out / kManifestName, m.dump(2) + "\n");
}

}  // namespace engage
