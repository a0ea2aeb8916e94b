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

// Classifier families behind one interface: hyperparameter grids, fitting,
// probability prediction, and JSON model artifacts.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "engage/dataset.hpp"
#include "engage/error.hpp"
#include "engage/svm.hpp"
#include "engage/trees.hpp"

namespace engage {

inline constexpr int kModelArtifactVersion = 1;

enum class ModelKind { RandomForest, Boosting, Svm };

inline constexpr ModelKind kModelKinds[] = {ModelKind::RandomForest, ModelKind::Boosting, ModelKind::Svm};

inline std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::RandomForest: return "rf";
    case ModelKind::Boosting: return "gbt";
    case ModelKind::Svm: return "svm";
  }
  return "?";
}

inline std::string_view display_name(ModelKind k) {
  switch (k) {
    case ModelKind::RandomForest: return "Random Forest";
    case ModelKind::Boosting: return "Gradient Boosting";
    case ModelKind::Svm: return "SVM";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "rf") return ModelKind::RandomForest;
  if (s == "gbt") return ModelKind::Boosting;
  if (s == "svm") return ModelKind::Svm;
  fail(ErrorCode::InvalidArgument, "unknown model kind '" + std::string(s) + "'");
}

struct RfParams {
  int n_estimators = 100;
  int max_depth = 10;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  friend bool operator==(const RfParams&, const RfParams&) = default;
};

struct GbtParams {
  int iterations = 200;
  int depth = 6;
  double learning_rate = 0.1;
  friend bool operator==(const GbtParams&, const GbtParams&) = default;
};

struct SvmParams {
  double c = 1;
  Kernel kernel = Kernel::Rbf;
  Gamma gamma;
  friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

using HyperParams = std::variant<RfParams, GbtParams, SvmParams>;

inline ModelKind kind_of(const HyperParams& hp) {
  return static_cast<ModelKind>(hp.index());
}

inline nlohmann::ordered_json to_json(const HyperParams& hp) {
  nlohmann::ordered_json j;
  if (const auto* p = std::get_if<RfParams>(&hp)) {
    j = {{"n_estimators", p->n_estimators},
         {"max_depth", p->max_depth},
         {"min_samples_split", p->min_samples_split},
         {"min_samples_leaf", p->min_samples_leaf}};
  } else if (const auto* p = std::get_if<GbtParams>(&hp)) {
    j = {{"iterations", p->iterations}, {"depth", p->depth}, {"learning_rate", p->learning_rate}};
  } else {
    const auto& s = std::get<SvmParams>(hp);
    j = {{"C", s.c}, {"kernel", std::string(to_string(s.kernel))}};
    if (s.kernel != Kernel::Linear) j["gamma"] = gamma_to_string(s.gamma);
  }
  return j;
}

// Compact one-line form used in reports, e.g. "n_estimators=50;max_depth=10".
inline std::string describe(const HyperParams& hp) {
  std::string out;
  const auto j = to_json(hp);
  for (const auto& [k, v] : j.items()) {
    if (!out.empty()) out += ';';
    out += k + "=" + (v.is_string() ? v.get<std::string>() : v.is_number_integer() ? std::to_string(v.get<long long>()) : text::format_double(v.get<double>()));
  }
  return out;
}

inline HyperParams hyperparams_from_json(ModelKind kind, const nlohmann::json& j) {
  switch (kind) {
    case ModelKind::RandomForest:
      return RfParams{j.at("n_estimators").get<int>(), j.at("max_depth").get<int>(),
                      j.at("min_samples_split").get<int>(), j.at("min_samples_leaf").get<int>()};
    case ModelKind::Boosting:
      return GbtParams{j.at("iterations").get<int>(), j.at("depth").get<int>(), j.at("learning_rate").get<double>()};
    case ModelKind::Svm: {
      SvmParams s;
      s.c = j.at("C").get<double>();
      s.kernel = parse_kernel(j.at("kernel").get<std::string>());
      if (j.contains("gamma")) {
        const auto& g = j.at("gamma");
        s.gamma = g.is_string() ? parse_gamma(g.get<std::string>()) : Gamma{GammaKind::Value, g.get<double>()};
      }
      if (s.kernel == Kernel::Linear) s.gamma = {};
      return s;
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown model kind");
}

// ---------------------------------------------------------------------------
// Grids

struct RfGridSpec {
  std::vector<int> n_estimators = {50, 100, 200, 500};
  std::vector<int> max_depth = {10, 15, 20, 30};
  std::vector<int> min_samples_split = {2, 5, 10, 20};
  std::vector<int> min_samples_leaf = {1, 2, 4, 8};
};

struct GbtGridSpec {
  std::vector<int> iterations = {200, 500, 750};
  std::vector<int> depth = {4, 6, 8};
  std::vector<double> learning_rate = {0.01, 0.05, 0.1};
};

struct SvmGridSpec {
  std::vector<double> c = {0.01, 0.1, 1, 10, 100};
  std::vector<Kernel> kernel = {Kernel::Linear, Kernel::Rbf, Kernel::Poly, Kernel::Sigmoid};
  std::vector<Gamma> gamma = {{GammaKind::Value, 0.01}, {GammaKind::Value, 0.1}, {GammaKind::Value, 1},
                              {GammaKind::Scale, 0}, {GammaKind::Auto, 0}};
};

struct GridSpec {
  RfGridSpec rf;
  GbtGridSpec gbt;
  SvmGridSpec svm;
};

// Canonical order: nested loops in declaration order, last field fastest.
inline std::vector<HyperParams> expand_grid(ModelKind kind, const GridSpec& g = {}) {
  std::vector<HyperParams> out;
  switch (kind) {
    case ModelKind::RandomForest:
      for (int n : g.rf.n_estimators)
        for (int d : g.rf.max_depth)
          for (int s : g.rf.min_samples_split)
            for (int l : g.rf.min_samples_leaf) out.push_back(RfParams{n, d, s, l});
      break;
    case ModelKind::Boosting:
      for (int it : g.gbt.iterations)
        for (int d : g.gbt.depth)
          for (double lr : g.gbt.learning_rate) out.push_back(GbtParams{it, d, lr});
      break;
    case ModelKind::Svm:
      for (double c : g.svm.c)
        for (Kernel k : g.svm.kernel) {
          if (k == Kernel::Linear) {
            // gamma has no effect on the linear kernel
            out.push_back(SvmParams{c, k, {}});
            continue;
          }
          for (const auto& gm : g.svm.gamma) out.push_back(SvmParams{c, k, gm});
        }
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trained models

struct TrainedModel {
  HyperParams hp;
  std::uint64_t seed = 0;
  std::size_t feature_count = 0;
  std::variant<Forest, Boosted, SvmModel> impl;

  ModelKind kind() const { return kind_of(hp); }

  double predict_proba(std::span<const double> x) const {
    if (x.size() != feature_count) fail(ErrorCode::DimensionMismatch, "row width differs from model width");
    double p = std::visit([&](const auto& m) { return m.predict(x); }, impl);
    return std::clamp(p, 0.0, 1.0);
  }

  int predict(std::span<const double> x) const { return predict_proba(x) >= 0.5 ? 1 : 0; }
};

inline CartOptions rf_cart_options(const RfParams& p, std::size_t features) {
  return {p.max_depth, static_cast<std::uint32_t>(p.min_samples_split),
          static_cast<std::uint32_t>(p.min_samples_leaf), sqrt_features(features)};
}

inline TrainedModel fit_model(const Dataset& d, const HyperParams& hp, std::uint64_t seed,
                              const SvmFitOptions& svm_opts = {}) {
  if (d.rows() == 0) fail(ErrorCode::TooFewRows, "fit on an empty dataset");
  TrainedModel m{hp, seed, d.cols(), Forest{}};
  if (const auto* p = std::get_if<RfParams>(&hp)) {
    m.impl = fit_forest(d, static_cast<std::size_t>(p->n_estimators), rf_cart_options(*p, d.cols()), seed);
  } else if (const auto* p = std::get_if<GbtParams>(&hp)) {
    m.impl = fit_boosted(d, {static_cast<std::size_t>(p->iterations), p->depth, p->learning_rate});
  } else {
    const auto& s = std::get<SvmParams>(hp);
    m.impl = fit_svm(d, s.c, s.kernel, s.gamma, svm_opts);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Artifacts

namespace detail {

inline nlohmann::ordered_json tree_json(const Tree& t) {
  nlohmann::ordered_json feat = nlohmann::ordered_json::array(), thr = nlohmann::ordered_json::array(),
                         left = nlohmann::ordered_json::array(), right = nlohmann::ordered_json::array(),
                         val = nlohmann::ordered_json::array(), cnt = nlohmann::ordered_json::array(),
                         dep = nlohmann::ordered_json::array();
  for (const auto& n : t.nodes) {
    feat.push_back(n.feature);
    thr.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    val.push_back(n.value);
    cnt.push_back(n.count);
    dep.push_back(n.depth);
  }
  return {{"feature", feat}, {"threshold", thr}, {"left", left}, {"right", right},
          {"value", val},    {"count", cnt},     {"depth", dep}};
}

inline Tree tree_from_json(const nlohmann::json& j) {
  Tree t;
  const auto& feat = j.at("feature");
  t.nodes.resize(feat.size());
  for (std::size_t i = 0; i < feat.size(); ++i) {
    auto& n = t.nodes[i];
    n.feature = feat[i].get<std::int32_t>();
    n.threshold = j.at("threshold")[i].get<double>();
    n.left = j.at("left")[i].get<std::int32_t>();
    n.right = j.at("right")[i].get<std::int32_t>();
    n.value = j.at("value")[i].get<double>();
    n.count = j.at("count")[i].get<std::uint32_t>();
    n.depth = j.at("depth")[i].get<std::uint16_t>();
  }
  return t;
}

}  // namespace detail

inline nlohmann::ordered_json model_to_json(const TrainedModel& m) {
  nlohmann::ordered_json j;
  j["version"] = kModelArtifactVersion;
  j["kind"] = std::string(to_string(m.kind()));
  j["hyperparams"] = to_json(m.hp);
  j["seed"] = m.seed;
  j["feature_count"] = m.feature_count;
  nlohmann::ordered_json params;
  if (const auto* f = std::get_if<Forest>(&m.impl)) {
    params["trees"] = nlohmann::ordered_json::array();
    for (const auto& t : f->trees) params["trees"].push_back(detail::tree_json(t));
  } else if (const auto* b = std::get_if<Boosted>(&m.impl)) {
    params["init"] = b->init;
    params["learning_rate"] = b->learning_rate;
    params["trees"] = nlohmann::ordered_json::array();
    for (const auto& t : b->stages) params["trees"].push_back(detail::tree_json(t));
  } else {
    const auto& s = std::get<SvmModel>(m.impl);
    params["kernel"] = std::string(to_string(s.kernel));
    params["gamma"] = s.gamma;
    params["degree"] = kPolyDegree;
    params["coef0"] = kKernelCoef0;
    params["rho"] = s.rho;
    params["platt_a"] = s.platt.a;
    params["platt_b"] = s.platt.b;
    params["dim"] = s.dim;
    params["coef"] = s.coef;
    params["support"] = s.support;
  }
  j["params"] = std::move(params);
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  if (!j.contains("version") || j.at("version").get<int>() != kModelArtifactVersion) {
    fail(ErrorCode::MalformedInput, "unsupported model artifact version");
  }
  const auto kind = parse_model_kind(j.at("kind").get<std::string>());
  TrainedModel m{hyperparams_from_json(kind, j.at("hyperparams")), j.at("seed").get<std::uint64_t>(),
                 j.at("feature_count").get<std::size_t>(), Forest{}};
  const auto& p = j.at("params");
  switch (kind) {
    case ModelKind::RandomForest: {
      Forest f;
      for (const auto& t : p.at("trees")) f.trees.push_back(detail::tree_from_json(t));
      m.impl = std::move(f);
      break;
    }
    case ModelKind::Boosting: {
      Boosted b;
      b.init = p.at("init").get<double>();
      b.learning_rate = p.at("learning_rate").get<double>();
      for (const auto& t : p.at("trees")) b.stages.push_back(detail::tree_from_json(t));
      m.impl = std::move(b);
      break;
    }
    case ModelKind::Svm: {
      SvmModel s;
      s.kernel = parse_kernel(p.at("kernel").get<std::string>());
      s.gamma = p.at("gamma").get<double>();
      s.rho = p.at("rho").get<double>();
      s.platt = {p.at("platt_a").get<double>(), p.at("platt_b").get<double>()};
      s.dim = p.at("dim").get<std::size_t>();
      s.coef = p.at("coef").get<std::vector<double>>();
      s.support = p.at("support").get<std::vector<double>>();
      m.impl = std::move(s);
      break;
    }
  }
  return m;
}

}  // namespace engage
