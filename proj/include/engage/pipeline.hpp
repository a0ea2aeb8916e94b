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

// The 42-slot feature registry, per-transcript extraction, and assembly of
// feature vectors into a Dataset (plus the feature CSV format).

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/csv.hpp"
#include "engage/dataset.hpp"
#include "engage/features_conv.hpp"
#include "engage/features_question.hpp"
#include "engage/features_semantic.hpp"
#include "engage/features_sentiment.hpp"
#include "engage/nlp_backends.hpp"

namespace engage {

enum class FeatureDimension { Conv, Sem, Sent, Ques };

inline std::string_view to_string(FeatureDimension d) {
  switch (d) {
    case FeatureDimension::Conv: return "Conv";
    case FeatureDimension::Sem: return "Sem";
    case FeatureDimension::Sent: return "Sent";
    case FeatureDimension::Ques: return "Ques";
  }
  return "?";
}

struct FeatureInfo {
  std::string_view id;
  std::string_view name;
  FeatureDimension dimension;
};

inline constexpr std::size_t kFeatureCount = 42;

inline constexpr std::array<FeatureInfo, kFeatureCount> kFeatureRegistry = {{
    {"F01", "therapist_words_per_turn", FeatureDimension::Conv},
    {"F02", "client_words_per_turn", FeatureDimension::Conv},
    {"F03", "client_therapist_words_ratio", FeatureDimension::Conv},
    {"F04", "client_questions_per_turn", FeatureDimension::Ques},
    {"F05", "therapist_questions_per_turn", FeatureDimension::Ques},
    {"F06", "client_therapist_question_ratio", FeatureDimension::Ques},
    {"F07", "client_turns", FeatureDimension::Conv},
    {"F08", "therapist_turns", FeatureDimension::Conv},
    {"F09", "client_therapist_turn_ratio", FeatureDimension::Conv},
    {"F10", "mean_turn_duration", FeatureDimension::Conv},
    {"F11", "client_sentiment", FeatureDimension::Sent},
    {"F12", "client_sentiment_changes", FeatureDimension::Sent},
    {"F13", "therapist_words_sd", FeatureDimension::Conv},
    {"F14", "therapist_words_skew", FeatureDimension::Conv},
    {"F15", "therapist_words_kurt", FeatureDimension::Conv},
    {"F16", "client_words_sd", FeatureDimension::Conv},
    {"F17", "client_words_skew", FeatureDimension::Conv},
    {"F18", "client_words_kurt", FeatureDimension::Conv},
    {"F19", "promcse_all_mean", FeatureDimension::Sem},
    {"F20", "promcse_all_sd", FeatureDimension::Sem},
    {"F21", "promcse_all_skew", FeatureDimension::Sem},
    {"F22", "promcse_all_kurt", FeatureDimension::Sem},
    {"F23", "promcse_adj_mean", FeatureDimension::Sem},
    {"F24", "promcse_adj_sd", FeatureDimension::Sem},
    {"F25", "promcse_adj_skew", FeatureDimension::Sem},
    {"F26", "promcse_adj_kurt", FeatureDimension::Sem},
    {"F27", "sbert_all_mean", FeatureDimension::Sem},
    {"F28", "sbert_all_sd", FeatureDimension::Sem},
    {"F29", "sbert_all_skew", FeatureDimension::Sem},
    {"F30", "sbert_all_kurt", FeatureDimension::Sem},
    {"F31", "sbert_adj_mean", FeatureDimension::Sem},
    {"F32", "sbert_adj_sd", FeatureDimension::Sem},
    {"F33", "sbert_adj_skew", FeatureDimension::Sem},
    {"F34", "sbert_adj_kurt", FeatureDimension::Sem},
    {"F35", "sakil_all_mean", FeatureDimension::Sem},
    {"F36", "sakil_all_sd", FeatureDimension::Sem},
    {"F37", "sakil_all_skew", FeatureDimension::Sem},
    {"F38", "sakil_all_kurt", FeatureDimension::Sem},
    {"F39", "sakil_adj_mean", FeatureDimension::Sem},
    {"F40", "sakil_adj_sd", FeatureDimension::Sem},
    {"F41", "sakil_adj_skew", FeatureDimension::Sem},
    {"F42", "sakil_adj_kurt", FeatureDimension::Sem},
}};

constexpr std::size_t count_dimension(FeatureDimension d) {
  std::size_t n = 0;
  for (const auto& f : kFeatureRegistry) n += f.dimension == d ? 1 : 0;
  return n;
}

static_assert(count_dimension(FeatureDimension::Conv) == 13);
static_assert(count_dimension(FeatureDimension::Sem) == 24);
static_assert(count_dimension(FeatureDimension::Sent) == 2);
static_assert(count_dimension(FeatureDimension::Ques) == 3);

// Slot index of a feature id such as "F16".
inline std::size_t feature_index(std::string_view id) {
  for (std::size_t i = 0; i < kFeatureRegistry.size(); ++i) {
    if (kFeatureRegistry[i].id == id) return i;
  }
  fail(ErrorCode::InvalidArgument, "unknown feature id " + std::string(id));
}

inline std::vector<std::string> feature_ids() {
  std::vector<std::string> ids;
  for (const auto& f : kFeatureRegistry) ids.emplace_back(f.id);
  return ids;
}

struct FeatureVector {
  std::string session_id;
  std::optional<Label> label;
  std::array<std::optional<double>, kFeatureCount> values{};

  bool operator==(const FeatureVector&) const = default;
};

struct ExtractOptions {
  WordBank bank = WordBank::defaults();
  std::array<EmbeddingModel, 3> semantic_models = kSemanticBlockModels;
};

inline FeatureVector extract_features(const Transcript& raw, NlpBackend& backend,
                                      const ExtractOptions& opts = {}) {
  try {
    const Transcript t = merge_same_speaker_runs(raw);
    FeatureVector fv{t.session_id, t.label, {}};
    auto& v = fv.values;

    const auto conv = conv_features(t);
    v[0] = conv.therapist_words_mean;
    v[1] = conv.client_words_mean;
    v[2] = conv.words_ratio;
    v[6] = conv.client_turns;
    v[7] = conv.therapist_turns;
    v[8] = conv.turn_ratio;
    v[9] = conv.mean_turn_duration;
    v[12] = conv.therapist_words_sd;
    v[13] = conv.therapist_words_skew;
    v[14] = conv.therapist_words_kurt;
    v[15] = conv.client_words_sd;
    v[16] = conv.client_words_skew;
    v[17] = conv.client_words_kurt;

    const auto q = question_features(t, opts.bank);
    v[3] = q.client_per_turn;
    v[4] = q.therapist_per_turn;
    v[5] = q.client_to_therapist;

    const auto sent = sentiment_features(t, backend);
    v[10] = sent.client_sentiment;
    v[11] = sent.client_changes;

    const auto sentences = split_sentences(t);
    const auto sem = semantic_features(sentences, backend, opts.semantic_models);
    for (std::size_t k = 0; k < sem.size(); ++k) v[18 + k] = sem[k];
    return fv;
  } catch (const Error& e) {
    throw Error(e.code(), "session '" + raw.session_id + "': " + e.what());
  }
}

struct MissingSummary {
  std::array<std::size_t, kFeatureCount> missing_per_feature{};
  std::size_t rows = 0;
  std::size_t feature_cells = 0;
  // Feature cells plus the id and label columns.
  std::size_t total_cells = 0;
  std::size_t missing_cells = 0;

  double missing_rate() const {
    return feature_cells ? static_cast<double>(missing_cells) / static_cast<double>(feature_cells) : 0.0;
  }
};

inline Dataset build_dataset(const std::vector<FeatureVector>& vectors, MissingSummary* summary = nullptr) {
  if (vectors.empty()) fail(ErrorCode::EmptyList, "no feature vectors");
  Dataset d;
  d.feature_names = feature_ids();
  std::set<std::string> seen;
  MissingSummary s;
  std::array<double, kFeatureCount> row{};
  for (const auto& fv : vectors) {
    if (!fv.label) fail(ErrorCode::UnlabeledRow, "session '" + fv.session_id + "' has no label");
    if (!seen.insert(fv.session_id).second) {
      fail(ErrorCode::DuplicateSessionId, "duplicate session id '" + fv.session_id + "'");
    }
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      row[j] = fv.values[j] ? *fv.values[j] : kMissing;
      if (!fv.values[j]) {
        ++s.missing_per_feature[j];
        ++s.missing_cells;
      }
    }
    d.add_row(fv.session_id, *fv.label, row);
  }
  s.rows = d.rows();
  s.feature_cells = d.rows() * kFeatureCount;
  s.total_cells = d.rows() * (kFeatureCount + 2);
  if (summary) *summary = s;
  return d;
}

inline std::string write_feature_csv(const std::vector<FeatureVector>& vectors) {
  csv::Row header = {"session_id", "label"};
  for (const auto& f : kFeatureRegistry) header.emplace_back(f.id);
  std::string out = csv::format_row(header);
  for (const auto& fv : vectors) {
    csv::Row row = {fv.session_id, fv.label ? std::string(to_string(*fv.label)) : ""};
    for (const auto& v : fv.values) row.push_back(v ? text::format_double(*v) : "");
    out += csv::format_row(row);
  }
  return out;
}

inline std::vector<FeatureVector> read_feature_csv(std::string_view content) {
  const auto rows = csv::parse(content);
  if (rows.empty()) fail(ErrorCode::MalformedInput, "feature CSV is empty");
  const auto& header = rows[0];
  if (header.size() != kFeatureCount + 2 || header[0] != "session_id" || header[1] != "label") {
    fail(ErrorCode::MalformedInput, "feature CSV header must be session_id,label,F01..F42");
  }
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    if (header[j + 2] != kFeatureRegistry[j].id) {
      fail(ErrorCode::MalformedInput, "feature CSV column " + std::to_string(j + 2) + " must be " +
                                          std::string(kFeatureRegistry[j].id));
    }
  }
  std::vector<FeatureVector> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size()) {
      fail(ErrorCode::MalformedInput, "feature CSV row " + std::to_string(r) + " has wrong width");
    }
    FeatureVector fv;
    fv.session_id = row[0];
    if (!text::trim(row[1]).empty()) {
      fv.label = parse_label(row[1]);
      if (!fv.label) fail(ErrorCode::MalformedInput, "bad label '" + row[1] + "'");
    }
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      const auto& cell = row[j + 2];
      if (text::trim(cell).empty()) continue;
      fv.values[j] = text::parse_double(cell);
      if (!fv.values[j]) fail(ErrorCode::MalformedInput, "bad number '" + cell + "'");
    }
    out.push_back(std::move(fv));
  }
  return out;
}

}  // namespace engage
