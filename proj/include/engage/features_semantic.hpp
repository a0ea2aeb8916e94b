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

// Semantic-similarity features: cosine statistics over all sentence pairs
// and over adjacent sentence pairs, for each of three embedding models.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "engage/corpus.hpp"
#include "engage/error.hpp"
#include "engage/features_conv.hpp"
#include "engage/nlp_backends.hpp"

namespace engage {

enum class SimilarityMode { AllPairs, Adjacent };

struct SimilaritySet {
  EmbeddingModel model = EmbeddingModel::HashingOffline;
  SimilarityMode mode = SimilarityMode::AllPairs;
  std::vector<double> values;
};

inline double cosine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::DimensionMismatch, "cosine of vectors with different dims");
  double dot = 0, nx = 0, ny = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    nx += x[i] * x[i];
    ny += y[i] * y[i];
  }
  if (nx <= 0 || ny <= 0) fail(ErrorCode::ZeroVector, "cosine with a zero vector");
  return std::clamp(dot / (std::sqrt(nx) * std::sqrt(ny)), -1.0, 1.0);
}

inline double cosine(const Embedding& x, const Embedding& y) {
  if (x.model != y.model) fail(ErrorCode::DimensionMismatch, "cosine across embedding models");
  return cosine(x.values, y.values);
}

// Pairs (i, j), i < j, in lexicographic order.
inline SimilaritySet all_pairs_similarities(std::span<const Embedding> es) {
  if (es.size() < 2) fail(ErrorCode::TooFewSentences, "need at least 2 embeddings");
  SimilaritySet set{es[0].model, SimilarityMode::AllPairs, {}};
  set.values.reserve(es.size() * (es.size() - 1) / 2);
  for (std::size_t i = 0; i < es.size(); ++i) {
    for (std::size_t j = i + 1; j < es.size(); ++j) set.values.push_back(cosine(es[i], es[j]));
  }
  return set;
}

inline SimilaritySet adjacent_similarities(std::span<const Embedding> es) {
  if (es.size() < 2) fail(ErrorCode::TooFewSentences, "need at least 2 embeddings");
  SimilaritySet set{es[0].model, SimilarityMode::Adjacent, {}};
  set.values.reserve(es.size() - 1);
  for (std::size_t i = 0; i + 1 < es.size(); ++i) set.values.push_back(cosine(es[i], es[i + 1]));
  return set;
}

inline constexpr std::size_t kSemanticFeatureCount = 24;

// Feature-block order: PromCSE (F19-F26), SBERT (F27-F34), SAKIL (F35-F42).
inline constexpr std::array<EmbeddingModel, 3> kSemanticBlockModels = {
    EmbeddingModel::PromCse, EmbeddingModel::Sbert, EmbeddingModel::Sakil};

// Within each 8-slot block: all-pairs mean/sd/skew/kurt, then adjacent
// mean/sd/skew/kurt. `models[b]` serves block b.
inline std::array<std::optional<double>, kSemanticFeatureCount> semantic_features(
    std::span<const Sentence> sentences, NlpBackend& backend,
    const std::array<EmbeddingModel, 3>& models = kSemanticBlockModels) {
  std::array<std::optional<double>, kSemanticFeatureCount> out{};
  if (sentences.size() < 2) return out;
  std::vector<std::string> texts;
  texts.reserve(sentences.size());
  for (const auto& s : sentences) texts.push_back(s.text);
  for (std::size_t b = 0; b < models.size(); ++b) {
    const auto embeddings = backend.embed_batch(models[b], texts);
    const std::array<SimilaritySet, 2> sets = {all_pairs_similarities(embeddings),
                                               adjacent_similarities(embeddings)};
    for (std::size_t m = 0; m < 2; ++m) {
      const auto stats = moment_stats(sets[m].values);
      const std::size_t base = b * 8 + m * 4;
      out[base + 0] = stats.mean;
      out[base + 1] = stats.sd;
      out[base + 2] = stats.skew;
      out[base + 3] = stats.kurt;
    }
  }
  return out;
}

}  // namespace engage
